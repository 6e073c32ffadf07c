#include "tpmoe/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tpmoe
{

namespace
{

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;
constexpr int kRounds = 10;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi)
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

Philox4x32::Philox4x32(key_type key, counter_type counter) noexcept
    : key_(key), counter_(counter)
{}

Philox4x32::Philox4x32(std::uint64_t seed, StreamTag tag,
                       std::uint32_t particle,
                       std::uint32_t observation) noexcept
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      counter_{0, static_cast<std::uint32_t>(tag), particle, observation}
{}

Philox4x32::counter_type Philox4x32::block(counter_type ctr,
                                           key_type key) noexcept
{
    for (int round = 0; round < kRounds; ++round)
    {
        if (round > 0)
        {
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

Philox4x32::result_type Philox4x32::operator()() noexcept
{
    if (used_ == 4)
    {
        buffer_ = block(counter_, key_);
        ++counter_[0];  // block index; the other words identify the stream
        used_ = 0;
    }
    return buffer_[used_++];
}

double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double standard_normal(Rng& rng)
{
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double normal(Rng& rng, double mean, double sd)
{
    return mean + sd * standard_normal(rng);
}

double gamma_shape_rate(Rng& rng, double shape, double rate)
{
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double inv_gamma(Rng& rng, double shape, double scale)
{
    // X ~ Gamma(shape, rate = scale)  =>  1/X ~ Inv-Gamma(shape, scale)
    const double g = gamma_shape_rate(rng, shape, scale);
    return 1.0 / std::max(g, std::numeric_limits<double>::min());
}

double beta(Rng& rng, double a, double b)
{
    const double x = gamma_shape_rate(rng, a, 1.0);
    const double y = gamma_shape_rate(rng, b, 1.0);
    return x / (x + y);
}

double student_t(Rng& rng, double dof)
{
    return std::student_t_distribution<double>(dof)(rng);
}

}  // namespace tpmoe
