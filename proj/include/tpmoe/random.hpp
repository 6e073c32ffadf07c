#pragma once

// Counter-based random streams.
//
// Every random draw in the engine comes from a Philox4x32-10 stream whose key
// is the master seed and whose counter encodes (purpose, particle, observation).
// A stream therefore depends only on where it is used, never on the order in
// which threads happen to run.

#include <array>
#include <cstdint>
#include <limits>

namespace tpmoe
{

/// Purpose tags occupying one counter word, so streams for different uses
/// never overlap even for the same particle and observation.
enum class StreamTag : std::uint32_t
{
    particle_update = 1,
    resample = 2,
    predict = 3,
    test = 0xffff,
};

class Philox4x32
{
public:
    using result_type = std::uint32_t;
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    Philox4x32(key_type key, counter_type counter) noexcept;

    /// Stream for a (seed, tag, particle, observation) tuple.
    Philox4x32(std::uint64_t seed, StreamTag tag, std::uint32_t particle,
               std::uint32_t observation) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept;

    /// The raw 10-round bijection, exposed for known-answer tests.
    static counter_type block(counter_type counter, key_type key) noexcept;

    bool operator==(const Philox4x32& other) const noexcept = default;

private:
    key_type key_;
    counter_type counter_;
    counter_type buffer_{};
    unsigned used_ = 4;
};

using Rng = Philox4x32;

// Distribution helpers. All parameterized the way they appear in the model:
// gamma by (shape, rate), inverse-gamma by (shape, scale).
double uniform01(Rng& rng);
double standard_normal(Rng& rng);
double normal(Rng& rng, double mean, double sd);
double gamma_shape_rate(Rng& rng, double shape, double rate);
double inv_gamma(Rng& rng, double shape, double scale);
double beta(Rng& rng, double a, double b);
double student_t(Rng& rng, double dof);

}  // namespace tpmoe
