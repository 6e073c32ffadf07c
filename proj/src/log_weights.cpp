#include "tpmoe/log_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tpmoe
{

double log_sum_exp(std::span<const double> log_values)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    double top = neg_inf;
    for (double v : log_values)
        if (std::isfinite(v)) top = std::max(top, v);
    if (top == neg_inf) return neg_inf;
    double acc = 0.0;
    for (double v : log_values)
        if (std::isfinite(v)) acc += std::exp(v - top);
    return top + std::log(acc);
}

std::vector<double> normalize_log_weights(std::span<const double> log_values)
{
    std::vector<double> out(log_values.size(), 0.0);
    if (out.empty()) return out;
    const double total = log_sum_exp(log_values);
    if (!std::isfinite(total))
    {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::isfinite(log_values[i]) ? std::exp(log_values[i] - total)
                                              : 0.0;
    return out;
}

std::size_t categorical_from_uniform(std::span<const double> probs, double u)
{
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        if (probs[i] <= 0.0) continue;
        cumulative += probs[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    return last_positive;
}

}  // namespace tpmoe
