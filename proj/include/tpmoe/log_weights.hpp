#pragma once

#include <span>
#include <vector>

namespace tpmoe
{

/// log(sum(exp(v))), max-shifted. Returns -inf for an empty input or when
/// every entry is -inf.
double log_sum_exp(std::span<const double> log_values);

/// Normalized probabilities from unnormalized log weights. Non-finite
/// entries other than -inf are treated as -inf. When nothing is finite the
/// result is uniform.
std::vector<double> normalize_log_weights(std::span<const double> log_values);

/// Index drawn from a probability vector given a uniform draw in [0, 1).
std::size_t categorical_from_uniform(std::span<const double> probs, double u);

}  // namespace tpmoe
