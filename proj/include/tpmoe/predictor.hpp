#pragma once

#include "tpmoe/smc.hpp"

#include <cstdint>
#include <vector>

namespace tpmoe
{

/// One univariate student-t term of the predictive mixture.
struct MixtureComponent
{
    double weight = 0.0;  ///< particle weight x gate weight
    std::size_t particle = 0;
    int cluster = 0;
    double dof = 1.0;
    double mean = 0.0;
    double scale = 0.0;  ///< variance-scale of the t (not its variance)
    std::size_t conditioning = 0;  ///< points the expert conditioned on
};

struct PredictiveResult
{
    std::vector<MixtureComponent> components;
    double mean = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
};

struct PredictOptions
{
    std::size_t mc_draws = 4000;
    /// Experts with more members than this condition on the `budget` members
    /// closest to x*. Zero means no limit.
    std::size_t budget = 50;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;  ///< distinguishes predictions within a run
};

/// Gate probabilities over the particle's existing clusters, proportional
/// to N_k * T_k(x*). No new-cluster entry.
std::vector<double> gate_weights(const Particle& particle,
                                 const NIWPrior& prior,
                                 const Eigen::Ref<const Vector>& x_star);

/// Members of `cluster` used to condition its prediction at x*: all of them
/// when within budget, else the `budget` nearest to x* (latest wins ties),
/// returned in increasing order.
std::vector<Eigen::Index> conditioning_members(const Cluster& cluster,
                                               const InputMatrix& X,
                                               const Eigen::Ref<const Vector>& x_star,
                                               std::size_t budget);

/// Particle- and gate-weighted student-t mixture at x*, with its exact mean
/// and Monte Carlo 2.5% / 97.5% quantiles. Does not modify the ensemble.
PredictiveResult predict(const ParticleEnsemble& ensemble,
                         const Eigen::Ref<const Vector>& x_star,
                         const PredictOptions& opts);

/// Quantiles of a mixture of univariate t components by seeded Monte Carlo.
std::pair<double, double> mixture_interval(
    const std::vector<MixtureComponent>& components, std::size_t draws,
    Rng& rng, double lower_q = 0.025, double upper_q = 0.975);

/// Type-7 (linear interpolation) sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double q);

}  // namespace tpmoe
