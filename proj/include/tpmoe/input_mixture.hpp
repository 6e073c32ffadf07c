#pragma once

// Dirichlet-process gating over the input space.
//
// Each cluster's inputs are Gaussian with a normal-inverse-Wishart prior on
// (mean, covariance). Integrating those out leaves a multivariate student-t
// predictive for the next input, which drives the CRP assignment rule.

#include "tpmoe/kernel.hpp"
#include "tpmoe/random.hpp"

#include <span>
#include <vector>

namespace tpmoe
{

struct NIWPrior
{
    Vector mu0;
    double lambda0 = 1.0;
    Matrix psi0;
    double nu0 = 3.0;

    /// mu0 = 0, lambda0 = 1, Psi0 = I, nu0 = D + 2.
    static NIWPrior standard(Eigen::Index dim);
    Eigen::Index dim() const noexcept { return mu0.size(); }
    /// Throws InputError unless Psi0 is symmetric PD and nu0 > D - 1.
    void validate() const;
};

/// Student-t predictive over inputs: T(location, scale, dof).
struct InputPredictive
{
    Vector location;
    Matrix scale;
    double dof = 1.0;
};

/// Running count, mean and scatter sum_i (x_i - mean)(x_i - mean)' of the
/// inputs assigned to one cluster.
struct ClusterInputStats
{
    std::size_t n = 0;
    Vector mean;
    Matrix scatter;

    static ClusterInputStats empty(Eigen::Index dim);

    /// Posterior predictive for the next input (prior predictive at n = 0).
    InputPredictive predictive(const NIWPrior& prior) const;
};

ClusterInputStats update_input_stats(const ClusterInputStats& stats,
                                     const Eigen::Ref<const Vector>& x);

/// Log density of x under the cluster's NIW posterior predictive.
double input_log_density(const Eigen::Ref<const Vector>& x,
                         const ClusterInputStats& stats,
                         const NIWPrior& prior);

/// Same, under the prior predictive (an empty cluster).
double input_log_density(const Eigen::Ref<const Vector>& x,
                         const NIWPrior& prior);

/// CRP probabilities for x joining each existing cluster or a new one.
/// Entry k < clusters.size() is proportional to n_k * T_k(x); the final
/// entry is proportional to alpha * T_0(x). Computed in log space.
std::vector<double> crp_assignment_probabilities(
    std::span<const ClusterInputStats> clusters, double alpha,
    const NIWPrior& prior, const Eigen::Ref<const Vector>& x);

/// DP concentration with its Gamma(shape a0, rate b0) prior.
struct Concentration
{
    double alpha = 1.0;
    double a0 = 1.0;
    double b0 = 1.0;
};

/// Mixing probability pi_alpha of the auxiliary-variable update for alpha:
/// pi / (1 - pi) = (a0 + K - 1) / (i (b0 - log rho)).
double alpha_mixture_weight(double a0, double b0, std::size_t clusters,
                            std::size_t observations, double rho);

/// One auxiliary-variable Gibbs update of alpha given K clusters among
/// i observations. Requires K >= 1 and i >= 1.
double sample_alpha(const Concentration& conc, std::size_t clusters,
                    std::size_t observations, Rng& rng);

}  // namespace tpmoe
