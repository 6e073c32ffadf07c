#pragma once

// Per-cluster parameter updates: Gibbs draws for sigma^2 and k0^2, a
// stepping-out slice sampler for nu and an elliptical slice sampler for
// (log theta, h).

#include "tpmoe/random.hpp"
#include "tpmoe/student_t_process.hpp"

#include <functional>
#include <span>
#include <vector>

namespace tpmoe
{

/// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale/x).
struct InvGammaParams
{
    double shape = 1.0;
    double scale = 1.0;

    double log_pdf(double x) const;
};

struct SliceConfig
{
    double width = 1.0;
    int max_step_out = 10;
    int max_shrink = 100;

    void validate() const;
};

/// Gamma(shape, rate) prior on the degrees of freedom.
struct DofPrior
{
    double shape = 2.0;
    double rate = 0.1;
};

/// Gaussian prior on log theta plus the h ~ N(0, k0^2) hierarchy.
struct KernelPrior
{
    double m0 = 0.0;
    double s0_sq = 1.0;
};

/// Full conditional of sigma^2 given the (possibly minibatched) cluster fit.
/// An empty fit gives the prior Inv-Gamma(nu/2, nu/2).
InvGammaParams sigma2_conditional(const SubsetFit& fit, double nu);

double gibbs_sigma2(const SubsetFit& fit, double nu, Rng& rng);

/// Draw sigma^2 for a cluster's data restricted to `subset` (the whole
/// cluster when it fits in one batch).
double gibbs_sigma2(const Eigen::Ref<const Vector>& y, const InputMatrix& X,
                    const std::vector<Eigen::Index>& subset,
                    const TPParams& p, Rng& rng);

/// log p(nu | sigma^2) up to a constant: Gamma(nu; prior) times
/// Inv-Gamma(sigma^2; nu/2, nu/2). With `with_likelihood` false only the
/// prior term remains.
double nu_log_target(double nu, double sigma2, const DofPrior& prior,
                     bool with_likelihood = true);

/// One stepping-out/shrinkage slice transition on the real line. Returns the
/// current point unchanged if the shrink cap is reached.
double slice_sample(const std::function<double(double)>& log_density,
                    double current, const SliceConfig& cfg, Rng& rng);

/// One slice transition on log nu targeting nu_log_target (Jacobian
/// included). Always returns a positive value.
double slice_sample_nu(double nu, double sigma2, const SliceConfig& cfg,
                       Rng& rng, const DofPrior& prior = {},
                       bool with_likelihood = true);

/// Inv-Gamma((K+1)/2, (1 + sum h^2) / (2K)).
InvGammaParams k0_squared_conditional(std::span<const double> h);

double gibbs_k0_squared(std::span<const double> h, Rng& rng);

struct EssResult
{
    Vector state;
    double log_likelihood = 0.0;
    double threshold = 0.0;  ///< log slice height the new state exceeded
    bool moved = false;
};

/// One elliptical slice sampling transition for a state with an independent
/// Gaussian prior N(prior_mean, diag(prior_sd^2)). The log-likelihood may
/// return -inf (or throw NumericalError) to reject a point. If the angle
/// bracket collapses the current state is returned.
EssResult elliptical_slice(const Vector& current, double current_loglik,
                           const Vector& prior_mean, const Vector& prior_sd,
                           const std::function<double(const Vector&)>& loglik,
                           Rng& rng);

struct ThetaH
{
    double theta = 1.0;
    double h = 0.0;
    double log_likelihood = 0.0;
    double threshold = 0.0;
};

/// ESS on (log theta, h) with prior N(m0, s0^2) x N(0, k0^2). The
/// likelihood is the TP marginal of the cluster's data on `subset`, with the
/// subset's noise inflation and upweighting when it is a proper minibatch.
ThetaH ess_update_theta_h(const Eigen::Ref<const Vector>& y,
                          const InputMatrix& X,
                          const std::vector<Eigen::Index>& subset,
                          const TPParams& p, double k0_squared,
                          const KernelPrior& prior, Rng& rng);

}  // namespace tpmoe
