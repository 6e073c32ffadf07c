#pragma once

#include "tpmoe/kernel.hpp"
#include "tpmoe/random.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace tpmoe
{

/// Parameters of one student-t process expert. The noise variance that
/// enters the covariance is always |h|.
struct TPParams
{
    KernelParams kernel;
    double h = 0.1;
    double nu = 20.0;
    double sigma2 = 1.0;

    double noise() const noexcept { return std::abs(h); }
};

/// Multivariate student-t predictive T(dof, mean, scale).
struct StudentTPredictive
{
    double dof = 1.0;
    Vector mean;
    Matrix scale;
};

/// Log density of a zero-mean multivariate student-t with n dimensions,
/// given the quadratic form y'C^{-1}y and log|C|.
double student_t_log_density(double quad, double logdet, double n, double nu);

/// Exact TP log marginal likelihood log T(y; nu, 0, K_theta + |h| I).
double tp_log_marginal(const Eigen::Ref<const Vector>& y,
                       const InputMatrix& X, const TPParams& p);

/// Same, with an explicit diagonal noise in place of |h|.
double tp_log_marginal_with_noise(const Eigen::Ref<const Vector>& y,
                                  const InputMatrix& X,
                                  const KernelParams& kernel, double noise,
                                  double nu);

/// Closed-form posterior predictive of noisy outputs at X_star. With an
/// empty history (y.size() == 0) this is the prior predictive
/// T(nu, 0, K** + |h| I).
StudentTPredictive tp_predict(const Eigen::Ref<const Vector>& y,
                              const InputMatrix& X,
                              const InputMatrix& X_star, const TPParams& p);

/// Indices [0, n) when n <= batch, otherwise `batch` indices drawn
/// uniformly without replacement, returned in increasing order.
std::vector<Eigen::Index> draw_minibatch(Eigen::Index n, std::size_t batch,
                                         Rng& rng);

/// Likelihood terms of a cluster evaluated on a subset of its members.
///
/// With m = subset size and n = cluster size, the subset covariance is
/// K_theta + (n/m)|h| I and the log-likelihood is (n/m) times the student-t
/// log density of the subset. For m == n this is the exact likelihood.
struct SubsetFit
{
    double quad = 0.0;
    double logdet = 0.0;
    Eigen::Index m = 0;
    double upweight = 1.0;  ///< n / m

    double log_likelihood(double nu) const;
    /// Effective observation count m * (n / m) used by the sigma^2 update.
    double effective_count() const { return upweight * static_cast<double>(m); }
};

SubsetFit fit_subset(const Eigen::Ref<const Vector>& y, const InputMatrix& X,
                     const std::vector<Eigen::Index>& subset,
                     const KernelParams& kernel, double h);

/// Log-likelihood of a cluster restricted to `subset` (see SubsetFit).
/// Delegates to tp_log_marginal unchanged when the subset is the whole
/// cluster.
double subset_log_likelihood(const Eigen::Ref<const Vector>& y,
                             const InputMatrix& X,
                             const std::vector<Eigen::Index>& subset,
                             const TPParams& p);

/// Minibatched TP log-likelihood: exact when N <= batch, otherwise the
/// noise-inflated, (N/batch)-upweighted likelihood of a uniform subsample.
/// Throws InputError for batch == 0.
double minibatch_log_likelihood(const Eigen::Ref<const Vector>& y,
                                const InputMatrix& X, const TPParams& p,
                                std::size_t batch, Rng& rng);

Vector select(const Eigen::Ref<const Vector>& y,
              const std::vector<Eigen::Index>& idx);
InputMatrix select_rows(const InputMatrix& X,
                        const std::vector<Eigen::Index>& idx);

}  // namespace tpmoe
