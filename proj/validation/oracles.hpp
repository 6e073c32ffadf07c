#pragma once

// Reference computations used to check the engine. Each one takes a
// different numerical route from the production code: explicit inverses and
// LU determinants instead of Cholesky solves, Boost distributions instead of
// hand-written densities, and quadrature for normalizing constants.

#include <Eigen/Dense>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace tpmoe::oracle
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// RBF Gram matrix plus noise, written out directly.
inline MatrixXd gram(const MatrixXd& X, double theta, double noise)
{
    const Eigen::Index n = X.rows();
    MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
        {
            double d2 = 0.0;
            for (Eigen::Index d = 0; d < X.cols(); ++d)
                d2 += (X(i, d) - X(j, d)) * (X(i, d) - X(j, d));
            k(i, j) = std::exp(-0.5 * theta * d2) + (i == j ? noise : 0.0);
        }
    return k;
}

inline double quad_form(const MatrixXd& C, const VectorXd& y)
{
    const MatrixXd inv = C.fullPivLu().inverse();
    return y.dot(inv * y);
}

inline double log_det(const MatrixXd& C)
{
    return std::log(std::abs(C.fullPivLu().determinant()));
}

/// Zero-mean Gaussian log density.
inline double gaussian_log_density(const MatrixXd& C, const VectorXd& y)
{
    const double n = static_cast<double>(y.size());
    return -0.5 * quad_form(C, y) - 0.5 * log_det(C)
           - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

/// Zero-mean multivariate student-t log density written from the textbook
/// form with an explicit inverse.
inline double student_t_log_density(const MatrixXd& C, const VectorXd& y,
                                    double nu)
{
    const double n = static_cast<double>(y.size());
    return std::lgamma(0.5 * (nu + n)) - std::lgamma(0.5 * nu)
           - 0.5 * n * std::log(nu * std::numbers::pi) - 0.5 * log_det(C)
           - 0.5 * (nu + n) * std::log(1.0 + quad_form(C, y) / nu);
}

/// Univariate location-scale t log density via Boost.
inline double univariate_t_log_pdf(double x, double dof, double location,
                                   double scale_sq)
{
    const double s = std::sqrt(scale_sq);
    boost::math::students_t_distribution<double> t(dof);
    return std::log(boost::math::pdf(t, (x - location) / s)) - std::log(s);
}

/// Gaussian conditional of y* given y under covariance blocks.
struct GaussianConditional
{
    double mean;
    double variance;
};

inline GaussianConditional gp_conditional(const MatrixXd& X, const VectorXd& y,
                                          const VectorXd& x_star, double theta,
                                          double noise)
{
    MatrixXd all(X.rows() + 1, X.cols());
    all << X, x_star.transpose();
    const MatrixXd full = gram(all, theta, noise);
    const Eigen::Index n = X.rows();
    const MatrixXd inv = full.topLeftCorner(n, n).inverse();
    const VectorXd cross = full.block(0, n, n, 1);
    return {cross.dot(inv * y), full(n, n) - cross.dot(inv * cross)};
}

/// Inverse-gamma CDF: P(X <= x) = Q(shape, scale / x).
inline double inv_gamma_cdf(double x, double shape, double scale)
{
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_q(shape, scale / x);
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
    {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return d;
}

/// CDF of an unnormalized density on (lo, hi) by trapezoidal quadrature on
/// a uniform grid in log space (for positive support).
class LogGridCdf
{
public:
    LogGridCdf(const std::function<double(double)>& log_density, double lo,
               double hi, std::size_t points)
        : log_lo_(std::log(lo)), log_hi_(std::log(hi)), cdf_(points, 0.0)
    {
        step_ = (log_hi_ - log_lo_) / static_cast<double>(points - 1);
        std::vector<double> logf(points);
        double top = -INFINITY;
        for (std::size_t i = 0; i < points; ++i)
        {
            const double u = log_lo_ + step_ * static_cast<double>(i);
            logf[i] = log_density(std::exp(u)) + u;  // Jacobian of x = e^u
            top = std::max(top, logf[i]);
        }
        for (std::size_t i = 1; i < points; ++i)
            cdf_[i] = cdf_[i - 1]
                      + 0.5 * step_
                            * (std::exp(logf[i - 1] - top)
                               + std::exp(logf[i] - top));
        const double total = cdf_.back();
        for (auto& c : cdf_) c /= total;
    }

    double operator()(double x) const
    {
        if (x <= 0.0) return 0.0;
        const double u = (std::log(x) - log_lo_) / step_;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(cdf_.size() - 1)) return 1.0;
        const auto i = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(i);
        return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
    }

private:
    double log_lo_, log_hi_, step_ = 0.0;
    std::vector<double> cdf_;
};

/// CDF on the real line by trapezoidal quadrature.
class LinearGridCdf
{
public:
    LinearGridCdf(const std::function<double(double)>& log_density, double lo,
                  double hi, std::size_t points)
        : lo_(lo), cdf_(points, 0.0)
    {
        step_ = (hi - lo) / static_cast<double>(points - 1);
        std::vector<double> logf(points);
        double top = -INFINITY;
        for (std::size_t i = 0; i < points; ++i)
        {
            logf[i] = log_density(lo + step_ * static_cast<double>(i));
            top = std::max(top, logf[i]);
        }
        for (std::size_t i = 1; i < points; ++i)
            cdf_[i] = cdf_[i - 1]
                      + 0.5 * step_
                            * (std::exp(logf[i - 1] - top)
                               + std::exp(logf[i] - top));
        norm_ = cdf_.back();
        log_top_ = top;
        for (auto& c : cdf_) c /= norm_;
    }

    double operator()(double x) const
    {
        const double u = (x - lo_) / step_;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(cdf_.size() - 1)) return 1.0;
        const auto i = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(i);
        return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
    }

    /// Integral of exp(log_density) over the grid.
    double integral() const { return norm_ * std::exp(log_top_); }

private:
    double lo_, step_ = 0.0, norm_ = 1.0, log_top_ = 0.0;
    std::vector<double> cdf_;
};

/// Posterior of the DP concentration given K clusters among n points under
/// a Gamma(a0, rate b0) prior, up to a constant:
/// alpha^{a0+K-2} e^{-b0 alpha} (alpha + n) Beta(alpha + 1, n).
inline double alpha_posterior_log_density(double alpha, double a0, double b0,
                                          double K, double n)
{
    if (alpha <= 0.0) return -INFINITY;
    return (a0 + K - 2.0) * std::log(alpha) - b0 * alpha
           + std::log(alpha + n) + std::lgamma(alpha + 1.0) + std::lgamma(n)
           - std::lgamma(alpha + 1.0 + n);
}

}  // namespace tpmoe::oracle
