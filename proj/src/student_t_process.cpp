#include "tpmoe/student_t_process.hpp"

#include "tpmoe/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <numbers>
#include <numeric>

namespace tpmoe
{

double student_t_log_density(double quad, double logdet, double n, double nu)
{
    using boost::math::lgamma;
    return -0.5 * n * std::log(nu * std::numbers::pi) - 0.5 * logdet
           + lgamma(0.5 * (nu + n)) - lgamma(0.5 * nu)
           - 0.5 * (nu + n) * std::log1p(quad / nu);
}

double tp_log_marginal_with_noise(const Eigen::Ref<const Vector>& y,
                                  const InputMatrix& X,
                                  const KernelParams& kernel, double noise,
                                  double nu)
{
    if (y.size() != X.rows())
        throw InputError("tp_log_marginal: y and X row counts differ");
    if (y.size() == 0) return 0.0;
    const CovMatrix cov = build_cov(X, kernel, noise);
    const SolveResult s = solve_and_logdet(cov, y);
    return student_t_log_density(s.quad, s.logdet,
                                 static_cast<double>(y.size()), nu);
}

double tp_log_marginal(const Eigen::Ref<const Vector>& y,
                       const InputMatrix& X, const TPParams& p)
{
    return tp_log_marginal_with_noise(y, X, p.kernel, p.noise(), p.nu);
}

StudentTPredictive tp_predict(const Eigen::Ref<const Vector>& y,
                              const InputMatrix& X,
                              const InputMatrix& X_star, const TPParams& p)
{
    if (X_star.rows() == 0)
        throw InputError("tp_predict: no prediction inputs");
    if (y.size() != X.rows())
        throw InputError("tp_predict: y and X row counts differ");

    StudentTPredictive out;
    Matrix prior = cross_kernel(X_star, X_star, p.kernel);
    prior.diagonal().array() += p.noise();

    if (y.size() == 0)
    {
        out.dof = p.nu;
        out.mean = Vector::Zero(X_star.rows());
        out.scale = std::move(prior);
        return out;
    }

    const CovMatrix cov = build_cov(X, p.kernel, p.noise());
    const Matrix cross = cross_kernel(X, X_star, p.kernel);  // N x N*
    const SolveResult s = solve_and_logdet(cov, y);
    const Matrix half = cov.solve_lower(cross);

    const double n = static_cast<double>(y.size());
    Matrix k22 = prior - half.transpose() * half;
    k22 = (0.5 * (k22 + k22.transpose())).eval();
    // Round-off can push a collapsed variance marginally negative.
    k22.diagonal() = k22.diagonal().cwiseMax(0.0);

    out.dof = p.nu + n;
    out.mean = cross.transpose() * s.solved;
    out.scale = ((p.nu + s.quad) / (p.nu + n)) * k22;
    return out;
}

std::vector<Eigen::Index> draw_minibatch(Eigen::Index n, std::size_t batch,
                                         Rng& rng)
{
    if (batch == 0) throw InputError("minibatch size must be at least 1");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (static_cast<std::size_t>(n) <= batch) return idx;

    // Partial Fisher-Yates: the first `batch` slots are a uniform sample
    // without replacement.
    for (std::size_t i = 0; i < batch; ++i)
    {
        const auto remaining = static_cast<std::uint64_t>(idx.size() - i);
        const auto offset = static_cast<std::size_t>(
            uniform01(rng) * static_cast<double>(remaining));
        std::swap(idx[i], idx[i + std::min<std::size_t>(offset, remaining - 1)]);
    }
    idx.resize(batch);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Vector select(const Eigen::Ref<const Vector>& y,
              const std::vector<Eigen::Index>& idx)
{
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = y(idx[i]);
    return out;
}

InputMatrix select_rows(const InputMatrix& X,
                        const std::vector<Eigen::Index>& idx)
{
    InputMatrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    return out;
}

double SubsetFit::log_likelihood(double nu) const
{
    if (m == 0) return 0.0;
    return upweight
           * student_t_log_density(quad, logdet, static_cast<double>(m), nu);
}

SubsetFit fit_subset(const Eigen::Ref<const Vector>& y, const InputMatrix& X,
                     const std::vector<Eigen::Index>& subset,
                     const KernelParams& kernel, double h)
{
    SubsetFit fit;
    fit.m = static_cast<Eigen::Index>(subset.size());
    if (fit.m == 0) return fit;
    fit.upweight = static_cast<double>(y.size()) / static_cast<double>(fit.m);
    const double noise = fit.upweight * std::abs(h);
    const CovMatrix cov = build_cov(select_rows(X, subset), kernel, noise);
    const SolveResult s = solve_and_logdet(cov, select(y, subset));
    fit.quad = s.quad;
    fit.logdet = s.logdet;
    return fit;
}

double subset_log_likelihood(const Eigen::Ref<const Vector>& y,
                             const InputMatrix& X,
                             const std::vector<Eigen::Index>& subset,
                             const TPParams& p)
{
    if (static_cast<Eigen::Index>(subset.size()) == y.size())
        return tp_log_marginal(y, X, p);
    return fit_subset(y, X, subset, p.kernel, p.h).log_likelihood(p.nu);
}

double minibatch_log_likelihood(const Eigen::Ref<const Vector>& y,
                                const InputMatrix& X, const TPParams& p,
                                std::size_t batch, Rng& rng)
{
    if (batch == 0) throw InputError("minibatch size must be at least 1");
    if (static_cast<std::size_t>(y.size()) <= batch)
        return tp_log_marginal(y, X, p);
    return subset_log_likelihood(y, X, draw_minibatch(y.size(), batch, rng),
                                 p);
}

}  // namespace tpmoe
