#include "tpmoe/input_mixture.hpp"

#include "tpmoe/errors.hpp"
#include "tpmoe/log_weights.hpp"
#include "tpmoe/student_t_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tpmoe
{

NIWPrior NIWPrior::standard(Eigen::Index dim)
{
    NIWPrior p;
    p.mu0 = Vector::Zero(dim);
    p.lambda0 = 1.0;
    p.psi0 = Matrix::Identity(dim, dim);
    p.nu0 = static_cast<double>(dim) + 2.0;
    return p;
}

void NIWPrior::validate() const
{
    const Eigen::Index d = dim();
    if (d < 1) throw InputError("NIW prior: dimension must be at least 1");
    if (psi0.rows() != d || psi0.cols() != d)
        throw InputError("NIW prior: Psi0 must be D x D");
    if (!(lambda0 > 0.0)) throw InputError("NIW prior: lambda0 must be > 0");
    if (!(nu0 > static_cast<double>(d) - 1.0))
        throw InputError("NIW prior: nu0 must exceed D - 1");
    if (!psi0.isApprox(psi0.transpose()))
        throw InputError("NIW prior: Psi0 must be symmetric");
    Eigen::LLT<Matrix> llt(psi0);
    if (llt.info() != Eigen::Success)
        throw InputError("NIW prior: Psi0 must be positive definite");
}

ClusterInputStats ClusterInputStats::empty(Eigen::Index dim)
{
    return {0, Vector::Zero(dim), Matrix::Zero(dim, dim)};
}

InputPredictive ClusterInputStats::predictive(const NIWPrior& prior) const
{
    const double d = static_cast<double>(prior.dim());
    const double count = static_cast<double>(n);
    const double lambda_n = prior.lambda0 + count;

    InputPredictive out;
    out.dof = prior.nu0 + count - d + 1.0;
    if (n == 0)
    {
        out.location = prior.mu0;
        out.scale = ((prior.lambda0 + 1.0) / (prior.lambda0 * out.dof))
                    * prior.psi0;
        return out;
    }
    out.location = (prior.lambda0 * prior.mu0 + count * mean) / lambda_n;
    const Vector shift = mean - prior.mu0;
    const Matrix psi_n = prior.psi0 + scatter
                         + (prior.lambda0 * count / lambda_n)
                               * (shift * shift.transpose());
    out.scale = ((lambda_n + 1.0) / (lambda_n * out.dof)) * psi_n;
    return out;
}

ClusterInputStats update_input_stats(const ClusterInputStats& stats,
                                     const Eigen::Ref<const Vector>& x)
{
    if (x.size() != stats.mean.size())
        throw InputError("update_input_stats: dimension mismatch");
    ClusterInputStats out = stats;
    out.n = stats.n + 1;
    const Vector delta = x - stats.mean;
    out.mean = stats.mean + delta / static_cast<double>(out.n);
    out.scatter += delta * (x - out.mean).transpose();
    out.scatter = (0.5 * (out.scatter + out.scatter.transpose())).eval();
    return out;
}

namespace
{

double t_log_density(const Eigen::Ref<const Vector>& x,
                     const InputPredictive& t)
{
    if (x.size() != t.location.size())
        throw InputError("input_log_density: dimension mismatch");
    Eigen::LLT<Matrix> llt(t.scale);
    if (llt.info() != Eigen::Success)
        throw NumericalError("input_log_density: scale matrix is not PD");
    const Vector half = llt.matrixL().solve(Vector(x - t.location));
    const double logdet
        = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return student_t_log_density(half.squaredNorm(), logdet,
                                 static_cast<double>(x.size()), t.dof);
}

}  // namespace

double input_log_density(const Eigen::Ref<const Vector>& x,
                         const ClusterInputStats& stats,
                         const NIWPrior& prior)
{
    return t_log_density(x, stats.predictive(prior));
}

double input_log_density(const Eigen::Ref<const Vector>& x,
                         const NIWPrior& prior)
{
    return input_log_density(x, ClusterInputStats::empty(prior.dim()), prior);
}

std::vector<double> crp_assignment_probabilities(
    std::span<const ClusterInputStats> clusters, double alpha,
    const NIWPrior& prior, const Eigen::Ref<const Vector>& x)
{
    std::vector<double> logw;
    logw.reserve(clusters.size() + 1);
    for (const auto& c : clusters)
        logw.push_back(std::log(static_cast<double>(c.n))
                       + input_log_density(x, c, prior));
    logw.push_back(std::log(alpha) + input_log_density(x, prior));
    return normalize_log_weights(logw);
}

double alpha_mixture_weight(double a0, double b0, std::size_t clusters,
                            std::size_t observations, double rho)
{
    const double odds = (a0 + static_cast<double>(clusters) - 1.0)
                        / (static_cast<double>(observations)
                           * (b0 - std::log(rho)));
    return odds / (1.0 + odds);
}

double sample_alpha(const Concentration& conc, std::size_t clusters,
                    std::size_t observations, Rng& rng)
{
    if (clusters < 1 || observations < 1)
        throw InputError("sample_alpha: need K >= 1 and i >= 1");
    const double rho
        = beta(rng, conc.alpha + 1.0, static_cast<double>(observations));
    // rho can round to 0 for tiny alpha and huge i; log would blow up.
    const double safe_rho = std::max(rho, 1e-300);
    const double pi = alpha_mixture_weight(conc.a0, conc.b0, clusters,
                                           observations, safe_rho);
    const double rate = conc.b0 - std::log(safe_rho);
    const double k = static_cast<double>(clusters);
    const double shape = uniform01(rng) < pi ? conc.a0 + k : conc.a0 + k - 1.0;
    const double draw = gamma_shape_rate(rng, shape, rate);
    return std::max(draw, std::numeric_limits<double>::min());
}

}  // namespace tpmoe
