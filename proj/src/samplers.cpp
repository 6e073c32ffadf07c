#include "tpmoe/samplers.hpp"

#include "tpmoe/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace tpmoe
{

namespace
{

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double InvGammaParams::log_pdf(double x) const
{
    if (!(x > 0.0)) return kNegInf;
    return shape * std::log(scale) - boost::math::lgamma(shape)
           - (shape + 1.0) * std::log(x) - scale / x;
}

void SliceConfig::validate() const
{
    if (!(width > 0.0) || max_step_out < 1 || max_shrink < 1)
        throw InputError("slice sampler settings must all be positive");
}

InvGammaParams sigma2_conditional(const SubsetFit& fit, double nu)
{
    return {0.5 * (nu + fit.effective_count()),
            0.5 * (nu + fit.upweight * fit.quad)};
}

double gibbs_sigma2(const SubsetFit& fit, double nu, Rng& rng)
{
    const InvGammaParams ig = sigma2_conditional(fit, nu);
    return inv_gamma(rng, ig.shape, ig.scale);
}

double gibbs_sigma2(const Eigen::Ref<const Vector>& y, const InputMatrix& X,
                    const std::vector<Eigen::Index>& subset,
                    const TPParams& p, Rng& rng)
{
    return gibbs_sigma2(fit_subset(y, X, subset, p.kernel, p.h), p.nu, rng);
}

double nu_log_target(double nu, double sigma2, const DofPrior& prior,
                     bool with_likelihood)
{
    if (!(nu > 0.0) || !std::isfinite(nu)) return kNegInf;
    double lp = (prior.shape - 1.0) * std::log(nu) - prior.rate * nu;
    if (with_likelihood)
        lp += InvGammaParams{0.5 * nu, 0.5 * nu}.log_pdf(sigma2);
    return lp;
}

double slice_sample(const std::function<double(double)>& log_density,
                    double current, const SliceConfig& cfg, Rng& rng)
{
    const double f0 = log_density(current);
    // log of a uniform slice height under exp(f0)
    const double level = f0 + std::log(1.0 - uniform01(rng));

    double left = current - cfg.width * uniform01(rng);
    double right = left + cfg.width;
    auto steps_left = static_cast<int>(
        std::floor(cfg.max_step_out * uniform01(rng)));
    int steps_right = cfg.max_step_out - 1 - steps_left;
    while (steps_left > 0 && log_density(left) > level)
    {
        left -= cfg.width;
        --steps_left;
    }
    while (steps_right > 0 && log_density(right) > level)
    {
        right += cfg.width;
        --steps_right;
    }

    for (int i = 0; i < cfg.max_shrink; ++i)
    {
        const double proposal = left + uniform01(rng) * (right - left);
        const double fp = log_density(proposal);
        if (fp > level && std::isfinite(fp)) return proposal;
        if (proposal < current)
            left = proposal;
        else
            right = proposal;
    }
    return current;
}

double slice_sample_nu(double nu, double sigma2, const SliceConfig& cfg,
                       Rng& rng, const DofPrior& prior, bool with_likelihood)
{
    if (!(nu > 0.0) || !(sigma2 > 0.0))
        throw InputError("slice_sample_nu: nu and sigma2 must be positive");
    auto target = [&](double log_nu) {
        return nu_log_target(std::exp(log_nu), sigma2, prior, with_likelihood)
               + log_nu;
    };
    const double next = std::exp(slice_sample(target, std::log(nu), cfg, rng));
    return (next > 0.0 && std::isfinite(next)) ? next : nu;
}

InvGammaParams k0_squared_conditional(std::span<const double> h)
{
    if (h.empty()) throw InputError("gibbs_k0_squared: need K >= 1");
    const double k = static_cast<double>(h.size());
    double sum_sq = 0.0;
    for (double v : h) sum_sq += v * v;
    return {0.5 * (k + 1.0), (1.0 + sum_sq) / (2.0 * k)};
}

double gibbs_k0_squared(std::span<const double> h, Rng& rng)
{
    const InvGammaParams ig = k0_squared_conditional(h);
    return inv_gamma(rng, ig.shape, ig.scale);
}

EssResult elliptical_slice(const Vector& current, double current_loglik,
                           const Vector& prior_mean, const Vector& prior_sd,
                           const std::function<double(const Vector&)>& loglik,
                           Rng& rng)
{
    const Eigen::Index dim = current.size();
    Vector nu(dim);
    for (Eigen::Index d = 0; d < dim; ++d)
        nu(d) = prior_sd(d) * standard_normal(rng);

    EssResult out{current, current_loglik, 0.0, false};
    out.threshold = current_loglik + std::log(1.0 - uniform01(rng));

    double angle = 2.0 * std::numbers::pi * uniform01(rng);
    double lo = angle - 2.0 * std::numbers::pi;
    double hi = angle;
    const Vector centered = current - prior_mean;

    while (true)
    {
        const Vector proposal
            = centered * std::cos(angle) + nu * std::sin(angle) + prior_mean;
        double ll = kNegInf;
        try
        {
            ll = loglik(proposal);
        }
        catch (const NumericalError&)
        {
            ll = kNegInf;
        }
        if (std::isfinite(ll) && ll > out.threshold)
        {
            out.state = proposal;
            out.log_likelihood = ll;
            out.moved = true;
            return out;
        }
        if (angle < 0.0)
            lo = angle;
        else
            hi = angle;
        if (hi - lo < std::numeric_limits<double>::epsilon())
            return out;
        angle = lo + uniform01(rng) * (hi - lo);
    }
}

ThetaH ess_update_theta_h(const Eigen::Ref<const Vector>& y,
                          const InputMatrix& X,
                          const std::vector<Eigen::Index>& subset,
                          const TPParams& p, double k0_squared,
                          const KernelPrior& prior, Rng& rng)
{
    auto loglik = [&](const Vector& state) {
        TPParams q = p;
        q.kernel.theta = std::exp(state(0));
        q.h = state(1);
        if (!(q.kernel.theta > 0.0) || !std::isfinite(q.kernel.theta))
            return kNegInf;
        return subset.empty() ? 0.0 : subset_log_likelihood(y, X, subset, q);
    };

    Vector current(2);
    current << std::log(p.kernel.theta), p.h;
    const Vector mean = (Vector(2) << prior.m0, 0.0).finished();
    const Vector sd
        = (Vector(2) << std::sqrt(prior.s0_sq), std::sqrt(k0_squared))
              .finished();

    double current_ll = kNegInf;
    try
    {
        current_ll = loglik(current);
    }
    catch (const NumericalError&)
    {
    }
    // A state whose likelihood cannot be evaluated accepts any finite
    // proposal; ESS is still a valid move toward the support.
    const EssResult r
        = elliptical_slice(current, std::isfinite(current_ll) ? current_ll
                                                              : kNegInf,
                           mean, sd, loglik, rng);
    return {std::exp(r.state(0)), r.state(1), r.log_likelihood, r.threshold};
}

}  // namespace tpmoe
