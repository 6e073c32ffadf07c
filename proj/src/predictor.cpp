#include "tpmoe/predictor.hpp"

#include "tpmoe/errors.hpp"
#include "tpmoe/log_weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tpmoe
{

std::vector<double> gate_weights(const Particle& particle,
                                 const NIWPrior& prior,
                                 const Eigen::Ref<const Vector>& x_star)
{
    if (particle.clusters.empty())
        throw InputError("gate_weights: particle has no clusters");
    std::vector<double> logw;
    logw.reserve(particle.clusters.size());
    for (const auto& c : particle.clusters)
        logw.push_back(std::log(static_cast<double>(c.stats.n))
                       + input_log_density(x_star, c.stats, prior));
    return normalize_log_weights(logw);
}

std::vector<Eigen::Index> conditioning_members(const Cluster& cluster,
                                               const InputMatrix& X,
                                               const Eigen::Ref<const Vector>& x_star,
                                               std::size_t budget)
{
    if (budget == 0 || cluster.members.size() <= budget) return cluster.members;

    std::vector<std::pair<double, Eigen::Index>> ranked;
    ranked.reserve(cluster.members.size());
    for (Eigen::Index m : cluster.members)
        ranked.emplace_back((X.row(m).transpose() - x_star).squaredNorm(), m);
    std::partial_sort(ranked.begin(),
                      ranked.begin() + static_cast<std::ptrdiff_t>(budget),
                      ranked.end(), [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first < b.first;
                          return a.second > b.second;
                      });
    std::vector<Eigen::Index> out;
    out.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) out.push_back(ranked[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

double sorted_quantile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> mixture_interval(
    const std::vector<MixtureComponent>& components, std::size_t draws,
    Rng& rng, double lower_q, double upper_q)
{
    std::vector<double> weights;
    weights.reserve(components.size());
    for (const auto& c : components) weights.push_back(c.weight);
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.empty() ? 0.0 : cumulative.back();

    std::vector<double> samples;
    samples.reserve(draws);
    for (std::size_t d = 0; d < draws; ++d)
    {
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto k = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()),
            components.size() - 1);
        const auto& c = components[k];
        samples.push_back(c.mean + std::sqrt(c.scale) * student_t(rng, c.dof));
    }
    std::sort(samples.begin(), samples.end());
    return {sorted_quantile(samples, lower_q), sorted_quantile(samples, upper_q)};
}

PredictiveResult predict(const ParticleEnsemble& ensemble,
                         const Eigen::Ref<const Vector>& x_star,
                         const PredictOptions& opts)
{
    const auto& store = ensemble.observations();
    if (store.size() < 1)
        throw InputError("predict: ensemble has not seen any observation");

    const std::vector<double> pw = ensemble.weights();
    const auto& particles = ensemble.particles();
    const NIWPrior& prior = ensemble.config().niw;
    const InputMatrix X_star = x_star.transpose();

    PredictiveResult out;
    for (std::size_t j = 0; j < particles.size(); ++j)
    {
        if (pw[j] <= 0.0) continue;
        const Particle& p = particles[j];
        const std::vector<double> gates = gate_weights(p, prior, x_star);
        for (std::size_t k = 0; k < p.clusters.size(); ++k)
        {
            if (gates[k] <= 0.0) continue;
            const Cluster& c = p.clusters[k];
            const auto cond
                = conditioning_members(c, store.X(), x_star, opts.budget);
            const StudentTPredictive t
                = tp_predict(select(store.y(), cond),
                             select_rows(store.X(), cond), X_star, c.params);
            out.components.push_back({pw[j] * gates[k], j, c.id, t.dof,
                                      t.mean(0), t.scale(0, 0), cond.size()});
        }
    }

    double total = 0.0;
    for (const auto& c : out.components) total += c.weight;
    for (auto& c : out.components) c.weight /= total;
    for (const auto& c : out.components) out.mean += c.weight * c.mean;

    Rng rng(opts.seed, StreamTag::predict, 0, opts.stream);
    std::tie(out.lower95, out.upper95)
        = mixture_interval(out.components, opts.mc_draws, rng);
    return out;
}

}  // namespace tpmoe
