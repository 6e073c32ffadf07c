#include "tpmoe/smc.hpp"

#include "tpmoe/errors.hpp"
#include "tpmoe/log_weights.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

namespace tpmoe
{

namespace
{

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void PriorConfig::validate() const
{
    niw.validate();
    if (!(a0 > 0.0) || !(b0 > 0.0))
        throw InputError("alpha prior shape and rate must be positive");
    if (!(kernel.s0_sq > 0.0))
        throw InputError("kernel prior variance s0_sq must be positive");
    if (!(dof.shape > 0.0) || !(dof.rate > 0.0))
        throw InputError("nu prior shape and rate must be positive");
    slice.validate();
    if (particles < 1) throw InputError("particles (J) must be at least 1");
    if (batch < 1) throw InputError("batch (B) must be at least 1");
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
        throw InputError("threshold must lie in (0, 1]");
}

const Cluster* Particle::find(int id) const
{
    for (const auto& c : clusters)
        if (c.id == id) return &c;
    return nullptr;
}

Cluster* Particle::find(int id)
{
    for (auto& c : clusters)
        if (c.id == id) return &c;
    return nullptr;
}

void ObservationStore::append(const Eigen::Ref<const Vector>& x, double y)
{
    if (x.size() != X_.cols())
        throw InputError("observation has the wrong input dimension");
    const Eigen::Index n = y_.size();
    X_.conservativeResize(n + 1, Eigen::NoChange);
    X_.row(n) = x.transpose();
    y_.conservativeResize(n + 1);
    y_(n) = y;
}

TPParams draw_cluster_params(const PriorConfig& cfg, double k0_squared,
                             Rng& rng)
{
    TPParams p;
    p.kernel.theta
        = std::exp(normal(rng, cfg.kernel.m0, std::sqrt(cfg.kernel.s0_sq)));
    p.h = normal(rng, 0.0, std::sqrt(k0_squared));
    p.nu = gamma_shape_rate(rng, cfg.dof.shape, cfg.dof.rate);
    p.nu = std::max(p.nu, std::numeric_limits<double>::min());
    p.sigma2 = inv_gamma(rng, 0.5 * p.nu, 0.5 * p.nu);
    return p;
}

Particle init_particle(const ObservationStore& store, const PriorConfig& cfg,
                       Rng& rng)
{
    if (store.size() < 1)
        throw InputError("init_particle: store holds no observation");
    Particle p;
    p.alpha = {gamma_shape_rate(rng, cfg.a0, cfg.b0), cfg.a0, cfg.b0};
    p.k0_squared = inv_gamma(rng, 0.5, 0.5);

    const Vector x = store.X().row(0).transpose();
    Cluster c;
    c.id = p.next_cluster_id++;
    c.params = draw_cluster_params(cfg, p.k0_squared, rng);
    c.stats = update_input_stats(ClusterInputStats::empty(store.dim()), x);
    c.members = {0};
    p.z = {c.id};

    const Vector y1 = store.y().head(1);
    const InputMatrix X1 = store.X().topRows(1);
    p.log_weight = tp_log_marginal(y1, X1, c.params)
                   + input_log_density(x, cfg.niw);
    p.clusters.push_back(std::move(c));
    return p;
}

UpdateTrace advance_particle_into(Particle& particle,
                                  const ObservationStore& store,
                                  Eigen::Index index,
                                  std::optional<int> cluster_id,
                                  const PriorConfig& cfg, Rng& rng)
{
    if (index != static_cast<Eigen::Index>(particle.observations())
        || index >= store.size())
        throw InputError("advance_particle: observations must arrive in order");

    const Vector x = store.X().row(index).transpose();
    UpdateTrace trace;

    std::size_t slot = 0;
    if (cluster_id)
    {
        const Cluster* c = particle.find(*cluster_id);
        if (c == nullptr) throw InputError("advance_particle: unknown cluster");
        slot = static_cast<std::size_t>(c - particle.clusters.data());
        trace.log_input_density = input_log_density(x, c->stats, cfg.niw);
    }
    else
    {
        Cluster c;
        c.id = particle.next_cluster_id++;
        c.params = draw_cluster_params(cfg, particle.k0_squared, rng);
        c.stats = ClusterInputStats::empty(store.dim());
        particle.clusters.push_back(std::move(c));
        slot = particle.clusters.size() - 1;
        trace.new_cluster = true;
        trace.log_input_density = input_log_density(x, cfg.niw);
    }

    Cluster& cluster = particle.clusters[slot];
    trace.cluster_id = cluster.id;
    trace.params_old = cluster.params;
    const std::vector<Eigen::Index> old_members = cluster.members;

    cluster.members.push_back(index);
    cluster.stats = update_input_stats(cluster.stats, x);
    particle.z.push_back(cluster.id);

    particle.alpha.alpha
        = sample_alpha(particle.alpha, particle.clusters.size(),
                       static_cast<std::size_t>(index + 1), rng);

    const Vector y_k = select(store.y(), cluster.members);
    const InputMatrix X_k = select_rows(store.X(), cluster.members);
    const Eigen::Index n_new = y_k.size();
    trace.subset_new = draw_minibatch(n_new, cfg.batch, rng);

    TPParams& params = cluster.params;
    const ThetaH th = ess_update_theta_h(y_k, X_k, trace.subset_new, params,
                                         particle.k0_squared, cfg.kernel, rng);
    params.kernel.theta = th.theta;
    params.h = th.h;

    std::vector<double> hs;
    hs.reserve(particle.clusters.size());
    for (const auto& c : particle.clusters) hs.push_back(c.params.h);
    particle.k0_squared = gibbs_k0_squared(hs, rng);

    const SubsetFit fit
        = fit_subset(y_k, X_k, trace.subset_new, params.kernel, params.h);
    params.sigma2 = gibbs_sigma2(fit, params.nu, rng);
    params.nu = slice_sample_nu(params.nu, params.sigma2, cfg.slice, rng,
                                cfg.dof);
    trace.params_new = params;

    trace.log_lik_new
        = subset_log_likelihood(y_k, X_k, trace.subset_new, params);

    if (!old_members.empty())
    {
        // Same minibatch, minus the newest point when it was drawn.
        for (Eigen::Index pos : trace.subset_new)
            if (pos != n_new - 1) trace.subset_old.push_back(pos);
        const Vector y_old = y_k.head(n_new - 1);
        const InputMatrix X_old = X_k.topRows(n_new - 1);
        trace.log_lik_old = subset_log_likelihood(y_old, X_old,
                                                  trace.subset_old,
                                                  trace.params_old);
    }
    return trace;
}

void absorb_as_new_cluster(Particle& particle, const ObservationStore& store,
                           Eigen::Index index, const PriorConfig& cfg,
                           Rng& rng)
{
    const Vector x = store.X().row(index).transpose();
    Cluster c;
    c.id = particle.next_cluster_id++;
    c.params = draw_cluster_params(cfg, particle.k0_squared, rng);
    c.stats = update_input_stats(ClusterInputStats::empty(store.dim()), x);
    c.members = {index};
    particle.z.push_back(c.id);
    particle.clusters.push_back(std::move(c));
}

std::vector<double> crp_assignment_probabilities(const Particle& particle,
                                                 const NIWPrior& prior,
                                                 const Eigen::Ref<const Vector>& x)
{
    std::vector<ClusterInputStats> stats;
    stats.reserve(particle.clusters.size());
    for (const auto& c : particle.clusters) stats.push_back(c.stats);
    return crp_assignment_probabilities(stats, particle.alpha.alpha, prior, x);
}

UpdateTrace advance_particle(Particle& particle, const ObservationStore& store,
                             Eigen::Index index, const PriorConfig& cfg,
                             Rng& rng)
{
    const Vector x = store.X().row(index).transpose();
    const std::vector<double> probs
        = crp_assignment_probabilities(particle, cfg.niw, x);
    const std::size_t pick = categorical_from_uniform(probs, uniform01(rng));
    std::optional<int> target;
    if (pick < particle.clusters.size()) target = particle.clusters[pick].id;
    return advance_particle_into(particle, store, index, target, cfg, rng);
}

double effective_sample_size(std::span<const double> weights)
{
    double sum_sq = 0.0;
    for (double w : weights) sum_sq += w * w;
    return 1.0 / sum_sq;
}

std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights,
                                               std::size_t count, Rng& rng)
{
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.empty() ? 0.0 : cumulative.back();

    std::vector<std::size_t> out(count);
    for (auto& a : out)
    {
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        idx = std::min(idx, weights.size() - 1);
        // Never select a zero-weight particle at the upper boundary.
        while (weights[idx] <= 0.0 && idx > 0) --idx;
        a = idx;
    }
    return out;
}

ParticleEnsemble::ParticleEnsemble(PriorConfig cfg, std::uint64_t seed,
                                   Eigen::Index dim, int threads,
                                   bool identical_streams)
    : cfg_(std::move(cfg)),
      seed_(seed),
      threads_(threads),
      identical_streams_(identical_streams),
      store_(dim)
{
    if (cfg_.niw.dim() != dim)
        throw InputError("NIW prior dimension does not match the inputs");
    cfg_.validate();
}

Rng ParticleEnsemble::particle_stream(std::size_t particle,
                                      Eigen::Index observation) const
{
    return Rng(seed_, StreamTag::particle_update,
               identical_streams_ ? 0u : static_cast<std::uint32_t>(particle),
               static_cast<std::uint32_t>(observation));
}

StepDiagnostics ParticleEnsemble::init_first_observation(
    const Eigen::Ref<const Vector>& x, double y)
{
    if (store_.size() != 0)
        throw InputError("init_first_observation: ensemble already started");
    store_.append(x, y);

    const std::size_t count = cfg_.particles;
    particles_.assign(count, Particle{});
    std::vector<std::exception_ptr> errors(count);
    const int nthreads = threads_ > 0 ? threads_ : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::size_t j = 0; j < count; ++j)
    {
        try
        {
            Rng rng = particle_stream(j, 0);
            particles_[j] = init_particle(store_, cfg_, rng);
        }
        catch (const NumericalError&)
        {
            particles_[j].log_weight = kNegInf;
        }
        catch (...)
        {
            errors[j] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return finish_step();
}

StepDiagnostics ParticleEnsemble::step(const Eigen::Ref<const Vector>& x,
                                       double y)
{
    if (store_.size() < 1 || particles_.empty())
        throw InputError("step: call init_first_observation first");
    store_.append(x, y);
    const Eigen::Index index = store_.size() - 1;

    const std::size_t count = particles_.size();
    std::vector<std::exception_ptr> errors(count);
    const int nthreads = threads_ > 0 ? threads_ : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::size_t j = 0; j < count; ++j)
    {
        Particle& p = particles_[j];
        Particle backup = p;
        try
        {
            Rng rng = particle_stream(j, index);
            const UpdateTrace trace
                = advance_particle(p, store_, index, cfg_, rng);
            p.log_weight += trace.log_increment();
        }
        catch (const NumericalError&)
        {
            // Keep the bookkeeping consistent and drop the particle's weight.
            p = std::move(backup);
            Rng rng = particle_stream(j, index);
            absorb_as_new_cluster(p, store_, index, cfg_, rng);
            p.log_weight = kNegInf;
        }
        catch (...)
        {
            errors[j] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return finish_step();
}

StepDiagnostics ParticleEnsemble::finish_step()
{
    StepDiagnostics diag;
    std::vector<double> logw(particles_.size());
    for (std::size_t j = 0; j < particles_.size(); ++j)
    {
        double lw = particles_[j].log_weight;
        if (!std::isfinite(lw))
        {
            ++diag.nonfinite_weights;
            lw = kNegInf;
        }
        logw[j] = lw;
    }
    nonfinite_ += diag.nonfinite_weights;

    const std::vector<double> w = normalize_log_weights(logw);
    for (std::size_t j = 0; j < particles_.size(); ++j)
        particles_[j].log_weight = w[j] > 0.0 ? std::log(w[j]) : kNegInf;

    const auto best = static_cast<std::size_t>(
        std::max_element(w.begin(), w.end()) - w.begin());
    diag.map_cluster = particles_[best].z.empty() ? -1 : particles_[best].z.back();
    diag.n_eff = tpmoe::effective_sample_size(w);

    if (diag.n_eff
        < cfg_.resample_threshold * static_cast<double>(particles_.size()))
    {
        Rng rng(seed_, StreamTag::resample, 0,
                static_cast<std::uint32_t>(store_.size() - 1));
        resample(rng);
        diag.resampled = true;
    }
    return diag;
}

void ParticleEnsemble::resample(Rng& rng)
{
    const std::vector<double> w = weights();
    const std::vector<std::size_t> ancestors
        = multinomial_ancestors(w, particles_.size(), rng);
    std::vector<Particle> next;
    next.reserve(particles_.size());
    for (std::size_t a : ancestors) next.push_back(particles_[a]);
    const double uniform = -std::log(static_cast<double>(next.size()));
    for (auto& p : next) p.log_weight = uniform;
    particles_ = std::move(next);
}

std::vector<double> ParticleEnsemble::weights() const
{
    std::vector<double> logw;
    logw.reserve(particles_.size());
    for (const auto& p : particles_) logw.push_back(p.log_weight);
    return normalize_log_weights(logw);
}

double ParticleEnsemble::effective_sample_size() const
{
    return tpmoe::effective_sample_size(weights());
}

}  // namespace tpmoe
