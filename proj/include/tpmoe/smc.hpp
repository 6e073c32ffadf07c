#pragma once

// Online SMC over mixture-of-experts states.
//
// Each particle carries a full hypothesis: the assignment of every observation
// so far, the DP concentration, the global noise scale k0^2 and one student-t
// process expert per cluster. A new observation is absorbed by proposing its
// cluster from the CRP, refreshing that cluster's parameters and reweighting
// by the input density times the cluster's likelihood ratio.

#include "tpmoe/input_mixture.hpp"
#include "tpmoe/random.hpp"
#include "tpmoe/samplers.hpp"
#include "tpmoe/student_t_process.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tpmoe
{

/// Fixed hyperparameters and SMC knobs.
struct PriorConfig
{
    NIWPrior niw = NIWPrior::standard(1);
    double a0 = 1.0;  ///< Gamma shape for alpha
    double b0 = 1.0;  ///< Gamma rate for alpha
    KernelPrior kernel;
    DofPrior dof;
    SliceConfig slice;

    std::size_t particles = 100;
    std::size_t batch = 50;
    double resample_threshold = 0.5;  ///< resample when N_eff < threshold * J

    void validate() const;
};

struct Cluster
{
    int id = 0;
    ClusterInputStats stats;
    TPParams params;
    std::vector<Eigen::Index> members;  ///< observation indices, increasing
};

struct Particle
{
    std::vector<int> z;  ///< cluster id per observation
    Concentration alpha;
    double k0_squared = 1.0;
    std::vector<Cluster> clusters;
    double log_weight = 0.0;
    int next_cluster_id = 0;

    const Cluster* find(int id) const;
    Cluster* find(int id);
    std::size_t observations() const noexcept { return z.size(); }
};

/// Observations in arrival order; shared read-only by all particles.
class ObservationStore
{
public:
    explicit ObservationStore(Eigen::Index dim) : X_(0, dim) {}

    void append(const Eigen::Ref<const Vector>& x, double y);

    Eigen::Index size() const noexcept { return y_.size(); }
    Eigen::Index dim() const noexcept { return X_.cols(); }
    const InputMatrix& X() const noexcept { return X_; }
    const Vector& y() const noexcept { return y_; }

private:
    InputMatrix X_;
    Vector y_;
};

/// Everything computed while absorbing one observation into one particle.
struct UpdateTrace
{
    int cluster_id = 0;
    bool new_cluster = false;
    double log_input_density = 0.0;  ///< log P(x_i | alpha, z_i)
    double log_lik_new = 0.0;        ///< receiving cluster, new data/params
    double log_lik_old = 0.0;        ///< receiving cluster, old data/params
    TPParams params_old;
    TPParams params_new;
    std::vector<Eigen::Index> subset_new;  ///< positions within members
    std::vector<Eigen::Index> subset_old;

    double log_increment() const
    {
        return log_input_density + log_lik_new - log_lik_old;
    }
};

/// Prior draw for a brand-new cluster's expert parameters.
TPParams draw_cluster_params(const PriorConfig& cfg, double k0_squared,
                             Rng& rng);

/// Fresh particle holding only observation 0. log_weight is the log of the
/// unnormalized initial weight P(y1 | params) P(x1 | prior predictive).
Particle init_particle(const ObservationStore& store, const PriorConfig& cfg,
                       Rng& rng);

/// Absorb observation `index` (already appended to the store) into the
/// particle, assigning it to `cluster_id`, or to a new cluster when empty.
/// Runs the per-cluster samplers and returns the trace; the caller applies
/// trace.log_increment() to the weight.
UpdateTrace advance_particle_into(Particle& particle,
                                  const ObservationStore& store,
                                  Eigen::Index index,
                                  std::optional<int> cluster_id,
                                  const PriorConfig& cfg, Rng& rng);

/// Bookkeeping-only fallback: put observation `index` in a fresh cluster
/// with prior parameters and run no samplers.
void absorb_as_new_cluster(Particle& particle, const ObservationStore& store,
                           Eigen::Index index, const PriorConfig& cfg,
                           Rng& rng);

/// Same, with the cluster drawn from the CRP assignment probabilities.
UpdateTrace advance_particle(Particle& particle, const ObservationStore& store,
                             Eigen::Index index, const PriorConfig& cfg,
                             Rng& rng);

/// CRP probabilities for x over the particle's clusters (in storage order)
/// followed by the new-cluster entry.
std::vector<double> crp_assignment_probabilities(const Particle& particle,
                                                 const NIWPrior& prior,
                                                 const Eigen::Ref<const Vector>& x);

/// 1 / sum w^2 for normalized weights.
double effective_sample_size(std::span<const double> weights);

/// J ancestor indices drawn i.i.d. from Categorical(weights).
std::vector<std::size_t> multinomial_ancestors(std::span<const double> weights,
                                               std::size_t count, Rng& rng);

struct StepDiagnostics
{
    double n_eff = 0.0;  ///< before any resampling
    bool resampled = false;
    std::size_t nonfinite_weights = 0;
    int map_cluster = -1;  ///< cluster of the newest point in the top particle
};

class ParticleEnsemble
{
public:
    /// `identical_streams` gives every particle the stream of particle 0,
    /// which makes all particles evolve identically (a test hook).
    ParticleEnsemble(PriorConfig cfg, std::uint64_t seed, Eigen::Index dim,
                     int threads = 0, bool identical_streams = false);

    /// First observation. Requires an empty ensemble.
    StepDiagnostics init_first_observation(const Eigen::Ref<const Vector>& x,
                                           double y);

    /// Every later observation.
    StepDiagnostics step(const Eigen::Ref<const Vector>& x, double y);

    /// Multinomial resampling with the given stream; weights reset to 1/J.
    void resample(Rng& rng);

    std::vector<double> weights() const;
    double effective_sample_size() const;

    const std::vector<Particle>& particles() const noexcept { return particles_; }
    std::vector<Particle>& particles() noexcept { return particles_; }
    const ObservationStore& observations() const noexcept { return store_; }
    const PriorConfig& config() const noexcept { return cfg_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t nonfinite_weight_count() const noexcept { return nonfinite_; }

private:
    Rng particle_stream(std::size_t particle, Eigen::Index observation) const;
    StepDiagnostics finish_step();

    PriorConfig cfg_;
    std::uint64_t seed_;
    int threads_;
    bool identical_streams_;
    ObservationStore store_;
    std::vector<Particle> particles_;
    std::size_t nonfinite_ = 0;
};

}  // namespace tpmoe
