#include "tpmoe/errors.hpp"
#include "tpmoe/smc.hpp"
#include "validation/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace tpmoe;

namespace
{

PriorConfig small_config(std::size_t particles, std::size_t batch = 50)
{
    PriorConfig cfg;
    cfg.particles = particles;
    cfg.batch = batch;
    return cfg;
}

double series(int i) { return std::sin(0.4 * i) + 0.1 * std::cos(3.1 * i); }

void feed(ParticleEnsemble& e, int n)
{
    for (int i = 0; i < n; ++i)
    {
        const Vector x = Vector::Constant(1, 0.1 * i);
        if (e.observations().size() == 0)
            e.init_first_observation(x, series(i));
        else
            e.step(x, series(i));
    }
}

void expect_bookkeeping(const Particle& p, std::size_t observations)
{
    ASSERT_EQ(p.z.size(), observations);
    std::vector<int> seen(observations, 0);
    std::size_t total = 0;
    for (const auto& c : p.clusters)
    {
        EXPECT_EQ(c.members.size(), c.stats.n);
        EXPECT_FALSE(c.members.empty());
        for (std::size_t m = 0; m < c.members.size(); ++m)
        {
            const auto idx = static_cast<std::size_t>(c.members[m]);
            ASSERT_LT(idx, observations);
            ++seen[idx];
            EXPECT_EQ(p.z[idx], c.id);
            if (m > 0) EXPECT_LT(c.members[m - 1], c.members[m]);
        }
        total += c.members.size();
    }
    EXPECT_EQ(total, observations);
    for (int s : seen) EXPECT_EQ(s, 1);
}

}  // namespace

TEST(Init, SingleParticleHasUnitWeight)
{
    ParticleEnsemble e(small_config(1), 3, 1);
    e.init_first_observation(Vector::Constant(1, 0.0), 5.0);
    ASSERT_EQ(e.weights().size(), 1u);
    EXPECT_EQ(e.weights()[0], 1.0);
}

TEST(Init, IdenticalParticlesUniform)
{
    ParticleEnsemble e(small_config(8), 3, 1, 0, true);
    e.init_first_observation(Vector::Constant(1, 0.0), 0.7);
    for (double w : e.weights()) EXPECT_DOUBLE_EQ(w, 1.0 / 8.0);
}

TEST(Init, OneClusterEach)
{
    ParticleEnsemble e(small_config(16), 4, 1);
    e.init_first_observation(Vector::Constant(1, 0.0), 0.7);
    for (const auto& p : e.particles())
    {
        EXPECT_EQ(p.clusters.size(), 1u);
        expect_bookkeeping(p, 1);
    }
}

TEST(Init, InitialWeightIsLikelihoodTimesInputDensity)
{
    const PriorConfig cfg = small_config(1);
    ObservationStore store(1);
    store.append(Vector::Constant(1, 0.3), -1.2);
    Rng rng(5, StreamTag::particle_update, 0, 0);
    const Particle p = init_particle(store, cfg, rng);
    const TPParams& q = p.clusters[0].params;
    const double expected
        = oracle::student_t_log_density(Matrix::Constant(1, 1, 1.0 + std::abs(q.h)),
                                        Vector::Constant(1, -1.2), q.nu)
          + input_log_density(Vector::Constant(1, 0.3), cfg.niw);
    EXPECT_NEAR(p.log_weight, expected, 1e-12);
}

TEST(Init, TwiceIsInputError)
{
    ParticleEnsemble e(small_config(2), 1, 1);
    e.init_first_observation(Vector::Constant(1, 0.0), 1.0);
    EXPECT_THROW(e.init_first_observation(Vector::Constant(1, 0.0), 1.0), InputError);
}

TEST(Step, BeforeInitIsInputError)
{
    ParticleEnsemble e(small_config(2), 1, 1);
    EXPECT_THROW(e.step(Vector::Constant(1, 0.0), 1.0), InputError);
}

TEST(Step, SingleParticleKeepsUnitWeight)
{
    ParticleEnsemble e(small_config(1), 6, 1);
    feed(e, 15);
    EXPECT_EQ(e.weights()[0], 1.0);
    expect_bookkeeping(e.particles()[0], 15);
}

TEST(Step, IdenticalStreamsGiveIdenticalWeights)
{
    ParticleEnsemble e(small_config(4), 7, 1, 0, true);
    for (int i = 0; i < 20; ++i)
    {
        feed(e, 1);
        for (double w : e.weights()) EXPECT_DOUBLE_EQ(w, 0.25);
    }
}

TEST(Step, WeightsNormalizedAndBookkeepingHolds)
{
    ParticleEnsemble e(small_config(12, 5), 8, 1);
    for (int i = 1; i <= 30; ++i)
    {
        feed(e, 1);
        const auto w = e.weights();
        double sum = 0.0;
        for (double v : w)
        {
            EXPECT_GE(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const double n_eff = e.effective_sample_size();
        EXPECT_GE(n_eff, 1.0 - 1e-12);
        EXPECT_LE(n_eff, 12.0 + 1e-9);
        for (const auto& p : e.particles()) expect_bookkeeping(p, static_cast<std::size_t>(i));
    }
    EXPECT_EQ(e.nonfinite_weight_count(), 0u);
}

TEST(Step, DeskScaleWeightFactor)
{
    // Two observations forced into one cluster of a single particle.
    const PriorConfig cfg = small_config(1);
    ObservationStore store(1);
    store.append(Vector::Constant(1, 0.2), 0.5);
    store.append(Vector::Constant(1, 0.9), -0.1);
    Rng init_rng(9, StreamTag::particle_update, 0, 0);
    Particle p = init_particle(store, cfg, init_rng);
    const ClusterInputStats stats_before = p.clusters[0].stats;

    Rng rng(9, StreamTag::particle_update, 0, 1);
    const UpdateTrace t = advance_particle_into(p, store, 1, p.clusters[0].id, cfg, rng);
    ASSERT_FALSE(t.new_cluster);

    const TPParams& old_p = t.params_old;
    const TPParams& new_p = t.params_new;
    Matrix X(2, 1);
    X << 0.2, 0.9;
    const Vector y = (Vector(2) << 0.5, -0.1).finished();
    const double lik_new
        = oracle::student_t_log_density(oracle::gram(X, new_p.kernel.theta, std::abs(new_p.h)),
                                        y, new_p.nu);
    const double lik_old = oracle::student_t_log_density(
        Matrix::Constant(1, 1, 1.0 + std::abs(old_p.h)), y.head(1), old_p.nu);
    const double input = oracle::univariate_t_log_pdf(
        0.9, stats_before.predictive(cfg.niw).dof, stats_before.predictive(cfg.niw).location(0),
        stats_before.predictive(cfg.niw).scale(0, 0));
    EXPECT_NEAR(t.log_increment(), input + lik_new - lik_old, 1e-10);
    EXPECT_EQ(p.clusters[0].params.kernel.theta, new_p.kernel.theta);
}

TEST(Step, NewClusterFactorUsesPriorPredictive)
{
    const PriorConfig cfg = small_config(1);
    ObservationStore store(1);
    store.append(Vector::Constant(1, 0.2), 0.5);
    store.append(Vector::Constant(1, 3.0), 2.0);
    Rng init_rng(10, StreamTag::particle_update, 0, 0);
    Particle p = init_particle(store, cfg, init_rng);
    Rng rng(10, StreamTag::particle_update, 0, 1);
    const UpdateTrace t = advance_particle_into(p, store, 1, std::nullopt, cfg, rng);
    ASSERT_TRUE(t.new_cluster);
    EXPECT_EQ(p.clusters.size(), 2u);
    EXPECT_EQ(t.log_lik_old, 0.0);
    const TPParams& q = t.params_new;
    EXPECT_NEAR(t.log_lik_new,
                oracle::student_t_log_density(Matrix::Constant(1, 1, 1.0 + std::abs(q.h)),
                                              Vector::Constant(1, 2.0), q.nu),
                1e-12);
    EXPECT_NEAR(t.log_input_density, input_log_density(Vector::Constant(1, 3.0), cfg.niw), 1e-15);
}

TEST(Step, OutOfOrderIndexIsInputError)
{
    const PriorConfig cfg = small_config(1);
    ObservationStore store(1);
    store.append(Vector::Constant(1, 0.0), 0.0);
    store.append(Vector::Constant(1, 1.0), 0.0);
    store.append(Vector::Constant(1, 2.0), 0.0);
    Rng rng(1, StreamTag::test, 0, 0);
    Particle p = init_particle(store, cfg, rng);
    EXPECT_THROW(advance_particle_into(p, store, 2, std::nullopt, cfg, rng), InputError);
}

TEST(Step, MinibatchedLikelihoodRatioUsesNestedSubsets)
{
    const PriorConfig cfg = small_config(1, 4);
    ObservationStore store(1);
    for (int i = 0; i < 10; ++i) store.append(Vector::Constant(1, 0.05 * i), series(i));
    Rng rng(11, StreamTag::particle_update, 0, 0);
    Particle p = init_particle(store, cfg, rng);
    UpdateTrace t;
    for (Eigen::Index i = 1; i < 10; ++i)
        t = advance_particle_into(p, store, i, p.clusters[0].id, cfg, rng);
    EXPECT_EQ(t.subset_new.size(), 4u);
    for (auto pos : t.subset_old) EXPECT_LT(pos, 9);
    EXPECT_GE(t.subset_old.size(), 3u);
    EXPECT_TRUE(std::isfinite(t.log_increment()));
}

TEST(Ess, Identities)
{
    const std::vector<double> u(5, 0.2);
    EXPECT_NEAR(effective_sample_size(u), 5.0, 1e-12);
    EXPECT_EQ(effective_sample_size(std::vector<double>{0.0, 1.0, 0.0}), 1.0);
    EXPECT_EQ(effective_sample_size(std::vector<double>{0.5, 0.5, 0.0, 0.0}), 2.0);
}

TEST(Resample, DegenerateCopiesOne)
{
    ParticleEnsemble e(small_config(6), 12, 1);
    feed(e, 3);
    auto& ps = e.particles();
    for (std::size_t j = 0; j < ps.size(); ++j) ps[j].log_weight = j == 2 ? 0.0 : -INFINITY;
    const Particle chosen = ps[2];
    Rng rng(1, StreamTag::resample, 0, 0);
    e.resample(rng);
    for (const auto& p : e.particles())
    {
        EXPECT_EQ(p.z, chosen.z);
        EXPECT_EQ(p.clusters.size(), chosen.clusters.size());
        EXPECT_EQ(p.alpha.alpha, chosen.alpha.alpha);
    }
    for (double w : e.weights()) EXPECT_DOUBLE_EQ(w, 1.0 / 6.0);
}

TEST(Resample, UniformCopyCounts)
{
    const std::size_t J = 10;
    const std::vector<double> w(J, 0.1);
    std::vector<double> counts(J, 0.0);
    const int reps = 10000;
    for (int r = 0; r < reps; ++r)
    {
        Rng rng(2, StreamTag::resample, 0, static_cast<std::uint32_t>(r));
        for (auto a : multinomial_ancestors(w, J, rng)) counts[a] += 1.0;
    }
    const double sd = std::sqrt(reps * J * 0.1 * 0.9);
    for (double c : counts) EXPECT_NEAR(c, reps, 3.0 * sd);
}

TEST(Resample, ZeroWeightNeverChosen)
{
    const std::vector<double> w{0.5, 0.0, 0.5, 0.0};
    for (std::uint32_t r = 0; r < 2000; ++r)
    {
        Rng rng(3, StreamTag::resample, 0, r);
        for (auto a : multinomial_ancestors(w, 4, rng)) EXPECT_TRUE(a == 0 || a == 2);
    }
}

TEST(Ensemble, ParticleOrderInvariance)
{
    // Streams follow the particle index, so two runs with the same seed
    // agree particle by particle; a permuted copy permutes the output.
    ParticleEnsemble a(small_config(5), 20, 1), b(small_config(5), 20, 1);
    feed(a, 12);
    feed(b, 12);
    for (std::size_t j = 0; j < 5; ++j)
    {
        EXPECT_EQ(a.particles()[j].z, b.particles()[j].z);
        EXPECT_EQ(a.particles()[j].log_weight, b.particles()[j].log_weight);
    }
}

TEST(Ensemble, ThreadCountDoesNotMatter)
{
    ParticleEnsemble a(small_config(9, 4), 21, 1, 1), b(small_config(9, 4), 21, 1, 4);
    feed(a, 25);
    feed(b, 25);
    for (std::size_t j = 0; j < 9; ++j)
    {
        EXPECT_EQ(a.particles()[j].z, b.particles()[j].z);
        EXPECT_EQ(a.particles()[j].log_weight, b.particles()[j].log_weight);
        EXPECT_EQ(a.particles()[j].alpha.alpha, b.particles()[j].alpha.alpha);
    }
}

TEST(Config, Validation)
{
    PriorConfig cfg;
    cfg.particles = 0;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.batch = 0;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.resample_threshold = 0.0;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg.resample_threshold = 1.0;
    EXPECT_NO_THROW(cfg.validate());
}
