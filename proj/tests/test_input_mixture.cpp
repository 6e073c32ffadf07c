#include "tpmoe/input_mixture.hpp"
#include "tpmoe/log_weights.hpp"
#include "validation/oracles.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numeric>
#include <random>

using namespace tpmoe;

namespace
{

Vector scalar(double v) { return Vector::Constant(1, v); }

ClusterInputStats stats_of(std::initializer_list<double> xs)
{
    ClusterInputStats s = ClusterInputStats::empty(1);
    for (double x : xs) s = update_input_stats(s, scalar(x));
    return s;
}

}  // namespace

TEST(InputStats, FirstPoint)
{
    const ClusterInputStats s = update_input_stats(ClusterInputStats::empty(2),
                                                   (Vector(2) << 1.5, -2.0).finished());
    EXPECT_EQ(s.n, 1u);
    EXPECT_EQ(s.mean(0), 1.5);
    EXPECT_EQ(s.mean(1), -2.0);
    EXPECT_EQ(s.scatter.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InputStats, TwoPoints)
{
    const ClusterInputStats s = stats_of({0.0, 2.0});
    EXPECT_EQ(s.n, 2u);
    EXPECT_NEAR(s.mean(0), 1.0, 1e-15);
    EXPECT_NEAR(s.scatter(0, 0), 2.0, 1e-15);
}

TEST(InputStats, IncrementalMatchesBatch)
{
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z(0.0, 3.0);
    Matrix X(20, 3);
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = z(gen);
    ClusterInputStats s = ClusterInputStats::empty(3);
    for (Eigen::Index i = 0; i < 20; ++i) s = update_input_stats(s, X.row(i).transpose());
    const Vector mean = X.colwise().mean().transpose();
    const Matrix centered = X.rowwise() - mean.transpose();
    const Matrix scatter = centered.transpose() * centered;
    EXPECT_LT((s.mean - mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((s.scatter - scatter).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ((s.scatter - s.scatter.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(InputDensity, PriorPredictiveIsScaledT)
{
    const NIWPrior prior = NIWPrior::standard(1);
    EXPECT_EQ(prior.nu0, 3.0);
    const double expected = oracle::univariate_t_log_pdf(0.0, 3.0, 0.0, 2.0 / 3.0);
    EXPECT_NEAR(input_log_density(scalar(0.0), prior), expected, 1e-12);
    EXPECT_NEAR(input_log_density(scalar(0.0), ClusterInputStats::empty(1), prior), expected, 1e-12);
    EXPECT_NEAR(input_log_density(scalar(1.7), prior),
                oracle::univariate_t_log_pdf(1.7, 3.0, 0.0, 2.0 / 3.0), 1e-12);
}

TEST(InputDensity, PosteriorPredictiveParameters)
{
    // Conjugate update written out for D = 1.
    const NIWPrior prior = NIWPrior::standard(1);
    const ClusterInputStats s = stats_of({0.5, 1.5, 2.5, 1.0});
    const double n = 4.0, xbar = 1.375;
    const double scatter = (0.5 - xbar) * (0.5 - xbar) + (1.5 - xbar) * (1.5 - xbar)
                           + (2.5 - xbar) * (2.5 - xbar) + (1.0 - xbar) * (1.0 - xbar);
    const double lambda_n = 1.0 + n;
    const double mu_n = n * xbar / lambda_n;
    const double psi_n = 1.0 + scatter + n / lambda_n * xbar * xbar;
    const double dof = 3.0 + n;
    const double scale = (lambda_n + 1.0) / (lambda_n * dof) * psi_n;
    for (double x : {-1.0, 0.3, 1.4, 4.0})
        EXPECT_NEAR(input_log_density(scalar(x), s, prior),
                    oracle::univariate_t_log_pdf(x, dof, mu_n, scale), 1e-12);
}

TEST(InputDensity, EllipticallySymmetric)
{
    const NIWPrior prior = NIWPrior::standard(2);
    ClusterInputStats s = ClusterInputStats::empty(2);
    s = update_input_stats(s, (Vector(2) << 1.0, 0.0).finished());
    s = update_input_stats(s, (Vector(2) << 0.0, 2.0).finished());
    s = update_input_stats(s, (Vector(2) << -1.0, 0.5).finished());
    const InputPredictive pred = s.predictive(prior);
    const Vector d = (Vector(2) << 0.7, -0.4).finished();
    EXPECT_NEAR(input_log_density(pred.location + d, s, prior),
                input_log_density(pred.location - d, s, prior), 1e-12);
}

TEST(InputDensity, ConcentratesAtRepeatedPoint)
{
    const NIWPrior prior = NIWPrior::standard(1);
    ClusterInputStats s = ClusterInputStats::empty(1);
    double prev = input_log_density(scalar(0.0), s, prior);
    for (int i = 0; i < 50; ++i)
    {
        s = update_input_stats(s, scalar(0.0));
        const double cur = input_log_density(scalar(0.0), s, prior);
        EXPECT_GT(cur, prev);
        prev = cur;
    }
}

TEST(InputDensity, IntegratesToOne)
{
    const NIWPrior prior = NIWPrior::standard(1);
    const ClusterInputStats s = stats_of({0.2, -0.4, 0.9});
    for (const ClusterInputStats& st : {ClusterInputStats::empty(1), s})
    {
        auto f = [&](double x) { return std::exp(input_log_density(scalar(x), st, prior)); };
        const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 15, 1e-12);
        EXPECT_NEAR(total, 1.0, 1e-4);
    }
}

TEST(Crp, NoClustersMeansNew)
{
    const auto p = crp_assignment_probabilities({}, 0.7, NIWPrior::standard(1), scalar(0.3));
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0], 1.0);
}

TEST(Crp, CountRatioWithEqualDensities)
{
    // Equal densities by construction: log weights (log 3, log 1, log 1).
    const std::vector<double> logw{std::log(3.0) + 0.25, 0.25, 0.25};
    const auto p = normalize_log_weights(logw);
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], 0.2, 1e-15);
    EXPECT_NEAR(p[2], 0.2, 1e-15);
}

TEST(Crp, LogSpaceMatchesDirect)
{
    const NIWPrior prior = NIWPrior::standard(1);
    const std::vector<ClusterInputStats> clusters{stats_of({0.1, 0.4, -0.2}), stats_of({2.0, 2.5}),
                                                  stats_of({-3.0})};
    const Vector x = scalar(0.8);
    const double alpha = 1.7;
    const auto p = crp_assignment_probabilities(clusters, alpha, prior, x);
    std::vector<double> direct;
    for (const auto& c : clusters)
        direct.push_back(static_cast<double>(c.n) * std::exp(input_log_density(x, c, prior)));
    direct.push_back(alpha * std::exp(input_log_density(x, prior)));
    const double total = std::accumulate(direct.begin(), direct.end(), 0.0);
    ASSERT_EQ(p.size(), 4u);
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
    {
        EXPECT_NEAR(p[k], direct[k] / total, 1e-12);
        sum += p[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Crp, RelabelingPermutesProbabilities)
{
    const NIWPrior prior = NIWPrior::standard(1);
    const ClusterInputStats a = stats_of({0.1, 0.4}), b = stats_of({2.0, 2.5, 3.0});
    const std::vector<ClusterInputStats> ab{a, b}, ba{b, a};
    const auto p = crp_assignment_probabilities(ab, 0.5, prior, scalar(1.0));
    const auto q = crp_assignment_probabilities(ba, 0.5, prior, scalar(1.0));
    EXPECT_NEAR(p[0], q[1], 1e-15);
    EXPECT_NEAR(p[1], q[0], 1e-15);
    EXPECT_NEAR(p[2], q[2], 1e-15);
}

TEST(Crp, ExtremeInputStillNormalized)
{
    const NIWPrior prior = NIWPrior::standard(1);
    const std::vector<ClusterInputStats> clusters{stats_of({0.0, 0.01, -0.01, 0.02})};
    const auto p = crp_assignment_probabilities(clusters, 1.0, prior, scalar(1e8));
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    for (double v : p) EXPECT_TRUE(std::isfinite(v));
}

TEST(Crp, NewClusterMonotoneInAlpha)
{
    const NIWPrior prior = NIWPrior::standard(1);
    const std::vector<ClusterInputStats> clusters{stats_of({0.0, 1.0})};
    double prev = -1.0;
    for (double alpha : {1e-12, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e12})
    {
        const double p_new = crp_assignment_probabilities(clusters, alpha, prior, scalar(0.5))[1];
        EXPECT_GT(p_new, prev);
        prev = p_new;
        if (alpha == 1e-12) EXPECT_LT(p_new, 1e-10);
        if (alpha == 1e12) EXPECT_GT(p_new, 1.0 - 1e-10);
    }
}

TEST(Alpha, MixtureWeightArithmetic)
{
    const double pi = alpha_mixture_weight(1.0, 1.0, 2, 10, 0.5);
    const double odds = 2.0 / (10.0 * (1.0 - std::log(0.5)));
    EXPECT_NEAR(pi, odds / (1.0 + odds), 1e-15);
    // Five-digit hand values.
    EXPECT_NEAR(odds, 0.11813, 1e-5);
    EXPECT_NEAR(pi, 0.10565, 1e-5);
}

TEST(Alpha, AlwaysPositive)
{
    Rng rng(1, StreamTag::test, 0, 0);
    Concentration c;
    for (int i = 0; i < 10000; ++i)
    {
        c.alpha = sample_alpha(c, 1 + i % 5, 1 + i % 37, rng);
        ASSERT_GT(c.alpha, 0.0);
        ASSERT_TRUE(std::isfinite(c.alpha));
    }
}

TEST(Alpha, ChainMatchesPosteriorDensity)
{
    const double a0 = 1.0, b0 = 1.0;
    const std::size_t K = 3, n = 20;
    Rng rng(2, StreamTag::test, 0, 0);
    Concentration c{1.0, a0, b0};
    for (int i = 0; i < 200; ++i) c.alpha = sample_alpha(c, K, n, rng);
    std::vector<double> draws;
    for (int i = 0; i < 100000; ++i)
    {
        c.alpha = sample_alpha(c, K, n, rng);
        draws.push_back(c.alpha);
    }
    const oracle::LinearGridCdf cdf(
        [&](double a) { return oracle::alpha_posterior_log_density(a, a0, b0, K, n); }, 0.0,
        30.0, 300001);
    EXPECT_LT(oracle::ks_statistic(draws, cdf), 0.02);
}
