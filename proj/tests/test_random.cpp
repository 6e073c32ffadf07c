#include "tpmoe/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using tpmoe::Philox4x32;
using tpmoe::Rng;
using tpmoe::StreamTag;

// Known-answer vectors published with the reference Philox implementation.
TEST(Philox, KnownAnswerZero)
{
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes)
{
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi)
{
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, SameTupleSameStream)
{
    Rng a(42, StreamTag::particle_update, 3, 17);
    Rng b(42, StreamTag::particle_update, 3, 17);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Philox, DistinctTuplesDiffer)
{
    std::set<std::uint32_t> firsts;
    for (std::uint32_t p = 0; p < 4; ++p)
        for (std::uint32_t o = 0; o < 4; ++o)
            for (auto tag : {StreamTag::particle_update, StreamTag::resample, StreamTag::predict})
            {
                Rng r(7, tag, p, o);
                firsts.insert(r());
            }
    EXPECT_EQ(firsts.size(), 48u);
    Rng a(1, StreamTag::predict, 0, 0), b(2, StreamTag::predict, 0, 0);
    EXPECT_NE(a(), b());
}

TEST(Philox, StreamCrossesBlocks)
{
    Rng r(5, StreamTag::test, 0, 0);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 64; ++i) seen.insert(r());
    EXPECT_EQ(seen.size(), 64u);
}

TEST(Distributions, Uniform01InRange)
{
    Rng r(9, StreamTag::test, 0, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i)
    {
        const double u = tpmoe::uniform01(r);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Distributions, GammaAndInverseGammaMoments)
{
    Rng r(10, StreamTag::test, 0, 0);
    const int n = 200000;
    double g = 0.0, ig = 0.0;
    for (int i = 0; i < n; ++i)
    {
        g += tpmoe::gamma_shape_rate(r, 3.0, 2.0);
        ig += tpmoe::inv_gamma(r, 4.0, 6.0);
    }
    EXPECT_NEAR(g / n, 1.5, 0.01);
    EXPECT_NEAR(ig / n, 2.0, 0.02);
}

TEST(Distributions, BetaMean)
{
    Rng r(11, StreamTag::test, 0, 0);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double b = tpmoe::beta(r, 2.0, 5.0);
        ASSERT_GT(b, 0.0);
        ASSERT_LT(b, 1.0);
        s += b;
    }
    EXPECT_NEAR(s / n, 2.0 / 7.0, 0.005);
}

TEST(Distributions, InverseGammaStaysPositive)
{
    Rng r(12, StreamTag::test, 0, 0);
    for (int i = 0; i < 10000; ++i)
    {
        const double v = tpmoe::inv_gamma(r, 0.05, 1e-3);
        ASSERT_GT(v, 0.0);
        ASSERT_TRUE(std::isfinite(v));
    }
}
