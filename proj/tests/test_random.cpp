#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <meandense/numerics.hpp>
#include <meandense/random.hpp>

using namespace meandense;

namespace {

// Upper 0.01 quantile of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi2_crit_01(int k) {
    const double z = 2.3263478740408408;
    const double a = 2.0 / (9.0 * k);
    return k * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

// Chi-square statistic of Poisson(mean) counts against the exact pmf, with
// sparse tails pooled until every expected count is at least 5.
double poisson_chi2(const std::vector<std::uint64_t>& counts, double mean, int& dof) {
    const double n = static_cast<double>(counts.size());
    std::uint64_t top = 0;
    for (auto c : counts) top = std::max(top, c);
    std::vector<double> observed(top + 2, 0.0), expected(top + 2, 0.0);
    for (auto c : counts) observed[c] += 1.0;
    double p = std::exp(-mean), cdf = 0.0;
    for (std::uint64_t k = 0; k <= top; ++k) {
        expected[k] = n * p;
        cdf += p;
        p *= mean / static_cast<double>(k + 1);
    }
    expected[top + 1] = n * std::max(0.0, 1.0 - cdf);
    std::vector<double> o, e;
    double acc_o = 0.0, acc_e = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        acc_o += observed[k];
        acc_e += expected[k];
        if (acc_e >= 5.0) {
            o.push_back(acc_o);
            e.push_back(acc_e);
            acc_o = acc_e = 0.0;
        }
    }
    if (acc_e > 0.0) {
        o.back() += acc_o;
        e.back() += acc_e;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) chi2 += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
    dof = static_cast<int>(o.size()) - 1;
    return chi2;
}

} // namespace

TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::encrypt(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::encrypt(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::encrypt(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, WordLayoutFollowsCipherOutput) {
    // Key 0, block 0: words (lo, hi) = (c0, c1), (c2, c3) of the zero vector.
    RandomStream rng(0);
    EXPECT_EQ(rng(), (std::uint64_t{0xe169c58du} << 32) | 0x6627e8d5u);
    EXPECT_EQ(rng(), (std::uint64_t{0x9b00dbd8u} << 32) | 0xbc57ac4cu);
    EXPECT_EQ(rng.blocks_consumed(), 1u);
    rng();
    EXPECT_EQ(rng.blocks_consumed(), 2u);

    const std::uint64_t key = 0x299f31d0a4093822ULL;
    RandomStream keyed(key);
    const auto block0 = Philox4x32::encrypt({0, 0, 0, 0}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(keyed(), (std::uint64_t{block0[1]} << 32) | block0[0]);
}

TEST(DeriveStream, DeterministicAndDistinct) {
    RandomStream a = derive_stream(42, 0), b = derive_stream(42, 0), c = derive_stream(42, 1);
    bool differ = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differ = differ || x != c();
    }
    EXPECT_TRUE(differ);
    EXPECT_NE(derive_seed(42, 0), derive_seed(43, 0));
    EXPECT_EQ(derive_seed(42, 7), mix64(mix64(42) ^ 7));
}

TEST(RandomStream, UniformRangeAndMoments) {
    RandomStream rng(9);
    MeanVariance mv;
    for (int i = 0; i < 200000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double v = rng.uniform_open();
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
        mv.add(u);
    }
    EXPECT_NEAR(mv.mean(), 0.5, 3.0 * mv.standard_error());
    EXPECT_NEAR(mv.variance(), 1.0 / 12.0, 2e-3);
}

class PoissonLaw : public ::testing::TestWithParam<double> {};

TEST_P(PoissonLaw, ChiSquareGoodnessOfFit) {
    const double mean = GetParam();
    RandomStream rng = derive_stream(2024, static_cast<std::uint64_t>(mean * 1000));
    std::vector<std::uint64_t> counts(20000);
    MeanVariance mv;
    for (auto& c : counts) {
        c = sample_poisson(mean, rng);
        mv.add(static_cast<double>(c));
    }
    int dof = 0;
    const double chi2 = poisson_chi2(counts, mean, dof);
    EXPECT_LT(chi2, chi2_crit_01(dof)) << "mean " << mean << " dof " << dof;
    EXPECT_NEAR(mv.mean(), mean, 3.0 * std::sqrt(mean / counts.size()));
}

INSTANTIATE_TEST_SUITE_P(InversionAndRejection, PoissonLaw, ::testing::Values(0.3, 2.5, 9.9, 10.0, 37.0, 250.0));

TEST(Poisson, InvalidMeanIsNumericError) {
    RandomStream rng(1);
    EXPECT_THROW(sample_poisson(-1.0, rng), NumericError);
    EXPECT_THROW(sample_poisson(std::nan(""), rng), NumericError);
    EXPECT_EQ(sample_poisson(0.0, rng), 0u);
}

TEST(Direction, UnitLengthAndIsotropy) {
    RandomStream rng(3);
    for (int d = 1; d <= 3; ++d) {
        MeanVariance first, sq;
        for (int i = 0; i < 50000; ++i) {
            const Point u = sample_direction(d, rng);
            ASSERT_NEAR(norm(u), 1.0, 1e-12);
            first.add(u[0]);
            sq.add(u[0] * u[0]);
        }
        EXPECT_NEAR(first.mean(), 0.0, 3.0 * first.standard_error());
        EXPECT_NEAR(sq.mean(), 1.0 / d, 3.0 * sq.standard_error() + 1e-12);
    }
}
