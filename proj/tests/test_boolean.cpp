#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include <meandense/boolean.hpp>
#include <meandense/numerics.hpp>

using namespace meandense;

namespace {

const MarkDistribution kUnitSegments =
    MarkDistribution::segment_law(2, LengthLaw::fixed(1.0), OrientationLaw::uniform());

BooleanRealization single_segment() {
    return BooleanRealization({{Point{0.0, 0.0}, Grain::segment_at_angles(2, 1.0, 0.0)}}, Box::cube(2, -1, 2), 1.2,
                              0.2, 1);
}

BooleanRealization empty_realization() { return BooleanRealization({}, Box::cube(2, -1, 2), 1.2, 0.2, 1); }

} // namespace

TEST(Simulate, ZeroIntensityHasNoGrains) {
    RandomStream rng(1);
    EXPECT_TRUE(simulate(IntensityField::constant(2, 0.0), kUnitSegments, Box::cube(2, 0, 1), 0.2, rng)
                    .placed_grains()
                    .empty());
}

TEST(Simulate, GrainCountOnExtendedWindow) {
    MeanVariance mv;
    for (std::uint64_t i = 0; i < 300; ++i) {
        RandomStream rng = derive_stream(2, i);
        const auto real = simulate(IntensityField::constant(2, 50.0), kUnitSegments, Box::cube(2, 0, 1), 0.2, rng);
        EXPECT_DOUBLE_EQ(real.guard_margin(), 1.2);
        for (const auto& g : real.placed_grains()) ASSERT_TRUE(Box::cube(2, -1.2, 2.2).contains(g.germ));
        mv.add(static_cast<double>(real.placed_grains().size()));
    }
    EXPECT_NEAR(mv.mean(), 50.0 * 3.4 * 3.4, 3.0 * mv.standard_error());
}

TEST(Simulate, Determinism) {
    RandomStream a = derive_stream(3, 0), b = derive_stream(3, 0);
    const auto f = IntensityField::quadratic(2);
    const auto ra = simulate(f, kUnitSegments, Box::cube(2, -1, 1), 0.1, a);
    const auto rb = simulate(f, kUnitSegments, Box::cube(2, -1, 1), 0.1, b);
    EXPECT_EQ(ra.placed_grains(), rb.placed_grains());
}

TEST(Simulate, RejectsRadiusAtLeastTwo) {
    RandomStream rng(1);
    EXPECT_THROW(simulate(IntensityField::constant(2, 1.0), kUnitSegments, Box::cube(2, 0, 1), 2.0, rng), ConfigError);
}

TEST(Hits, Examples) {
    const auto real = single_segment();
    EXPECT_TRUE(real.hits({0.5, 0.05}, 0.1));
    EXPECT_FALSE(real.hits({0.5, 0.5}, 0.1));
    EXPECT_FALSE(empty_realization().hits({0.5, 0.5}, 0.1));
    EXPECT_TRUE(real.hits({0.5, 0.1}, 0.1)); // closed ball: tie counts
}

TEST(Hits, QueryErrors) {
    const auto real = single_segment();
    EXPECT_THROW(real.hits({0.5, 0.0}, 0.3), QueryError);  // r > r_max
    EXPECT_THROW(real.hits({1.95, 0.0}, 0.1), QueryError); // ball leaves window
    EXPECT_THROW(real.hit_count({1.95, 0.0}, 0.1), QueryError);
}

TEST(HitCount, Examples) {
    const Box window = Box::cube(2, -1, 2);
    // Distances 0.05 and 0.5 from x = (0.5, 0.05).
    BooleanRealization real({{Point{0.0, 0.0}, Grain::segment_at_angles(2, 1.0, 0.0)},
                             {Point{0.0, 0.55}, Grain::segment_at_angles(2, 1.0, 0.0)}},
                            window, 1.2, 0.2, 1);
    EXPECT_EQ(real.hit_count({0.5, 0.05}, 0.1), 1u);
    EXPECT_EQ(empty_realization().hit_count({0.5, 0.5}, 0.1), 0u);
}

TEST(HitCount, AgreesWithHitsAndIsMonotone) {
    RandomStream rng(5);
    const auto real = simulate(IntensityField::quadratic(2, 3.0), kUnitSegments, Box::cube(2, -1, 1), 0.3, rng);
    ASSERT_GT(real.placed_grains().size(), 10u);
    for (int i = 0; i < 1000; ++i) {
        const Point x = sample_in_box(Box::cube(2, -0.7, 0.7), rng);
        const double r1 = rng.uniform(0.0, 0.3), r2 = rng.uniform(r1, 0.3);
        EXPECT_EQ(real.hits(x, r1), real.hit_count(x, r1) > 0);
        EXPECT_LE(real.hit_count(x, r1), real.hit_count(x, r2));
        if (real.hits(x, r1)) {
            EXPECT_TRUE(real.hits(x, r2));
        }
    }
}

TEST(HitCount, IndexMatchesBruteForceForAnyCellSize) {
    RandomStream rng(6);
    const Box window = Box::cube(2, 0, 3);
    const auto sample = sample_germs(IntensityField::quadratic(2, 2.0), kUnitSegments, window.dilated(1.25), rng);
    ASSERT_GT(sample.germs.size(), 100u);
    for (double cell : {0.05, 0.3, 1.25, 4.0}) {
        const BooleanRealization real(sample.germs, window, 1.25, 0.25, 1, cell);
        ASSERT_TRUE(real.indexed());
        for (int i = 0; i < 500; ++i) {
            const Point x = sample_in_box(Box::cube(2, 0.25, 2.75), rng);
            const double r = rng.uniform(0.0, 0.25);
            ASSERT_EQ(real.hit_count(x, r), real.hit_count_brute_force(x, r)) << "cell " << cell;
        }
    }
}

TEST(GuardZone, LargerGuardDoesNotChangeAnswers) {
    // Coupling: one germ sample on a generous box; the realization with the
    // minimal guard keeps only germs inside window ⊕ (L_max + r_max).
    const Box window = Box::cube(2, 0, 2);
    const double r_max = 0.2, guard = 1.0 + r_max;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        RandomStream rng = derive_stream(7, rep);
        const auto all = sample_germs(IntensityField::constant(2, 8.0), kUnitSegments, window.dilated(guard + 1.5), rng);
        std::vector<MarkedGerm> inner;
        for (const auto& g : all.germs)
            if (window.dilated(guard).contains(g.germ)) inner.push_back(g);
        const BooleanRealization small(inner, window, guard, r_max, 1);
        const BooleanRealization big(all.germs, window, guard + 1.5, r_max, 1);
        for (int i = 0; i < 200; ++i) {
            const Point x = sample_in_box(Box::cube(2, r_max, 2.0 - r_max), rng);
            const double r = rng.uniform(0.0, r_max);
            ASSERT_EQ(small.hit_count(x, r), big.hit_count(x, r));
        }
    }
}

TEST(MeasureInRegion, Examples) {
    EXPECT_DOUBLE_EQ(single_segment().measure_in_region(Box({0.0, -1.0}, {0.5, 1.0})), 0.5);
    EXPECT_DOUBLE_EQ(empty_realization().measure_in_region(Box::cube(2, 0, 1)), 0.0);
    EXPECT_THROW(single_segment().measure_in_region(Box::cube(2, 0, 3)), QueryError);
}

TEST(MeasureInRegion, PointGrainsCountContainedGerms) {
    BooleanRealization real({{Point{0.2}, Grain::point(1)}, {Point{0.7}, Grain::point(1)}, {Point{1.5}, Grain::point(1)}},
                            Box::cube(1, 0, 2), 0.0, 0.0, 0);
    EXPECT_DOUBLE_EQ(real.measure_in_region(Box::cube(1, 0, 1)), 2.0);
}

TEST(MeasureInRegion, AdditiveOverPartition) {
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        RandomStream rng = derive_stream(8, rep);
        const Box a = Box::cube(2, 0, 1);
        const auto real = simulate(IntensityField::quadratic(2, 20.0), kUnitSegments, a, 0.0, rng);
        const double whole = real.measure_in_region(a);
        const double cuts[] = {0.0, 0.31, 0.77, 1.0};
        CompensatedSum parts;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                parts.add(real.measure_in_region(Box({cuts[i], cuts[j]}, {cuts[i + 1], cuts[j + 1]})));
        EXPECT_NEAR(parts.value(), whole, 1e-9 * std::max(1.0, whole));
    }
}

TEST(MeasureInRegion, StationaryMeanIsArea) {
    MeanVariance mv;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        RandomStream rng = derive_stream(9, i);
        mv.add(simulate(IntensityField::constant(2, 1.0), kUnitSegments, Box::cube(2, 0, 1), 0.0, rng)
                   .measure_in_region(Box::cube(2, 0, 1)));
    }
    EXPECT_NEAR(mv.mean(), 1.0, 3.0 * mv.standard_error());
}

TEST(Realization, ValidatesDimensions) {
    EXPECT_THROW(BooleanRealization({{Point{0.0, 0.0}, Grain::point(2)}}, Box::cube(2, 0, 1), 0.0, 0.0, 1), ConfigError);
    EXPECT_THROW(BooleanRealization({}, Box::cube(2, 0, 1), 0.0, 0.0, 2), ConfigError);
}

TEST(Realization, CsvHasOneRowPerGrain) {
    RandomStream rng(10);
    const auto real = simulate(IntensityField::constant(2, 3.0), kUnitSegments, Box::cube(2, 0, 1), 0.1, rng);
    std::ostringstream out;
    real.write_csv(out);
    const std::string s = out.str();
    const auto lines = static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
    EXPECT_EQ(lines, real.placed_grains().size() + 1);
    EXPECT_EQ(s.rfind("grain_id,kind,germ_x1,germ_x2,hn_measure,vertex_count,vertices", 0), 0u);
}
