#include "hann/sampling.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hann;

namespace {

// Every one of the `count` equal strata in each dimension holds exactly one point.
bool stratified(const PointList& pts, const Box& box) {
    const std::size_t n = pts.size();
    for (std::size_t k = 0; k < box.size(); ++k) {
        std::vector<int> hits(n, 0);
        for (const Vector& p : pts) {
            const double v = p[static_cast<Eigen::Index>(k)];
            if (!box[k].contains(v)) return false;
            // oracle: exact rational comparison against the stratum edges
            std::size_t s = 0;
            while (s + 1 < n && v >= box[k].lo + static_cast<double>(s + 1) * box[k].width() / static_cast<double>(n)) ++s;
            ++hits[s];
        }
        for (int h : hits)
            if (h != 1) return false;
    }
    return true;
}

}  // namespace

TEST(Sampling, LhsStratification) {
    for (std::size_t count : {1u, 5u, 50u, 500u, 1000u}) {
        const Box box{{0.0, 1.0}, {-30.0, 30.0}, {-40.0, 0.0}};
        const PointList pts = latin_hypercube(SamplePlan{count, box, 1234 + count, SampleScheme::lhs});
        ASSERT_EQ(pts.size(), count);
        EXPECT_TRUE(stratified(pts, box)) << count;
    }
}

TEST(Sampling, LhsDeterministicPerSeed) {
    const SamplePlan a{50, {{0.0, 1.0}}, 7, SampleScheme::lhs};
    SamplePlan b = a;
    EXPECT_EQ(latin_hypercube(a), latin_hypercube(b));
    b.seed = 8;
    EXPECT_NE(latin_hypercube(a), latin_hypercube(b));
}

TEST(Sampling, OneDimensionalHelper) {
    const std::vector<double> v = latin_hypercube_1d(10, {0.0, 1.0}, 3);
    std::set<int> cells;
    for (double x : v) cells.insert(static_cast<int>(x * 10));
    EXPECT_EQ(cells.size(), 10u);
}

TEST(Sampling, MidpointGridSingleEquation) {
    const PointList pts = midpoint_grid({{-40.0, 0.0}}, {32});
    ASSERT_EQ(pts.size(), 32u);
    EXPECT_DOUBLE_EQ(pts.front()[0], -39.375);
    EXPECT_DOUBLE_EQ(pts[30][0], -1.875);
    EXPECT_DOUBLE_EQ(pts.back()[0], -0.625);
}

TEST(Sampling, MidpointGridOrderFirstDimensionSlowest) {
    const PointList pts = midpoint_grid({{0.0, 2.0}, {0.0, 3.0}}, {2, 3});
    ASSERT_EQ(pts.size(), 6u);
    EXPECT_DOUBLE_EQ(pts[0][0], 0.5);
    EXPECT_DOUBLE_EQ(pts[0][1], 0.5);
    EXPECT_DOUBLE_EQ(pts[1][1], 1.5);
    EXPECT_DOUBLE_EQ(pts[3][0], 1.5);
}

TEST(Sampling, RandomInCellOnePointPerCell) {
    const Box box{{-5.0, 5.0}, {-5.0, 5.0}};
    const PointList pts = random_in_cell(box, {10, 10}, 1234);
    ASSERT_EQ(pts.size(), 100u);
    std::set<std::pair<int, int>> cells;
    for (const Vector& p : pts) {
        const int i = static_cast<int>(std::floor(p[0] + 5.0));
        const int j = static_cast<int>(std::floor(p[1] + 5.0));
        cells.emplace(i, j);
    }
    EXPECT_EQ(cells.size(), 100u);
}

TEST(Sampling, DeriveSeedSeparatesStreams) {
    EXPECT_NE(derive_seed(1234, 0), derive_seed(1234, 1));
    EXPECT_NE(derive_seed(1234, 0), derive_seed(1235, 0));
    EXPECT_EQ(derive_seed(1234, 1), derive_seed(1234, 1));
}

TEST(Sampling, RngUniformInUnitInterval) {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Sampling, RejectsBadInput) {
    EXPECT_THROW(latin_hypercube(SamplePlan{0, {{0.0, 1.0}}, 1, SampleScheme::lhs}), std::invalid_argument);
    EXPECT_THROW(latin_hypercube(SamplePlan{3, {{1.0, 0.0}}, 1, SampleScheme::lhs}), std::invalid_argument);
    EXPECT_THROW(midpoint_grid({{0.0, 1.0}}, {0}), std::invalid_argument);
    EXPECT_THROW(midpoint_grid({{0.0, 1.0}}, {2, 2}), std::invalid_argument);
}
