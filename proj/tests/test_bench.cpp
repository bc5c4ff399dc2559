#include "hann/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hann;

namespace {

// Sign changes of 1/x − sin x + 1 on a 10^6-point grid of (−40, 0), each
// bisected to machine precision. Independent of the expression engine.
std::vector<double> bisection_roots() {
    auto f = [](double x) { return 1.0 / x - std::sin(x) + 1.0; };
    const int n = 1000000;
    const double lo = -40.0, hi = 0.0;
    std::vector<double> roots;
    double a = lo, fa = f(a);
    for (int i = 1; i < n; ++i) {  // stops one step short of the pole at 0
        const double b = lo + (hi - lo) * i / n;
        const double fb = f(b);
        if ((fa < 0) != (fb < 0)) {
            double l = a, r = b, fl = fa;
            for (int k = 0; k < 200 && r - l > 0; ++k) {
                const double m = 0.5 * (l + r);
                if (m == l || m == r) break;
                const double fm = f(m);
                if ((fm < 0) == (fl < 0)) l = m, fl = fm;
                else r = m;
            }
            roots.push_back(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

}  // namespace

TEST(Bench, SingleEquationRootsMatchBisection) {
    const std::vector<double> oracle = bisection_roots();
    ASSERT_EQ(oracle.size(), 13u);
    for (std::size_t i = 0; i < 13; ++i) EXPECT_NEAR(bench_data::kSingleEqRoots[i], oracle[i], 1e-12) << i;
}

TEST(Bench, AllBuiltinsLoad) {
    for (std::string_view name : builtin_names()) {
        const BenchmarkCase c = builtin(name);
        EXPECT_EQ(c.name, name);
        ASSERT_TRUE(c.system);
        EXPECT_TRUE(c.system->square()) << name;
        for (const Vector& r : c.exact_roots) EXPECT_LE(residual_l1(*c.system, r), 1e-10) << name;
    }
    EXPECT_THROW(builtin("no-such-case"), std::invalid_argument);
}

TEST(Bench, InitialValueSchemes) {
    const BenchmarkCase se = builtin("single-eq");
    const PointList a = se.initials();
    ASSERT_EQ(a.size(), 32u);
    EXPECT_DOUBLE_EQ(a[15][0], -20.625);

    const PointList b = builtin("abs-system").initials();
    ASSERT_EQ(b.size(), 49u);
    EXPECT_EQ(b.front(), (Vector(2) << -15.0, -15.0).finished());
    EXPECT_EQ(b[24], (Vector(2) << 0.0, 0.0).finished());

    const PointList c = builtin("trig-system").initials();
    EXPECT_EQ(c.size(), 100u);

    const BenchmarkCase i10 = builtin("interval10");
    const PointList d = i10.initials();
    ASSERT_EQ(d.size(), 200u);
    for (const Vector& p : d) EXPECT_LE(p.cwiseAbs().maxCoeff(), 30.0);
    EXPECT_EQ(i10.config.hidden, (std::vector<int>{2, 2}));
    EXPECT_EQ(i10.config.collocation, 5u);
    EXPECT_DOUBLE_EQ(i10.config.gamma, 1e-4);

    const BenchmarkCase comb = builtin("combustion10");
    ASSERT_EQ(comb.listed.size(), 8u);
    EXPECT_EQ(comb.listed[2].seed, 123u);
    EXPECT_EQ(comb.listed[7].anchor, Vector::Constant(10, -1.0));
}

TEST(Bench, Interval10TablePointResiduals) {
    // Frozen regression values: residual_l1 at the published nine-digit points.
    const BenchmarkCase c = builtin("interval10");
    const std::array<double, 9> frozen{0.02334204253507055,  0.006717168561330311, 0.231731017947209,
                                       0.0967106233969037,   0.5749461433580909,   0.007186520672338551,
                                       0.009686357162532966, 0.010000864254647635, 0.9027082642220425};
    for (std::size_t k = 0; k < 9; ++k) {
        Vector p(10);
        for (int i = 0; i < 10; ++i) p[i] = bench_data::kInterval10Table[k][static_cast<std::size_t>(i)];
        EXPECT_NEAR(residual_l1(*c.system, p), frozen[k], 1e-12 * (1 + frozen[k])) << k;
    }
}

TEST(Bench, Interval10ExactRootsComeFromPublishedPoints) {
    const BenchmarkCase c = builtin("interval10");
    EXPECT_GE(c.exact_roots.size(), 5u);
    for (std::size_t a = 0; a < c.exact_roots.size(); ++a)
        for (std::size_t b = a + 1; b < c.exact_roots.size(); ++b)
            EXPECT_GT(max_norm_distance(c.exact_roots[a], c.exact_roots[b]), 1e-6);
}

TEST(Bench, ScaledCombustionIsTheSameSystem) {
    const BenchmarkCase u = builtin("combustion10");
    const BenchmarkCase s = builtin("combustion10", true);
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        Vector z(10);
        for (int i = 0; i < 10; ++i) z[i] = rng.uniform(0.0, 3.0);
        const Vector fu = eval_system(*u.system, 1e-5 * z);
        const Vector fs = eval_system(*s.system, z);
        // rows 1–4 scale by 1e-5, rows 5–9 by 1e-10, the cubic row by 1e-15
        for (int i = 0; i < 10; ++i) {
            const double f = i < 4 ? 1e-5 : i < 9 ? 1e-10 : 1e-15;
            EXPECT_NEAR(fu[i], f * fs[i], 1e-12 * f * (1.0 + std::abs(fs[i]))) << i;
        }
    }
}

TEST(Bench, CountedClustersRespectDomain) {
    BenchmarkCase c = builtin("single-eq");
    SolutionSet set;
    Cluster in, out;
    in.representative = Vector::Constant(1, -17.6);
    out.representative = Vector::Constant(1, -42.6);
    set.clusters = {in, out};
    EXPECT_EQ(c.counted_clusters(set), 1u);
    c.count_in_domain_only = false;
    EXPECT_EQ(c.counted_clusters(set), 2u);
}

TEST(Bench, ReferenceComparisonFindsNearestRootAndPublishedPoints) {
    const BenchmarkCase c = builtin("abs-system");
    SolutionSet set;
    Cluster cl;
    cl.representative = (Vector(2) << 0.501, -0.5).finished();
    cl.min_residual = 1e-3;
    set.clusters = {cl};
    const ReferenceReport rep = compare_reference(c, set);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_NEAR(rep.rows[0].root_distance, 1e-3, 1e-12);
    EXPECT_EQ(*rep.rows[0].nearest_root, (Vector(2) << 0.5, -0.5).finished());
    EXPECT_EQ(rep.rows[0].matches.size(), 4u);  // published rows near (0.5, −0.5)
}

TEST(Bench, SweepValueParsing) {
    EXPECT_EQ(parse_architecture("4x40"), (std::vector<int>{40, 40, 40, 40}));
    EXPECT_EQ(parse_architecture("40,20,10"), (std::vector<int>{40, 20, 10}));
    EXPECT_THROW(parse_architecture("4x"), std::invalid_argument);
    EXPECT_THROW(parse_architecture("0x3"), std::invalid_argument);
    EXPECT_EQ(parse_sweep_axis("collocation"), SweepAxis::collocation);
    EXPECT_THROW(parse_sweep_axis("depth"), std::invalid_argument);
    const TrainConfig base;
    EXPECT_DOUBLE_EQ(apply_sweep_value(base, SweepAxis::gamma, "1e-4").gamma, 1e-4);
    EXPECT_EQ(apply_sweep_value(base, SweepAxis::collocation, "50").collocation, 50u);
    EXPECT_THROW(apply_sweep_value(base, SweepAxis::gamma, "-1"), std::invalid_argument);
    EXPECT_THROW(apply_sweep_value(base, SweepAxis::collocation, "5.5"), std::invalid_argument);
}

TEST(Bench, MeanAndStandardError) {
    const auto [m, s] = mean_stderr({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m, 2.5);
    EXPECT_NEAR(s, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(mean_stderr({7.0}).second, 0.0);
    EXPECT_TRUE(std::isnan(mean_stderr({}).first));
}

TEST(Bench, SmallSweepIsDeterministic) {
    BenchmarkCase c = builtin("single-eq");
    TrainConfig cfg;
    cfg.hidden = {8};
    cfg.collocation = 50;
    cfg.optimizer.max_iters = 100;
    const SweepReport a = sweep(c, cfg, SweepAxis::gamma, {"0.01", "1"}, 2, 1);
    const SweepReport b = sweep(c, cfg, SweepAxis::gamma, {"0.01", "1"}, 2, 2);
    ASSERT_EQ(a.cells.size(), 2u);
    EXPECT_EQ(a.seeds, (std::vector<std::uint64_t>{1234, 1235}));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.cells[i].residuals, b.cells[i].residuals);
}

TEST(Bench, CurveSamplesSkipThePole) {
    const System s = parse_system("vars: x\n1/x = 0\ndomain: x in [-1, 1]\n");
    const auto pts = curve_samples(s, 5);
    EXPECT_EQ(pts.size(), 4u);
}
