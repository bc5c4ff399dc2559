#include "hann/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hann;

namespace {

std::shared_ptr<const System> make(const char* src) { return std::make_shared<const System>(parse_system(src)); }

const char* kAbs = "vars: x, y\nx^2 - y^2 = 0\n1 - |x - y| = 0\ndomain: x in [-15, 15]\ndomain: y in [-15, 15]\n";

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

// Inner runner returning a scripted residual sequence; x_final encodes the call index.
struct Scripted {
    std::vector<double> residuals;
    double tail;
    int calls = 0;
    std::vector<Vector> anchors;
    std::vector<std::uint64_t> seeds;
    SolveResult operator()(const Vector& anchor, std::uint64_t seed) {
        anchors.push_back(anchor);
        seeds.push_back(seed);
        SolveResult r;
        const auto k = static_cast<std::size_t>(calls++);
        r.residual = k < residuals.size() ? residuals[k] : tail;
        r.x_final = Vector::Constant(1, static_cast<double>(k));
        r.status = SolveStatus::converged;
        return r;
    }
};

const System kLine = parse_system("vars: x\nx = 0\n");

}  // namespace

// ---- hann2 counters --------------------------------------------------------

TEST(Hann2, ConstantResidualKeepsAcceptingUntilBudget) {
    // 5 ≤ 1000 accepts, then 5 ≤ 5 accepts again every time: the stall
    // counter never grows, so the loop runs num_t = 0 … N_m.
    Scripted inner{{}, 5.0};
    const SolveResult r = hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 30, 100);
    EXPECT_EQ(inner.calls, 31);
    EXPECT_EQ(r.stage_residuals.size(), 31u);
}

TEST(Hann2, StrictlyWorseResidualsStopAfterElevenStalls) {
    // 5 accepted, then 6, 7, … never improve: stall counter reaches 11 after
    // eleven more calls and the loop stops.
    Scripted inner{{}, 0.0};
    for (int k = 0; k < 100; ++k) inner.residuals.push_back(5.0 + k);
    const SolveResult r = hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 50, 100);
    EXPECT_EQ(inner.calls, 12);
    EXPECT_EQ(r.x_final[0], 0.0);  // the first call's point
    // every call after the accept reuses the accepted point as anchor
    for (int k = 1; k < inner.calls; ++k) EXPECT_EQ(inner.anchors[static_cast<std::size_t>(k)][0], 0.0);
}

TEST(Hann2, StallCounterResetsOnImprovement) {
    Scripted inner{{5, 6, 6, 6, 4, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9}, 9.0};
    hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 50, 0);
    // accept at calls 0 and 4, then 11 stalls
    EXPECT_EQ(inner.calls, 5 + 11);
}

TEST(Hann2, FirstAboveInitialBestIsNeverAccepted) {
    Scripted inner{{}, 2000.0};
    const SolveResult r = hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 50, 0);
    EXPECT_EQ(inner.calls, 11);
    EXPECT_EQ(r.status, SolveStatus::error);
}

TEST(Hann2, SeedsAdvanceAndFirstResultIsReused) {
    Scripted inner{{}, 1.0};
    SolveResult first;
    first.status = SolveStatus::converged;
    first.residual = 3.0;
    first.x_final = Vector::Constant(1, 42.0);
    hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 3, 10, &first);
    ASSERT_EQ(inner.calls, 3);
    EXPECT_EQ(inner.seeds, (std::vector<std::uint64_t>{11, 12, 13}));
    EXPECT_EQ(inner.anchors[0][0], 42.0);
}

TEST(Hann2, InnerFailuresCountAsStalls) {
    int calls = 0;
    auto inner = [&](const Vector&, std::uint64_t) -> SolveResult {
        if (++calls > 1) throw std::runtime_error("boom");
        SolveResult r;
        r.status = SolveStatus::converged;
        r.residual = 1.0;
        r.x_final = Vector::Constant(1, 0.5);
        return r;
    };
    const SolveResult r = hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 50, 0);
    EXPECT_EQ(calls, 12);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.x_final[0], 0.5);
}

TEST(Hann2, RejectsBadInput) {
    Scripted inner{{}, 1.0};
    EXPECT_THROW(hann2_loop(inner, kLine, Vector::Constant(1, 3.0), 0, 0), std::invalid_argument);
    const System s = parse_system("vars: x\n1/x = 0\n");
    EXPECT_THROW(hann2_loop(inner, s, Vector::Zero(1), 5, 0), InadmissibleAnchor);
}

// ---- hann1 / hann2 on real systems -----------------------------------------

TEST(Hann1, LinearEquationFindsZero) {
    const SolveResult r = hann1(make("vars: x\nx = 0\n"), Vector::Constant(1, 0.3), TrainConfig{});
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LE(std::abs(r.x_final[0]), 1e-3);
    EXPECT_DOUBLE_EQ(r.residual, std::abs(r.x_final[0]));
    ASSERT_TRUE(r.network.has_value());
    EXPECT_EQ(forward(*r.network, 1.0)[0], r.x_final[0]);
}

TEST(Hann1, SingleEquationFromMinusFifteen) {
    const auto sys = make("vars: x\n1/x - sin(x) + 1 = 0\n");
    const SolveResult r = hann1(sys, Vector::Constant(1, -15.0), TrainConfig{});
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LE(r.residual, 1e-2);
    EXPECT_NEAR(r.x_final[0], -17.6177, 5e-2);
}

TEST(Hann1, AbsSystemFromOrigin) {
    TrainConfig cfg;
    cfg.seed = 1;
    const SolveResult r = hann1(make(kAbs), Vector::Zero(2), cfg);
    ASSERT_TRUE(r.ok()) << r.message;
    const double d = std::min(max_norm_distance(r.x_final, v2(0.5, -0.5)), max_norm_distance(r.x_final, v2(-0.5, 0.5)));
    EXPECT_LE(d, 5e-2);
}

TEST(Hann1, InadmissibleAnchorThrows) {
    EXPECT_THROW(hann1(make("vars: x\n1/x - sin(x) + 1 = 0\n"), Vector::Zero(1), TrainConfig{}), InadmissibleAnchor);
}

TEST(Hann1, SameSeedSameResult) {
    TrainConfig cfg;
    cfg.hidden = {10, 10};
    cfg.collocation = 100;
    cfg.optimizer.max_iters = 300;
    const auto sys = make(kAbs);
    const SolveResult a = hann1(sys, v2(1.0, 2.0), cfg);
    const SolveResult b = hann1(sys, v2(1.0, 2.0), cfg);
    EXPECT_EQ(a.x_final, b.x_final);
    EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Hann2, NeverWorseThanTheSharedFirstRun) {
    TrainConfig cfg;
    cfg.hidden = {10, 10};
    cfg.collocation = 100;
    cfg.optimizer.max_iters = 300;
    const auto sys = make(kAbs);
    for (const Vector& x0 : {v2(3.0, -7.0), v2(-10.0, 4.0)}) {
        const SolveResult first = hann1(sys, x0, cfg);
        const SolveResult second = hann2(sys, x0, 3, cfg, &first);
        EXPECT_LE(second.residual, first.residual);
        // iteration 0 without a precomputed run reproduces the same HANN-1 run
        const SolveResult again = hann2(sys, x0, 3, cfg);
        EXPECT_EQ(again.stage_residuals.front(), first.residual);
    }
}

// ---- Newton -----------------------------------------------------------------

TEST(Newton, ExactRootOfLinearSystemTakesNoSteps) {
    const System s = parse_system("vars: x, y\nx + y - 3 = 0\nx - y - 1 = 0\n");
    const SolveResult r = newton_refine(s, v2(2.0, 1.0));
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.x_final, v2(2.0, 1.0));
    EXPECT_EQ(r.status, SolveStatus::converged);
}

TEST(Newton, QuadraticConvergenceOnCircle) {
    const System s = parse_system("x^2 + y^2 = 1\nx = y\n");
    const SolveResult r = newton_refine(s, v2(1.0, 0.5));
    EXPECT_EQ(r.status, SolveStatus::converged);
    EXPECT_NEAR(r.x_final[0], std::sqrt(0.5), 1e-12);
    EXPECT_LE(r.iterations, 8);
    for (std::size_t i = 1; i < r.loss_history.size(); ++i) EXPECT_LT(r.loss_history[i], r.loss_history[i - 1]);
}

TEST(Newton, AbsKinkDoesNotDiverge) {
    const System s = parse_system(kAbs);
    const Vector p = v2(0.49, -0.51);
    const double r0 = residual_l1(s, p);
    const SolveResult r = newton_refine(s, p);
    EXPECT_LE(r.residual, r0);
    EXPECT_TRUE(r.x_final.allFinite());
}

TEST(Newton, SingularJacobianReturnsInput) {
    const System s = parse_system("vars: x\nx^2 = 0\n");
    const SolveResult r = newton_refine(s, Vector::Zero(1));
    EXPECT_EQ(r.status, SolveStatus::converged);  // already a root
    const System t = parse_system("vars: x, y\nx + y - 1 = 0\n2*x + 2*y - 5 = 0\n");
    const SolveResult u = newton_refine(t, v2(0.0, 0.0));
    EXPECT_EQ(u.status, SolveStatus::error);
    EXPECT_EQ(u.x_final, v2(0.0, 0.0));
}

TEST(Newton, UndefinedTrialStepsAreDamped) {
    // ln x − 1 = 0 from x = 0.05: the full Newton step overshoots into x < 0
    const System s = parse_system("vars: x\nln(x) - 1 = 0\n");
    const SolveResult r = newton_refine(s, Vector::Constant(1, 0.05));
    EXPECT_NEAR(r.x_final[0], std::exp(1.0), 1e-9);
}

TEST(Newton, Interval10CaseTwo) {
    const BenchmarkCase c = builtin("interval10");
    Vector p(10);
    for (int i = 0; i < 10; ++i) p[i] = bench_data::kInterval10Table[1][static_cast<std::size_t>(i)];
    const SolveResult r = newton_refine(*c.system, p, 5, 1e-9);
    EXPECT_LE(r.residual, 1e-9);
    EXPECT_LE(r.iterations, 5);
}

TEST(Newton, NeverIncreasesResidual) {
    const BenchmarkCase c = builtin("trig-system");
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const Vector p = v2(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const SolveResult r = newton_refine(*c.system, p, 20);
        EXPECT_LE(r.residual, residual_l1(*c.system, p));
    }
}

// ---- dedup ------------------------------------------------------------------

TEST(Dedup, ScalarExample) {
    const PointList pts{Vector::Constant(1, 0.1), Vector::Constant(1, 0.11), Vector::Constant(1, 0.5)};
    const auto cl = dedup(pts, 0.05);
    ASSERT_EQ(cl.size(), 2u);
    EXPECT_EQ(cl[0].members, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(cl[1].members, (std::vector<std::size_t>{2}));
}

TEST(Dedup, TinyThresholdKeepsEveryPoint) {
    const PointList pts{v2(0, 0), v2(1, 0), v2(0, 1), v2(1, 1)};
    EXPECT_EQ(dedup(pts, 0.5).size(), 4u);
}

TEST(Dedup, RepresentativeIsLowestResidual) {
    const PointList pts{Vector::Constant(1, 1.0), Vector::Constant(1, 1.02), Vector::Constant(1, 0.99)};
    const auto cl = dedup(pts, {3.0, 1.0, 2.0}, 0.05);
    ASSERT_EQ(cl.size(), 1u);
    EXPECT_EQ(cl[0].representative_index, 1u);
    EXPECT_EQ(cl[0].min_residual, 1.0);
}

TEST(Dedup, RepresentativesEndPairwiseApartAndMembershipIsAPartition) {
    Rng rng(1);
    PointList pts;
    std::vector<double> res;
    for (int i = 0; i < 300; ++i) {
        pts.push_back(v2(rng.uniform(0, 1), rng.uniform(0, 1)));
        res.push_back(rng.uniform());
    }
    const auto cl = dedup(pts, res, 0.1);
    std::vector<int> seen(pts.size(), 0);
    for (std::size_t a = 0; a < cl.size(); ++a) {
        for (std::size_t m : cl[a].members) ++seen[m];
        for (std::size_t b = a + 1; b < cl.size(); ++b)
            EXPECT_GT(max_norm_distance(cl[a].representative, cl[b].representative), 0.1);
    }
    for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Dedup, RejectsNonPositiveThreshold) { EXPECT_THROW(dedup({v2(0, 0)}, 0.0), std::invalid_argument); }

// ---- multistart -------------------------------------------------------------

TEST(Multistart, SingleInitialGivesOneCluster) {
    TrainConfig cfg;
    cfg.hidden = {10, 10};
    cfg.collocation = 100;
    cfg.optimizer.max_iters = 300;
    const SolutionSet set = multistart(make(kAbs), {v2(2.0, 1.0)}, cfg, MultistartOptions{});
    ASSERT_EQ(set.runs.size(), 1u);
    EXPECT_EQ(set.clusters.size(), 1u);
}

TEST(Multistart, SkipsInadmissibleAnchorsWithWarning) {
    TrainConfig cfg;
    cfg.hidden = {5};
    cfg.collocation = 20;
    cfg.optimizer.max_iters = 50;
    const auto sys = make("vars: x\n1/x - sin(x) + 1 = 0\n");
    const SolutionSet set =
        multistart(sys, {Vector::Constant(1, -3.0), Vector::Zero(1), Vector::Constant(1, -9.0)}, cfg, MultistartOptions{});
    EXPECT_EQ(set.runs.size(), 2u);
    EXPECT_EQ(set.anchor_index, (std::vector<std::size_t>{0, 2}));
    ASSERT_EQ(set.warnings.size(), 1u);
}

TEST(Multistart, ResultsIndependentOfJobCount) {
    TrainConfig cfg;
    cfg.hidden = {8};
    cfg.collocation = 50;
    cfg.optimizer.max_iters = 100;
    const auto sys = make(kAbs);
    const PointList init = midpoint_grid(sys->domain, {3, 3});
    MultistartOptions one, many;
    one.jobs = 1;
    many.jobs = 4;
    const SolutionSet a = multistart(sys, init, cfg, one);
    const SolutionSet b = multistart(sys, init, cfg, many);
    ASSERT_EQ(a.runs.size(), b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].x_final, b.runs[i].x_final);
}

TEST(Multistart, RefinePolishesTheHann1Point) {
    TrainConfig cfg;
    cfg.hidden = {10, 10};
    cfg.collocation = 100;
    cfg.optimizer.max_iters = 500;
    MultistartOptions opt;
    opt.algorithm = Algorithm::hann1_refine;
    const auto sys = make("x^2 + y^2 = 1\nx = y\n");
    const SolutionSet set = multistart(sys, {v2(1.5, 0.5)}, cfg, opt);
    ASSERT_EQ(set.runs.size(), 1u);
    EXPECT_LE(set.runs[0].residual, set.stage1[0].residual);
    EXPECT_LE(set.runs[0].residual, 1e-10);
}
