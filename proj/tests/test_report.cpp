#include "hann/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hann;

namespace {

SolutionSet small_set() {
    SolutionSet set;
    set.threshold = 0.1;
    SolveResult a;
    a.initial_value = Vector::Constant(1, -15.0);
    a.x_final = Vector::Constant(1, -17.6);
    a.residual = 1e-3;
    a.status = SolveStatus::converged;
    a.seed = 7;
    a.iterations = 12;
    a.loss_history = {1.0, 0.5};
    a.wall_time = 0.25;
    SolveResult b = a;
    b.initial_value = Vector::Constant(1, -1.0);
    b.x_final = Vector::Constant(1, std::numeric_limits<double>::quiet_NaN());
    b.residual = std::numeric_limits<double>::infinity();
    b.status = SolveStatus::error;
    b.message = "non-finite network output";
    set.runs = {a, b};
    set.stage1 = {a, b};
    set.stage1[0].residual = 2e-3;
    set.anchor_index = {0, 2};
    set.clustered = {0};
    Cluster c;
    c.representative = a.x_final;
    c.members = {0};
    c.min_residual = a.residual;
    set.clusters = {c};
    set.warnings = {"anchor 1 skipped: inadmissible anchor"};
    return set;
}

}  // namespace

TEST(Report, NonFiniteNumbersBecomeNull) {
    const SolutionSet set = small_set();
    const Json j = to_json(set.runs[1]);
    EXPECT_TRUE(j["residual"].is_null());
    EXPECT_TRUE(j["x_final"][0].is_null());
    EXPECT_EQ(j["status"], "error");
    EXPECT_EQ(j["message"], "non-finite network output");
    EXPECT_TRUE(j.contains("wall_time"));
    EXPECT_FALSE(to_json(set.runs[1], false).contains("wall_time"));
}

TEST(Report, SummaryHasHeaderAndNoTiming) {
    TrainConfig cfg;
    const Json h = artifact_header("solve", to_json(cfg));
    const Json s = summarize(h, small_set(), 1);
    EXPECT_EQ(s["tool"], "hann");
    EXPECT_EQ(s["version"], kVersion);
    EXPECT_EQ(s["config"]["seed"], 1234);
    EXPECT_EQ(s["config"]["hidden"], (std::vector<int>{40, 40, 40, 40}));
    EXPECT_EQ(s["runs"], 2);
    EXPECT_EQ(s["errors"], 1);
    EXPECT_EQ(s["cluster_count"], 1);
    EXPECT_EQ(s["counted_clusters"], 1);
    EXPECT_EQ(s.dump().find("wall_time"), std::string::npos);
    EXPECT_EQ(s.dump(), summarize(h, small_set(), 1).dump());
}

TEST(Report, MedianOfEvenAndOddLists) {
    EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_TRUE(std::isnan(median({})));
}

TEST(Report, JsonLinesHeaderThenRuns) {
    std::ostringstream os;
    write_jsonl(os, artifact_header("solve", Json::object()), small_set());
    std::istringstream in(os.str());
    std::string line;
    std::vector<Json> recs;
    while (std::getline(in, line)) recs.push_back(Json::parse(line));
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0]["record"], "header");
    EXPECT_EQ(recs[1]["record"], "run");
    EXPECT_EQ(recs[2]["anchor_index"], 2);
    EXPECT_EQ(recs[1]["stage1_residual"], 2e-3);
    EXPECT_FALSE(recs[2].contains("stage1_residual"));
}

TEST(Report, RunsCsvLayout) {
    const System sys = parse_system("vars: x\n1/x - sin(x) + 1 = 0\n");
    std::ostringstream os;
    write_runs_csv(os, small_set(), sys);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "run,status,x0_x,x,residual,stage1_residual");
    EXPECT_NE(s.find("\n0,converged,-15,-17.6,0.001,0.002\n"), std::string::npos);
    EXPECT_NE(s.find("\n1,error,-1,,,\n"), std::string::npos);
}

TEST(Report, SweepCsvLeavesMissingCellsEmpty) {
    SweepReport rep;
    rep.axis = SweepAxis::gamma;
    SweepCell ok;
    ok.value = "0.01";
    ok.residuals = {1e-4};
    std::tie(ok.mean, ok.stderr_) = mean_stderr(ok.residuals);
    ok.mean_time = 2.0;
    SweepCell missing;
    missing.value = "5";
    missing.failures = 3;
    rep.cells = {ok, missing};
    std::ostringstream os;
    write_sweep_csv(os, rep);
    EXPECT_EQ(os.str(), "gamma,mean_residual,stderr,mean_time,successes,failures\n0.01,1e-04,0,2,1,0\n5,,,,0,3\n");
    const Json j = to_json(rep);
    EXPECT_TRUE(j["cells"][1]["mean_residual"].is_null());
    EXPECT_FALSE(j["cells"][0].contains("mean_time"));
}
