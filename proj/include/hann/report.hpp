/**
 * @file report.hpp
 * @brief JSON-lines run logs, summary JSON and CSV mirrors.
 *
 * Summaries carry no timing or wall-clock data, so identical config and
 * seed give byte-identical files. Timing lives in the JSON-lines records.
 * Non-finite numbers are written as null.
 */
#pragma once

#include "hann/bench.hpp"
#include "hann/version.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>

namespace hann {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace detail

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::lbfgs ? "lbfgs" : "adam"; }

inline Json to_json(const OptimizerConfig& o) {
    Json j;
    j["kind"] = to_string(o.kind);
    j["max_iters"] = o.max_iters;
    j["grad_tol"] = o.grad_tol;
    j["loss_tol"] = o.loss_tol;
    if (o.kind == OptimizerKind::lbfgs) {
        j["memory"] = o.memory;
        j["c1"] = o.c1;
        j["c2"] = o.c2;
        j["max_line_search"] = o.max_line_search;
    } else {
        j["step"] = o.adam_step;
        j["beta1"] = o.beta1;
        j["beta2"] = o.beta2;
        j["epsilon"] = o.epsilon;
    }
    return j;
}

inline Json to_json(const TrainConfig& c) {
    Json j;
    j["gamma"] = c.gamma;
    j["collocation"] = c.collocation;
    j["hidden"] = c.hidden;
    j["weight_iv"] = c.weight_iv;
    j["weight_h"] = c.weight_h;
    j["seed"] = c.seed;
    j["optimizer"] = to_json(c.optimizer);
    return j;
}

/// One raw run. `with_timing` adds wall_time.
inline Json to_json(const SolveResult& r, bool with_timing = true) {
    Json j;
    j["initial_value"] = detail::vector_json(r.initial_value);
    j["x_final"] = detail::vector_json(r.x_final);
    j["residual"] = detail::number(r.residual);
    j["status"] = to_string(r.status);
    j["seed"] = r.seed;
    j["iterations"] = r.iterations;
    j["final_loss"] = r.loss_history.empty() ? Json(nullptr) : detail::number(r.loss_history.back());
    if (!r.stage_residuals.empty()) {
        Json s = Json::array();
        for (double v : r.stage_residuals) s.push_back(detail::number(v));
        j["stage_residuals"] = s;
    }
    if (!r.message.empty()) j["message"] = r.message;
    if (with_timing) j["wall_time"] = r.wall_time;
    return j;
}

inline Json to_json(const Cluster& c) {
    Json j;
    j["representative"] = detail::vector_json(c.representative);
    j["representative_run"] = c.representative_index;
    j["min_residual"] = detail::number(c.min_residual);
    j["members"] = c.members;
    return j;
}

/// Header echoed into every artifact: tool, version, command, config.
inline Json artifact_header(const std::string& command, const Json& config) {
    Json j;
    j["tool"] = "hann";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    return j;
}

/// JSON-lines log: a header record, then one record per raw run.
inline void write_jsonl(std::ostream& os, const Json& header, const SolutionSet& set) {
    Json h = header;
    h["record"] = "header";
    os << h.dump() << '\n';
    for (std::size_t i = 0; i < set.runs.size(); ++i) {
        Json r = to_json(set.runs[i]);
        r["record"] = "run";
        r["run"] = i;
        r["anchor_index"] = set.anchor_index[i];
        if (!set.stage1.empty() && set.stage1[i].residual != set.runs[i].residual)
            r["stage1_residual"] = detail::number(set.stage1[i].residual);
        os << r.dump() << '\n';
    }
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Deterministic summary of a multi-start run.
inline Json summarize(const Json& header, const SolutionSet& set, std::optional<std::size_t> counted = std::nullopt) {
    Json j = header;
    j["record"] = "summary";
    j["threshold"] = set.threshold;
    j["runs"] = set.runs.size();
    std::size_t errors = 0;
    std::vector<double> finals, firsts;
    for (std::size_t i = 0; i < set.runs.size(); ++i) {
        if (!set.runs[i].ok()) ++errors;
        finals.push_back(set.runs[i].residual);
        if (!set.stage1.empty()) firsts.push_back(set.stage1[i].residual);
    }
    j["errors"] = errors;
    j["cluster_count"] = set.clusters.size();
    if (counted) j["counted_clusters"] = *counted;
    j["median_residual"] = detail::number(median(finals));
    if (!firsts.empty()) j["median_stage1_residual"] = detail::number(median(firsts));
    Json cl = Json::array();
    for (const Cluster& c : set.clusters) cl.push_back(to_json(c));
    j["clusters"] = cl;
    j["warnings"] = set.warnings;
    return j;
}

/// initial value → final value → residual, one row per run.
inline void write_runs_csv(std::ostream& os, const SolutionSet& set, const System& sys) {
    os << "run,status";
    for (const std::string& v : sys.variables) os << ",x0_" << v;
    for (const std::string& v : sys.variables) os << ',' << v;
    os << ",residual,stage1_residual\n";
    for (std::size_t i = 0; i < set.runs.size(); ++i) {
        const SolveResult& r = set.runs[i];
        os << i << ',' << to_string(r.status);
        for (Eigen::Index k = 0; k < r.initial_value.size(); ++k) os << ',' << detail::csv_number(r.initial_value[k]);
        for (Eigen::Index k = 0; k < r.x_final.size(); ++k) os << ',' << detail::csv_number(r.x_final[k]);
        os << ',' << detail::csv_number(r.residual) << ','
           << (set.stage1.empty() ? std::string() : detail::csv_number(set.stage1[i].residual)) << '\n';
    }
}

inline Json to_json(const SweepReport& rep, bool with_timing = false) {
    Json j;
    j["case"] = rep.case_name;
    j["axis"] = to_string(rep.axis);
    j["trials"] = rep.trials;
    j["seeds"] = rep.seeds;
    Json cells = Json::array();
    for (const SweepCell& c : rep.cells) {
        Json cj;
        cj["value"] = c.value;
        cj["mean_residual"] = detail::number(c.mean);
        cj["stderr"] = detail::number(c.stderr_);
        cj["failures"] = c.failures;
        Json rs = Json::array();
        for (double r : c.residuals) rs.push_back(detail::number(r));
        cj["residuals"] = rs;
        if (with_timing) cj["mean_time"] = detail::number(c.mean_time);
        cells.push_back(cj);
    }
    j["cells"] = cells;
    return j;
}

/// One row per swept value; missing cells leave the numbers empty.
inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
    os << to_string(rep.axis) << ",mean_residual,stderr,mean_time,successes,failures\n";
    for (const SweepCell& c : rep.cells)
        os << c.value << ',' << detail::csv_number(c.mean) << ',' << detail::csv_number(c.stderr_) << ','
           << detail::csv_number(c.mean_time) << ',' << c.residuals.size() << ',' << c.failures << '\n';
}

inline Json to_json(const ReferenceReport& rep) {
    Json j;
    j["case"] = rep.case_name;
    j["match_radius"] = rep.match_radius;
    Json rows = Json::array();
    for (const ReferenceRow& r : rep.rows) {
        Json rj;
        rj["cluster"] = r.cluster;
        rj["point"] = detail::vector_json(r.point);
        rj["residual"] = detail::number(r.residual);
        if (r.nearest_root) {
            rj["nearest_root"] = detail::vector_json(*r.nearest_root);
            rj["root_distance"] = detail::number(r.root_distance);
        }
        Json m = Json::array();
        for (const PublishedPoint& p : r.matches) {
            Json pj;
            pj["method"] = p.method;
            pj["point"] = detail::vector_json(p.point);
            if (p.residuals.size() > 0) pj["residuals"] = detail::vector_json(p.residuals);
            if (std::isfinite(p.total_residual)) pj["residual"] = p.total_residual;
            m.push_back(pj);
        }
        rj["published"] = m;
        rows.push_back(rj);
    }
    j["rows"] = rows;
    return j;
}

/// Summary of a trajectory: anchors, max |f| and max errors per component.
inline Json summarize(const Json& header, const Trajectory& tr, const System& sys) {
    Json j = header;
    j["record"] = "summary";
    j["anchors"] = detail::vector_json(tr.anchors);
    j["grid"] = tr.t.size();
    j["iterations"] = tr.history.iterations;
    j["optimizer_status"] = to_string(tr.history.status);
    j["final_loss"] = tr.history.loss.empty() ? Json(nullptr) : detail::number(tr.history.loss.back());
    j["max_residual_l1"] = detail::number(*std::max_element(tr.residual_l1.begin(), tr.residual_l1.end()));
    if (tr.abs_error) {
        Json e;
        for (std::size_t i = 0; i < sys.variables.size(); ++i)
            e[sys.variables[i]] = detail::number(tr.max_abs_error(static_cast<Eigen::Index>(i)));
        j["max_abs_error"] = e;
    }
    return j;
}

}  // namespace hann
