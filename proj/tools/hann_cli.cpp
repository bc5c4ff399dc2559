// hann: command-line front end.
//
//   hann solve --file sys.txt [--algo hann1|hann2|hann1+refine] [--x0 a,b | --init SCHEME ...]
//   hann bench NAME | --list
//   hann sweep NAME --axis gamma|collocation|architecture --values v1,v2,... [--trials N]
//   hann refine --file sys.txt --x0 a,b
//   hann time-varying (--file sys.txt | --builtin time-varying) [--hint ... | --anchors ...]
//   hann diag --file sys.txt --x0 a,b [--snapshot net.txt]
//
// Exit status: 0 on completion (individual failed runs included), 2 on
// usage, configuration, file or parse errors, 1 on anything unexpected.

#include "hann/hann.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace hann;

/// Configuration or input problem; maps to exit status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    double gamma = 0.01;
    std::size_t collocation = 1000;
    std::string hidden = "4x40";
    double weight_iv = 1.0;
    double weight_h = 1.0;
    std::string optimizer = "lbfgs";
    int max_iters = 5000;
    double grad_tol = 1e-9;
    double loss_tol = 1e-12;
    int memory = 10;
    double adam_step = 1e-3;
    unsigned jobs = 0;
    std::string out;
    bool plot_data = false;

    // which config fields were given explicitly (bench overrides)
    CLI::App* app = nullptr;
    bool given(const char* flag) const { return app && app->count(flag) > 0; }
};

void add_common(CLI::App* sub, CommonFlags& f, bool training = true) {
    f.app = sub;
    sub->add_option("--seed", f.seed, "Base seed (falls back to $HANN_SEED, then 1234)");
    sub->add_option("--jobs", f.jobs, "Worker threads for independent runs (0 = all cores)");
    sub->add_option("--out", f.out, "Output prefix; writes PREFIX.summary.json and friends");
    sub->add_flag("--emit-plot-data", f.plot_data, "Also write the data behind the figures");
    if (!training) return;
    sub->add_option("--gamma", f.gamma, "Convergence-control parameter")->check(CLI::PositiveNumber);
    sub->add_option("--collocation,--Nf", f.collocation, "Collocation points")->check(CLI::PositiveNumber);
    sub->add_option("--hidden", f.hidden, "Hidden layers: LxN or n1,n2,...");
    sub->add_option("--weight-iv", f.weight_iv, "Weight of the initial-value term")->check(CLI::NonNegativeNumber);
    sub->add_option("--weight-h", f.weight_h, "Weight of the homotopy term")->check(CLI::NonNegativeNumber);
    sub->add_option("--optimizer", f.optimizer, "lbfgs or adam")->check(CLI::IsMember({"lbfgs", "adam"}));
    sub->add_option("--max-iters", f.max_iters, "Optimizer iteration budget")->check(CLI::NonNegativeNumber);
    sub->add_option("--grad-tol", f.grad_tol, "Gradient tolerance (max-norm)");
    sub->add_option("--loss-tol", f.loss_tol, "Relative loss-change tolerance");
    sub->add_option("--memory", f.memory, "L-BFGS memory")->check(CLI::PositiveNumber);
    sub->add_option("--adam-step", f.adam_step, "Adam step size")->check(CLI::PositiveNumber);
}

std::uint64_t resolve_seed(const CommonFlags& f, std::uint64_t fallback = 1234) {
    if (f.seed) return *f.seed;
    if (const char* env = std::getenv("HANN_SEED")) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("HANN_SEED is not an unsigned integer");
        return v;
    }
    return fallback;
}

/// Flags layered over `base`; in bench mode only explicitly given flags win.
TrainConfig make_config(const CommonFlags& f, TrainConfig base, bool only_given) {
    auto take = [&](const char* flag) { return !only_given || f.given(flag); };
    if (take("--gamma")) base.gamma = f.gamma;
    if (take("--collocation")) base.collocation = f.collocation;
    if (take("--hidden")) base.hidden = parse_architecture(f.hidden);
    if (take("--weight-iv")) base.weight_iv = f.weight_iv;
    if (take("--weight-h")) base.weight_h = f.weight_h;
    if (take("--optimizer")) base.optimizer.kind = f.optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::lbfgs;
    if (take("--max-iters")) base.optimizer.max_iters = f.max_iters;
    if (take("--grad-tol")) base.optimizer.grad_tol = f.grad_tol;
    if (take("--loss-tol")) base.optimizer.loss_tol = f.loss_tol;
    if (take("--memory")) base.optimizer.memory = f.memory;
    if (take("--adam-step")) base.optimizer.adam_step = f.adam_step;
    base.seed = resolve_seed(f, base.seed);
    base.validate();
    return base;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::shared_ptr<const System> load_system(const std::string& path) {
    try {
        return std::make_shared<const System>(parse_system(read_file(path)));
    } catch (const ParseError& e) {
        throw UsageError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.what());
    }
}

Vector parse_point(const std::string& text, std::size_t dim, const char* what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        double d = 0.0;
        const auto b = tok.find_first_not_of(' ');
        const auto e = tok.find_last_not_of(' ');
        if (b == std::string::npos) throw UsageError(std::string("empty component in ") + what);
        const std::string_view s(tok.data() + b, e - b + 1);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec != std::errc() || p != s.data() + s.size()) throw UsageError(std::string("bad number in ") + what + ": " + tok);
        v.push_back(d);
    }
    if (v.size() != dim)
        throw UsageError(std::string(what) + " needs " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<int> parse_ints(const std::string& text, std::size_t dim, const char* what) {
    const Vector v = parse_point(text, text.find(',') == std::string::npos ? 1 : dim, what);
    std::vector<int> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < 1 || v[i] != std::floor(v[i])) throw UsageError(std::string(what) + " must be positive integers");
        out.push_back(static_cast<int>(v[i]));
    }
    if (out.size() == 1 && dim > 1) out.assign(dim, out.front());
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path);
    os << text;
}

template <class Fn>
void write_with(const std::string& path, Fn&& fn) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path);
    fn(os);
}

void emit_loss_csv(const std::string& path, const SolveResult& r) {
    write_with(path, [&](std::ostream& os) {
        os << "iteration,loss,stage\n";
        std::size_t stage = 0;
        for (std::size_t i = 0; i < r.loss_history.size(); ++i) {
            while (stage + 1 < r.stage_offsets.size() && r.stage_offsets[stage + 1] <= i) ++stage;
            os << i << ',' << detail::format_double(r.loss_history[i]) << ',' << stage << '\n';
        }
    });
}

void emit_path_csv(const std::string& path, const NetworkParams& net, const System& sys, std::size_t points = 201) {
    write_with(path, [&](std::ostream& os) {
        os << "t";
        for (const auto& v : sys.variables) os << ',' << v;
        os << '\n';
        for (std::size_t k = 0; k < points; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(points - 1);
            const Vector x = forward(net, t);
            os << detail::format_double(t);
            for (Eigen::Index i = 0; i < x.size(); ++i) os << ',' << detail::format_double(x[i]);
            os << '\n';
        }
    });
}

/// Writes (or prints) the artifacts of a multi-start run.
void emit_solution_set(const CommonFlags& f, const Json& header, const SolutionSet& set, const System& sys,
                       std::optional<std::size_t> counted = std::nullopt) {
    const Json summary = summarize(header, set, counted);
    if (f.out.empty()) {
        std::cout << summary.dump(2) << '\n';
    } else {
        write_text(f.out + ".summary.json", summary.dump(2) + "\n");
        write_with(f.out + ".jsonl", [&](std::ostream& os) { write_jsonl(os, header, set); });
        write_with(f.out + ".csv", [&](std::ostream& os) { write_runs_csv(os, set, sys); });
    }
    for (const std::string& w : set.warnings) std::cerr << "warning: " << w << '\n';
    if (f.plot_data && !f.out.empty()) {
        if (sys.dimension() == 1 && sys.size() == 1)
            write_with(f.out + ".curve.csv", [&](std::ostream& os) {
                os << sys.variables[0] << ",f\n";
                for (const auto& [x, y] : curve_samples(sys))
                    os << detail::format_double(x) << ',' << detail::format_double(y) << '\n';
            });
        if (!set.runs.empty()) {
            emit_loss_csv(f.out + ".loss.csv", set.runs.front());
            if (set.runs.front().network) emit_path_csv(f.out + ".path.csv", *set.runs.front().network, sys);
        }
    }
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "hann1") return Algorithm::hann1;
    if (s == "hann2") return Algorithm::hann2;
    if (s == "hann1+refine") return Algorithm::hann1_refine;
    throw UsageError("unknown algorithm '" + s + "'");
}

// ---- solve -------------------------------------------------------------

struct SolveFlags {
    std::string file;
    std::string algo = "hann1";
    int n_max = 50;
    std::string x0;
    std::string init = "center";
    std::string cells;
    std::size_t count = 0;
    double threshold = 1e-2;
    std::string save_network;
};

int run_solve(const CommonFlags& f, const SolveFlags& s) {
    const auto sys = load_system(s.file);
    const TrainConfig cfg = make_config(f, TrainConfig{}, false);
    MultistartOptions opt;
    opt.algorithm = parse_algorithm(s.algo);
    opt.n_max = s.n_max;
    opt.threshold = s.threshold;
    opt.jobs = f.jobs;
    opt.validate();

    const std::size_t n = sys->dimension();
    PointList initials;
    if (!s.x0.empty()) {
        initials.push_back(parse_point(s.x0, n, "--x0"));
    } else if (s.init == "center") {
        Vector c(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) c[static_cast<Eigen::Index>(i)] = 0.5 * (sys->domain[i].lo + sys->domain[i].hi);
        initials.push_back(c);
    } else if (s.init == "midpoint" || s.init == "random-cell" || s.init == "lattice") {
        if (s.cells.empty()) throw UsageError("--init " + s.init + " needs --cells");
        const std::vector<int> cells = parse_ints(s.cells, n, "--cells");
        if (s.init == "midpoint") initials = midpoint_grid(sys->domain, cells);
        else if (s.init == "random-cell") initials = random_in_cell(sys->domain, cells, cfg.seed);
        else initials = BenchmarkCase::lattice_points(sys->domain, cells);
    } else if (s.init == "lhs") {
        if (s.count < 1) throw UsageError("--init lhs needs --count");
        initials = latin_hypercube(SamplePlan{s.count, sys->domain, cfg.seed, SampleScheme::lhs});
    } else {
        throw UsageError("unknown --init scheme '" + s.init + "'");
    }

    Json config = to_json(cfg);
    config["file"] = s.file;
    config["algorithm"] = to_string(opt.algorithm);
    if (opt.algorithm == Algorithm::hann2) config["n_max"] = opt.n_max;
    config["threshold"] = opt.threshold;
    config["init"] = s.x0.empty() ? s.init : "x0";
    if (!s.cells.empty()) config["cells"] = s.cells;
    if (s.count) config["count"] = s.count;
    if (!s.x0.empty()) config["x0"] = s.x0;

    SolutionSet set;
    try {
        set = multistart(sys, initials, cfg, opt);
    } catch (const InadmissibleAnchor& e) {
        throw UsageError(e.what());
    }
    if (set.runs.empty()) throw UsageError("no admissible initial value");
    emit_solution_set(f, artifact_header("solve", config), set, *sys);
    if (!s.save_network.empty()) {
        if (!set.runs.front().network) throw UsageError("no trained network to save");
        save_snapshot(s.save_network, *set.runs.front().network);
    }
    return 0;
}

// ---- bench -------------------------------------------------------------

struct BenchFlags {
    std::string name;
    bool list = false;
    std::string algo = "hann1";
    int n_max = 50;
    std::optional<double> threshold;
    std::string subintervals;
    bool scaled = false;
    std::size_t grid = kDefaultTrajectoryGrid;
};

int run_time_varying_case(const CommonFlags& f, const BenchmarkCase& c, const TrainConfig& cfg, std::size_t grid,
                          Json config);

int run_bench(const CommonFlags& f, const BenchFlags& b) {
    if (b.list) {
        for (std::string_view n : builtin_names()) std::cout << n << '\n';
        return 0;
    }
    if (b.name.empty()) throw UsageError("bench needs a benchmark name (or --list)");
    BenchmarkCase c;
    try {
        c = builtin(b.name, b.scaled);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const TrainConfig cfg = make_config(f, c.config, true);
    Json config = to_json(cfg);
    config["case"] = c.name;
    if (c.time_varying()) return run_time_varying_case(f, c, cfg, b.grid, config);

    BenchOptions opt;
    opt.algorithm = parse_algorithm(b.algo);
    opt.n_max = b.n_max;
    opt.jobs = f.jobs;
    opt.threshold = b.threshold;
    if (!b.subintervals.empty()) opt.subdivisions = parse_ints(b.subintervals, c.system->dimension(), "--subintervals");
    config["algorithm"] = to_string(opt.algorithm);
    if (opt.algorithm == Algorithm::hann2) config["n_max"] = opt.n_max;
    config["threshold"] = opt.threshold.value_or(c.threshold);
    config["init"] = to_string(c.scheme);
    config["subdivisions"] = opt.subdivisions.value_or(c.subdivisions);
    if (b.scaled) config["scaled"] = true;

    const SolutionSet set = run_case(c, cfg, opt);
    emit_solution_set(f, artifact_header("bench", config), set, *c.system, c.counted_clusters(set));
    if (!f.out.empty()) {
        Json ref = artifact_header("bench", config);
        ref["record"] = "reference";
        ref["reference"] = to_json(compare_reference(c, set));
        write_text(f.out + ".reference.json", ref.dump(2) + "\n");
    }
    return 0;
}

// ---- sweep -------------------------------------------------------------

struct SweepFlags {
    std::string name;
    std::string axis = "gamma";
    std::string values;
    std::size_t trials = 3;
};

int run_sweep(const CommonFlags& f, const SweepFlags& s) {
    BenchmarkCase c;
    try {
        c = builtin(s.name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const TrainConfig cfg = make_config(f, c.config, true);
    const SweepAxis axis = parse_sweep_axis(s.axis);
    std::vector<std::string> values;
    if (s.values.empty()) {
        switch (axis) {
            case SweepAxis::gamma: values = {"5", "1", "0.1", "0.01", "0.001", "0.0001", "0.00001"}; break;
            case SweepAxis::collocation: values = {"5", "50", "500", "1000"}; break;
            case SweepAxis::architecture: values = {"2x10", "2x20", "2x40", "2x80", "4x10", "4x20", "4x40", "4x80",
                                                    "6x10", "6x20", "6x40", "6x80"}; break;
        }
    } else {
        std::stringstream ss(s.values);
        for (std::string tok; std::getline(ss, tok, ',');) values.push_back(tok);
        if (axis == SweepAxis::architecture)
            for (const auto& v : values)
                if (v.find('x') == std::string::npos) throw UsageError("architecture values take the form LxN");
    }
    SweepReport rep;
    try {
        rep = sweep(c, cfg, axis, values, s.trials, f.jobs);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Json config = to_json(cfg);
    config["case"] = c.name;
    config["axis"] = to_string(axis);
    config["values"] = values;
    config["trials"] = s.trials;
    Json summary = artifact_header("sweep", config);
    summary["record"] = "summary";
    summary["sweep"] = to_json(rep);
    if (f.out.empty()) {
        std::cout << summary.dump(2) << '\n';
    } else {
        write_text(f.out + ".summary.json", summary.dump(2) + "\n");
        write_with(f.out + ".csv", [&](std::ostream& os) { write_sweep_csv(os, rep); });
    }
    return 0;
}

// ---- refine ------------------------------------------------------------

struct RefineFlags {
    std::string file;
    std::string x0;
    int max_iters = 50;
    double tol = 1e-12;
    double time = 0.0;
};

int run_refine(const CommonFlags& f, const RefineFlags& r) {
    const auto sys = load_system(r.file);
    const Vector x0 = parse_point(r.x0, sys->dimension(), "--x0");
    const SolveResult res = newton_refine(*sys, x0, r.max_iters, r.tol, r.time);
    Json config;
    config["file"] = r.file;
    config["x0"] = r.x0;
    config["max_iters"] = r.max_iters;
    config["tol"] = r.tol;
    Json summary = artifact_header("refine", config);
    summary["record"] = "summary";
    summary["result"] = to_json(res, false);
    if (f.out.empty()) std::cout << summary.dump(2) << '\n';
    else write_text(f.out + ".summary.json", summary.dump(2) + "\n");
    return 0;
}

// ---- time-varying --------------------------------------------------------

struct TimeVaryingFlags {
    std::string file;
    std::string builtin_name;
    std::string hint;
    std::string anchors;
    std::size_t grid = kDefaultTrajectoryGrid;
};

int emit_trajectory(const CommonFlags& f, const TimeVaryingProblem& p, const Trajectory& tr, const Json& config) {
    const Json summary = summarize(artifact_header("time-varying", config), tr, *p.system);
    if (f.out.empty()) {
        std::cout << summary.dump(2) << '\n';
    } else {
        write_text(f.out + ".summary.json", summary.dump(2) + "\n");
        write_with(f.out + ".trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr, *p.system); });
        if (f.plot_data)
            write_with(f.out + ".loss.csv", [&](std::ostream& os) { write_history_csv(os, tr.history); });
    }
    return 0;
}

int run_time_varying_case(const CommonFlags& f, const BenchmarkCase& c, const TrainConfig& cfg, std::size_t grid,
                          Json config) {
    const TimeVaryingProblem p = time_varying_problem(c);
    config["grid"] = grid;
    const Trajectory tr = solve_time_varying(p, cfg, grid);
    return emit_trajectory(f, p, tr, config);
}

int run_time_varying(const CommonFlags& f, const TimeVaryingFlags& t) {
    if (t.file.empty() == t.builtin_name.empty()) throw UsageError("time-varying needs exactly one of --file, --builtin");
    TrainConfig base;
    Json extra;
    TimeVaryingProblem p;
    if (!t.builtin_name.empty()) {
        BenchmarkCase c;
        try {
            c = builtin(t.builtin_name);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (!c.time_varying()) throw UsageError(c.name + " is not a time-varying case");
        base = c.config;
        p.system = c.system;
        p.exact = c.exact_trajectory;
        if (t.hint.empty() && t.anchors.empty()) p.anchors = compute_anchors(p, c.anchor_hint);
        extra["case"] = c.name;
    } else {
        p.system = load_system(t.file);
        if (!p.system->time) throw UsageError(t.file + " declares no time axis");
        extra["file"] = t.file;
    }
    const TrainConfig cfg = make_config(f, base, !t.builtin_name.empty());
    const std::size_t n = p.system->dimension();
    if (!t.anchors.empty()) {
        p.anchors = parse_point(t.anchors, n, "--anchors");
        extra["anchors"] = t.anchors;
    } else if (!t.hint.empty()) {
        p.anchors = compute_anchors(p, parse_point(t.hint, n, "--hint"), cfg);
        extra["hint"] = t.hint;
    }
    Json config = to_json(cfg);
    config.update(extra);
    config["grid"] = t.grid;
    const Trajectory tr = solve_time_varying(p, cfg, t.grid);
    return emit_trajectory(f, p, tr, config);
}

// ---- diag --------------------------------------------------------------

struct DiagFlags {
    std::string file;
    std::string x0;
    std::string snapshot;
    std::size_t points = 101;
};

int run_diag(const CommonFlags& f, const DiagFlags& d) {
    const auto sys = load_system(d.file);
    const TrainConfig cfg = make_config(f, TrainConfig{}, false);
    const Vector x0 = parse_point(d.x0, sys->dimension(), "--x0");
    NetworkParams net;
    if (!d.snapshot.empty()) {
        net = load_snapshot(d.snapshot);
        if (net.inputs() != 1 || static_cast<std::size_t>(net.outputs()) != sys->dimension())
            throw UsageError("snapshot shape does not match the system");
    } else {
        const SolveResult r = hann1(sys, x0, cfg);
        if (!r.network) throw std::runtime_error("training failed: " + r.message);
        net = *r.network;
    }
    const HomotopyProblem hp(sys, x0, cfg.gamma);
    std::ostringstream csv;
    csv << "t,sigma_min,sigma_max,condition,singular\n";
    Json worst;
    double worst_condition = -1.0;
    for (std::size_t k = 0; k < d.points; ++k) {
        const double t = d.points == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(d.points - 1);
        const Vector x = forward(net, t);
        PathDiagnostic diag;
        try {
            diag = path_diagnostic(hp, x, t);
        } catch (const DomainError&) {
            csv << detail::format_double(t) << ",,,,undefined\n";
            continue;
        }
        csv << detail::format_double(t) << ',' << detail::format_double(diag.sigma_min) << ','
            << detail::format_double(diag.sigma_max) << ','
            << (std::isfinite(diag.condition) ? detail::format_double(diag.condition) : std::string("inf")) << ','
            << (diag.singular ? "true" : "false") << '\n';
        const double c = std::isfinite(diag.condition) ? diag.condition : std::numeric_limits<double>::max();
        if (c > worst_condition) {
            worst_condition = c;
            worst = {{"t", t}, {"condition", detail::number(diag.condition)}, {"singular", diag.singular}};
        }
    }
    Json config = to_json(cfg);
    config["file"] = d.file;
    config["x0"] = d.x0;
    config["points"] = d.points;
    if (!d.snapshot.empty()) config["snapshot"] = d.snapshot;
    Json summary = artifact_header("diag", config);
    summary["record"] = "summary";
    summary["worst"] = worst;
    if (f.out.empty()) {
        std::cout << summary.dump(2) << '\n' << csv.str();
    } else {
        write_text(f.out + ".summary.json", summary.dump(2) + "\n");
        write_text(f.out + ".diag.csv", csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homotopy-auxiliary neural network solver for nonlinear systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hann::kVersion));

    CommonFlags solve_common, bench_common, sweep_common, refine_common, tv_common, diag_common;

    SolveFlags sf;
    auto* solve = app.add_subcommand("solve", "Solve a system from a DSL file");
    add_common(solve, solve_common);
    solve->add_option("--file", sf.file, "Equation file")->required();
    solve->add_option("--algo", sf.algo, "hann1, hann2 or hann1+refine");
    solve->add_option("--Nm", sf.n_max, "HANN-2 outer iterations")->check(CLI::PositiveNumber);
    solve->add_option("--x0", sf.x0, "Single initial value, comma separated");
    solve->add_option("--init", sf.init, "center, midpoint, lattice, random-cell or lhs");
    solve->add_option("--cells", sf.cells, "Cells (or lattice points) per dimension");
    solve->add_option("--count", sf.count, "LHS sample count");
    solve->add_option("--threshold", sf.threshold, "Dedup threshold (max-norm)")->check(CLI::PositiveNumber);
    solve->add_option("--save-network", sf.save_network, "Write the first run's trained network");

    BenchFlags bf;
    auto* bench = app.add_subcommand("bench", "Run a built-in benchmark");
    add_common(bench, bench_common);
    bench->add_option("name", bf.name, "Benchmark name");
    bench->add_flag("--list", bf.list, "List benchmark names");
    bench->add_option("--algo", bf.algo, "hann1, hann2 or hann1+refine");
    bench->add_option("--Nm", bf.n_max, "HANN-2 outer iterations")->check(CLI::PositiveNumber);
    bench->add_option("--threshold", bf.threshold, "Dedup threshold override")->check(CLI::PositiveNumber);
    bench->add_option("--subintervals", bf.subintervals, "Grid cells per dimension override");
    bench->add_flag("--scaled", bf.scaled, "combustion10: use the x = 1e-5 z rescaled system");
    bench->add_option("--grid", bf.grid, "time-varying: output grid points")->check(CLI::Range(2, 10000000));

    SweepFlags swf;
    auto* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter sweep on a built-in benchmark");
    add_common(sweep_cmd, sweep_common);
    sweep_cmd->add_option("name", swf.name, "Benchmark name")->required();
    sweep_cmd->add_option("--axis", swf.axis, "gamma, collocation or architecture")
        ->check(CLI::IsMember({"gamma", "collocation", "architecture"}));
    sweep_cmd->add_option("--values", swf.values, "Comma-separated values (default: the published grid)");
    sweep_cmd->add_option("--trials", swf.trials, "Trials per value")->check(CLI::PositiveNumber);

    RefineFlags rf;
    auto* refine = app.add_subcommand("refine", "Damped Newton polish of a point");
    add_common(refine, refine_common, false);
    refine->add_option("--file", rf.file, "Equation file")->required();
    refine->add_option("--x0", rf.x0, "Starting point, comma separated")->required();
    refine->add_option("--max-iters", rf.max_iters, "Newton iterations")->check(CLI::NonNegativeNumber);
    refine->add_option("--tol", rf.tol, "Stop at residual_l1 <= tol");
    refine->add_option("--time", rf.time, "Value of the time symbol, if any");

    TimeVaryingFlags tf;
    auto* tv = app.add_subcommand("time-varying", "Solve F(x(t), t) = 0 over the declared time interval");
    add_common(tv, tv_common);
    tv->add_option("--file", tf.file, "Equation file with a time: line");
    tv->add_option("--builtin", tf.builtin_name, "Built-in case name");
    tv->add_option("--hint", tf.hint, "Newton start for the anchors x*(a)");
    tv->add_option("--anchors", tf.anchors, "Anchors x*(a), used as given");
    tv->add_option("--grid", tf.grid, "Output grid points")->check(CLI::Range(2, 10000000));

    DiagFlags df;
    auto* diag = app.add_subcommand("diag", "Path-existence diagnostic along a trained homotopy path");
    add_common(diag, diag_common);
    diag->add_option("--file", df.file, "Equation file")->required();
    diag->add_option("--x0", df.x0, "Anchor, comma separated")->required();
    diag->add_option("--snapshot", df.snapshot, "Use a saved network instead of training");
    diag->add_option("--points", df.points, "Number of t values")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve) return run_solve(solve_common, sf);
        if (*bench) return run_bench(bench_common, bf);
        if (*sweep_cmd) return run_sweep(sweep_common, swf);
        if (*refine) return run_refine(refine_common, rf);
        if (*tv) return run_time_varying(tv_common, tf);
        if (*diag) return run_diag(diag_common, df);
    } catch (const UsageError& e) {
        std::cerr << "hann: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "hann: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hann: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
