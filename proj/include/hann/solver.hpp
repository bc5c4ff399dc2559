/**
 * @file solver.hpp
 * @brief HANN-1 (one homotopy training run), HANN-2 (repeated HANN-1 with
 *        best tracking), multi-start orchestration, deduplication and a
 *        damped Newton polish.
 */
#pragma once

#include "hann/sampling.hpp"
#include "hann/train.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hann {

/// The anchor lies outside the domain of definition of F.
class InadmissibleAnchor : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
    double gamma = 0.01;
    std::size_t collocation = 1000;
    std::vector<int> hidden{40, 40, 40, 40};
    double weight_iv = 1.0;
    double weight_h = 1.0;
    OptimizerConfig optimizer{};
    std::uint64_t seed = 1234;

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("config: gamma must be positive");
        if (collocation < 1) throw std::invalid_argument("config: collocation count must be >= 1");
        for (int h : hidden)
            if (h < 1) throw std::invalid_argument("config: hidden layer sizes must be >= 1");
        if (!(weight_iv >= 0.0) || !(weight_h >= 0.0) || !(weight_iv > 0.0 || weight_h > 0.0))
            throw std::invalid_argument("config: loss weights must be non-negative with at least one positive");
        optimizer.validate();
    }
};

// Sub-streams of one run seed.
inline constexpr std::uint64_t kInitStream = 0;
inline constexpr std::uint64_t kCollocationStream = 1;

enum class SolveStatus { converged, budget_exhausted, line_search_stop, error };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::budget_exhausted: return "budget-exhausted";
        case SolveStatus::line_search_stop: return "line-search-stop";
        case SolveStatus::error: return "error";
    }
    return "unknown";
}

inline SolveStatus status_from(OptimizerStatus s) {
    switch (s) {
        case OptimizerStatus::gradient_tolerance:
        case OptimizerStatus::loss_tolerance: return SolveStatus::converged;
        case OptimizerStatus::max_iterations: return SolveStatus::budget_exhausted;
        case OptimizerStatus::line_search_failure: return SolveStatus::line_search_stop;
        case OptimizerStatus::non_finite: return SolveStatus::error;
    }
    return SolveStatus::error;
}

struct SolveResult {
    Vector x_final;
    double residual = std::numeric_limits<double>::infinity();  // residual_l1 at x_final; +inf if undefined there
    std::vector<double> loss_history;
    std::vector<std::size_t> stage_offsets;  // HANN-2: start of each inner run in loss_history
    std::vector<double> stage_residuals;     // HANN-2: residual of each inner run
    Vector initial_value;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // seconds
    SolveStatus status = SolveStatus::error;
    int iterations = 0;
    std::string message;
    std::optional<NetworkParams> network;  // trained network behind x_final, when there is one

    bool ok() const noexcept { return status != SolveStatus::error; }
};

namespace detail {

inline double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline double safe_residual(const System& sys, const VectorRef& x, double t) {
    try {
        return residual_l1(sys, x, t);
    } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
    }
}

inline void check_anchor(const System& sys, const Vector& x0, double t) {
    if (static_cast<std::size_t>(x0.size()) != sys.dimension())
        throw std::invalid_argument("anchor has " + std::to_string(x0.size()) + " components, system has " +
                                    std::to_string(sys.dimension()) + " variables");
    try {
        (void)eval_system(sys, x0, t);
    } catch (const DomainError& e) {
        throw InadmissibleAnchor(std::string("inadmissible anchor: ") + e.what());
    }
}

}  // namespace detail

/// One homotopy training run; the solution is x̂(Θ; 1). Throws
/// InadmissibleAnchor if F is undefined at x0; other failures come back as
/// status == error. `time_value` fixes the time symbol, if the system has one.
inline SolveResult hann1(std::shared_ptr<const System> sys, const Vector& x0, const TrainConfig& cfg,
                         double time_value = 0.0) {
    if (!sys) throw std::invalid_argument("hann1: null system");
    cfg.validate();
    if (!sys->square()) throw std::invalid_argument("hann1: system must be square");
    detail::check_anchor(*sys, x0, time_value);
    const auto start = std::chrono::steady_clock::now();

    SolveResult out;
    out.initial_value = x0;
    out.seed = cfg.seed;
    out.x_final = x0;
    try {
        HomotopyProblem hp(sys, x0, cfg.gamma, time_value);
        LossSpec spec = homotopy_loss(
            hp, latin_hypercube_1d(cfg.collocation, {0.0, 1.0}, derive_seed(cfg.seed, kCollocationStream)),
            cfg.weight_iv, cfg.weight_h);
        const NetworkParams p0 = init_xavier(layer_sizes_for(cfg.hidden, static_cast<int>(sys->dimension())),
                                             derive_seed(cfg.seed, kInitStream));
        TrainResult tr = minimize(p0, spec, cfg.optimizer);
        out.loss_history = std::move(tr.history.loss);
        out.iterations = tr.history.iterations;
        out.status = status_from(tr.history.status);
        out.message = tr.history.message;
        out.x_final = forward(tr.params, 1.0);
        out.network = std::move(tr.params);
    } catch (const std::exception& e) {
        out.status = SolveStatus::error;
        out.message = e.what();
    }
    out.residual = detail::safe_residual(*sys, out.x_final, time_value);
    if (!std::isfinite(out.residual) && out.status != SolveStatus::error) {
        out.status = SolveStatus::error;
        out.message = "system undefined at the learned point";
    }
    out.wall_time = detail::elapsed_since(start);
    return out;
}

inline SolveResult hann1(const System& sys, const Vector& x0, const TrainConfig& cfg, double time_value = 0.0) {
    return hann1(std::make_shared<const System>(sys), x0, cfg, time_value);
}

inline constexpr double kHann2InitialBest = 1000.0;
inline constexpr int kHann2MaxStall = 10;

/// Outer HANN-2 loop over an arbitrary inner runner `inner(x0, seed)`.
/// Iteration k (from 0) uses seed base_seed + k; `first`, when given, is
/// taken as the result of iteration 0. Inner failures count as
/// non-improving iterations.
template <class Inner>
SolveResult hann2_loop(Inner&& inner, const System& sys, const Vector& x0, int n_max, std::uint64_t base_seed,
                       const SolveResult* first = nullptr, double time_value = 0.0) {
    if (n_max < 1) throw std::invalid_argument("hann2: N_m must be >= 1");
    detail::check_anchor(sys, x0, time_value);
    const auto start = std::chrono::steady_clock::now();

    SolveResult out;
    out.initial_value = x0;
    out.seed = base_seed;
    out.x_final = x0;
    out.status = SolveStatus::error;
    out.message = "no inner run produced a finite residual";

    double ans_f = kHann2InitialBest;
    bool found = false;
    Vector anchor = x0;
    int num_t = 0;
    int num_l = 0;
    while (num_t <= n_max) {
        SolveResult r;
        if (num_t == 0 && first != nullptr) {
            r = *first;
        } else {
            try {
                r = inner(anchor, base_seed + static_cast<std::uint64_t>(num_t));
            } catch (const std::exception& e) {
                r.status = SolveStatus::error;
                r.message = e.what();
            }
        }
        out.stage_offsets.push_back(out.loss_history.size());
        out.loss_history.insert(out.loss_history.end(), r.loss_history.begin(), r.loss_history.end());
        out.iterations += r.iterations;
        const double ans_F = r.ok() ? r.residual : std::numeric_limits<double>::quiet_NaN();
        out.stage_residuals.push_back(ans_F);
        if (ans_F <= ans_f) {  // NaN compares false
            out.x_final = r.x_final;
            out.network = r.network;
            anchor = r.x_final;
            ans_f = ans_F;
            out.status = r.status;
            out.message = r.message;
            found = true;
            num_l = 0;
        } else {
            ++num_l;
        }
        ++num_t;
        if (num_l > kHann2MaxStall) break;
    }
    out.residual = detail::safe_residual(sys, out.x_final, time_value);
    if (!found) out.status = SolveStatus::error;
    out.wall_time = detail::elapsed_since(start);
    return out;
}

inline SolveResult hann2(std::shared_ptr<const System> sys, const Vector& x0, int n_max, const TrainConfig& cfg,
                         const SolveResult* first = nullptr, double time_value = 0.0) {
    if (!sys) throw std::invalid_argument("hann2: null system");
    cfg.validate();
    auto inner = [&](const Vector& anchor, std::uint64_t seed) {
        TrainConfig c = cfg;
        c.seed = seed;
        return hann1(sys, anchor, c, time_value);
    };
    return hann2_loop(inner, *sys, x0, n_max, cfg.seed, first, time_value);
}

inline SolveResult hann2(const System& sys, const Vector& x0, int n_max, const TrainConfig& cfg,
                         const SolveResult* first = nullptr) {
    return hann2(std::make_shared<const System>(sys), x0, n_max, cfg, first);
}

// ------------------------------------------------------------------------
// Newton polish
// ------------------------------------------------------------------------

inline constexpr double kNewtonMinStep = 0x1.0p-30;

/// Damped Newton: each accepted step strictly lowers residual_l1, so the
/// output is never worse than the input. A singular Jacobian ends the run
/// with status error and the best point so far.
inline SolveResult newton_refine(const System& sys, const Vector& point, int max_iters = 50, double tol = 1e-12,
                                 double time_value = 0.0) {
    if (max_iters < 0) throw std::invalid_argument("newton_refine: max_iters must be >= 0");
    if (!sys.square()) throw std::invalid_argument("newton_refine: system must be square");
    const auto start = std::chrono::steady_clock::now();
    SolveResult out;
    out.initial_value = point;
    out.x_final = point;
    out.residual = detail::safe_residual(sys, point, time_value);
    if (!std::isfinite(out.residual)) {
        out.status = SolveStatus::error;
        out.message = "system undefined at the starting point";
        return out;
    }
    out.status = SolveStatus::budget_exhausted;
    if (out.residual <= tol) out.status = SolveStatus::converged;

    Vector f;
    Matrix jac;
    while (out.status == SolveStatus::budget_exhausted && out.iterations < max_iters) {
        try {
            eval_with_jacobian(sys, out.x_final, time_value, f, jac);
        } catch (const DomainError& e) {
            out.status = SolveStatus::error;
            out.message = std::string("Jacobian undefined: ") + e.what();
            break;
        }
        Eigen::FullPivLU<Matrix> lu(jac);
        if (!lu.isInvertible()) {
            out.status = SolveStatus::error;
            out.message = "singular Jacobian";
            break;
        }
        const Vector dx = lu.solve(-f);
        bool accepted = false;
        for (double lambda = 1.0; lambda >= kNewtonMinStep; lambda *= 0.5) {
            Vector trial = out.x_final + lambda * dx;
            const double r = detail::safe_residual(sys, trial, time_value);
            if (r < out.residual) {
                out.x_final = std::move(trial);
                out.residual = r;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.status = SolveStatus::line_search_stop;
            out.message = "no damped step lowers the residual";
            break;
        }
        ++out.iterations;
        out.loss_history.push_back(out.residual);
        if (out.residual <= tol) out.status = SolveStatus::converged;
    }
    out.residual = detail::safe_residual(sys, out.x_final, time_value);
    out.wall_time = detail::elapsed_since(start);
    return out;
}

// ------------------------------------------------------------------------
// Deduplication
// ------------------------------------------------------------------------

struct Cluster {
    Vector representative;
    std::size_t representative_index = 0;  // into the clustered input list
    std::vector<std::size_t> members;
    double min_residual = std::numeric_limits<double>::infinity();
};

inline double max_norm_distance(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Greedy max-norm clustering in input order: a point joins the first
/// cluster whose representative lies within `threshold`, else starts one.
/// The representative is the member of smallest residual. A final pass
/// merges clusters whose representatives drifted within the threshold, so
/// representatives end pairwise farther apart than `threshold`.
inline std::vector<Cluster> dedup(const PointList& points, const std::vector<double>& residuals, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("dedup: threshold must be positive");
    if (residuals.size() != points.size()) throw std::invalid_argument("dedup: one residual per point required");
    std::vector<Cluster> clusters;
    auto adopt = [&](Cluster& c, std::size_t i) {
        c.members.push_back(i);
        if (residuals[i] < c.min_residual || c.members.size() == 1) {
            c.min_residual = residuals[i];
            c.representative = points[i];
            c.representative_index = i;
        }
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
            return max_norm_distance(c.representative, points[i]) <= threshold;
        });
        if (it == clusters.end()) {
            clusters.emplace_back();
            it = std::prev(clusters.end());
        }
        adopt(*it, i);
    }
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t a = 0; a < clusters.size() && !merged; ++a)
            for (std::size_t b = a + 1; b < clusters.size() && !merged; ++b)
                if (max_norm_distance(clusters[a].representative, clusters[b].representative) <= threshold) {
                    for (std::size_t i : clusters[b].members) adopt(clusters[a], i);
                    std::sort(clusters[a].members.begin(), clusters[a].members.end());
                    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
                    merged = true;
                }
    }
    return clusters;
}

inline std::vector<Cluster> dedup(const PointList& points, double threshold) {
    return dedup(points, std::vector<double>(points.size(), 0.0), threshold);
}

// ------------------------------------------------------------------------
// Multi-start
// ------------------------------------------------------------------------

enum class Algorithm { hann1, hann2, hann1_refine };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::hann1: return "hann1";
        case Algorithm::hann2: return "hann2";
        case Algorithm::hann1_refine: return "hann1+refine";
    }
    return "unknown";
}

struct MultistartOptions {
    Algorithm algorithm = Algorithm::hann1;
    double threshold = 1e-2;
    int n_max = 50;          // HANN-2 outer iterations
    int refine_iters = 50;
    double refine_tol = 1e-12;
    unsigned jobs = 0;       // 0: hardware concurrency
    double time_value = 0.0;

    void validate() const {
        if (!(threshold > 0.0)) throw std::invalid_argument("multistart: threshold must be positive");
        if (algorithm == Algorithm::hann2 && n_max < 1) throw std::invalid_argument("multistart: N_m must be >= 1");
        if (algorithm == Algorithm::hann1_refine && refine_iters < 0)
            throw std::invalid_argument("multistart: refine iterations must be >= 0");
    }
};

struct SolutionSet {
    std::vector<SolveResult> runs;      // final result per admissible anchor, input order
    std::vector<SolveResult> stage1;    // the HANN-1 run behind each entry of `runs`
    std::vector<std::size_t> anchor_index;  // runs[i] came from initials[anchor_index[i]]
    std::vector<std::size_t> clustered; // indices into runs that entered clustering
    std::vector<Cluster> clusters;      // Cluster::members index into runs
    double threshold = 0.0;
    std::vector<std::string> warnings;
};

inline unsigned resolve_jobs(unsigned jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Clusters the non-error runs of `set` under set.threshold.
inline void cluster_runs(SolutionSet& set) {
    set.clustered.clear();
    PointList pts;
    std::vector<double> res;
    for (std::size_t i = 0; i < set.runs.size(); ++i) {
        if (!set.runs[i].ok()) continue;
        set.clustered.push_back(i);
        pts.push_back(set.runs[i].x_final);
        res.push_back(set.runs[i].residual);
    }
    set.clusters = pts.empty() ? std::vector<Cluster>{} : dedup(pts, res, set.threshold);
    for (Cluster& c : set.clusters) {
        for (std::size_t& m : c.members) m = set.clustered[m];
        c.representative_index = set.clustered[c.representative_index];
    }
}

/// One run per admissible anchor (inadmissible ones are skipped with a
/// warning), then deduplication. Results keep input order for any `jobs`.
inline SolutionSet multistart(std::shared_ptr<const System> sys, const PointList& initials, const TrainConfig& cfg,
                              const MultistartOptions& opt) {
    if (!sys) throw std::invalid_argument("multistart: null system");
    if (initials.empty()) throw std::invalid_argument("multistart: no initial values");
    cfg.validate();
    opt.validate();
    SolutionSet set;
    set.threshold = opt.threshold;
    for (std::size_t i = 0; i < initials.size(); ++i) {
        try {
            detail::check_anchor(*sys, initials[i], opt.time_value);
            set.anchor_index.push_back(i);
        } catch (const InadmissibleAnchor& e) {
            set.warnings.push_back("initial value " + std::to_string(i) + " skipped: " + e.what());
        }
    }
    const std::size_t n = set.anchor_index.size();
    set.runs.resize(n);
    set.stage1.resize(n);
    parallel_for(n, opt.jobs, [&](std::size_t k) {
        const Vector& x0 = initials[set.anchor_index[k]];
        SolveResult first = hann1(sys, x0, cfg, opt.time_value);
        switch (opt.algorithm) {
            case Algorithm::hann1: set.runs[k] = first; break;
            case Algorithm::hann2: set.runs[k] = hann2(sys, x0, opt.n_max, cfg, &first, opt.time_value); break;
            case Algorithm::hann1_refine:
                if (first.ok()) {
                    SolveResult r = newton_refine(*sys, first.x_final, opt.refine_iters, opt.refine_tol, opt.time_value);
                    r.initial_value = x0;
                    r.seed = first.seed;
                    if (r.status == SolveStatus::error) r.status = first.status;  // polish failure keeps the HANN-1 point
                    r.loss_history = first.loss_history;
                    r.iterations += first.iterations;
                    r.wall_time += first.wall_time;
                    set.runs[k] = std::move(r);
                } else {
                    set.runs[k] = first;
                }
                break;
        }
        set.stage1[k] = std::move(first);
    });
    cluster_runs(set);
    return set;
}

inline SolutionSet multistart(const System& sys, const PointList& initials, const TrainConfig& cfg,
                              const MultistartOptions& opt) {
    return multistart(std::make_shared<const System>(sys), initials, cfg, opt);
}

}  // namespace hann
