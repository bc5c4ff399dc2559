/**
 * @file timevarying.hpp
 * @brief Trajectories x(t) of F(x(t), t) = 0 over [a, b], trained directly
 *        on the system (no homotopy). The network sees s = (t − a)/(b − a).
 */
#pragma once

#include "hann/solver.hpp"

#include <functional>
#include <optional>
#include <ostream>

namespace hann {

struct TimeVaryingProblem {
    std::shared_ptr<const System> system;  // must declare a time axis
    std::optional<Vector> anchors;         // x*(a); computed when absent
    std::function<Vector(double)> exact;   // optional reference trajectory

    const Interval& interval() const { return system->time->range; }

    void validate() const {
        if (!system) throw std::invalid_argument("time-varying: null system");
        if (!system->time) throw std::invalid_argument("time-varying: system has no time axis");
        if (!system->time->range.valid()) throw std::invalid_argument("time-varying: invalid time interval");
        if (anchors && static_cast<std::size_t>(anchors->size()) != system->dimension())
            throw std::invalid_argument("time-varying: anchor length does not match the system");
    }
};

inline constexpr double kAnchorTolerance = 1e-8;

/// Roots of F(x, a) = 0 by Newton from `hint`, or from a HANN-1 run
/// started at the origin when no hint is given.
inline Vector compute_anchors(const TimeVaryingProblem& problem, const std::optional<Vector>& hint,
                              const TrainConfig& cfg = {}) {
    problem.validate();
    const System& sys = *problem.system;
    const double a = problem.interval().lo;
    if (!sys.square()) throw std::invalid_argument("time-varying: anchor solve needs a square system");
    Vector start;
    if (hint) {
        start = *hint;
    } else {
        SolveResult r = hann1(problem.system, Vector::Zero(static_cast<Eigen::Index>(sys.dimension())), cfg, a);
        if (!r.ok()) throw std::runtime_error("time-varying: anchor search failed: " + r.message);
        start = r.x_final;
    }
    if (static_cast<std::size_t>(start.size()) != sys.dimension())
        throw std::invalid_argument("time-varying: hint length does not match the system");
    const SolveResult r = newton_refine(sys, start, 100, 1e-14, a);
    if (!(r.residual <= kAnchorTolerance))
        throw std::runtime_error("time-varying: anchors not found (residual " + detail::format_double(r.residual) +
                                 "); supply them explicitly");
    return r.x_final;
}

struct Trajectory {
    std::vector<double> t;
    Matrix x;                  // n × grid
    Matrix residuals;          // |f_i| per equation, m × grid
    std::vector<double> residual_l1;
    std::optional<Matrix> abs_error;  // when an exact solution is registered
    Vector anchors;
    NetworkParams params;
    TrainingHistory history;
    double wall_time = 0.0;

    /// Largest absolute error of component i over the grid.
    double max_abs_error(Eigen::Index i) const {
        if (!abs_error) throw std::logic_error("trajectory: no exact solution registered");
        return abs_error->row(i).maxCoeff();
    }
};

inline constexpr std::size_t kDefaultTrajectoryGrid = 1001;

/// Evaluates a trained network on a uniform grid of [a, b].
inline Trajectory evaluate_trajectory(const TimeVaryingProblem& problem, const NetworkParams& params,
                                      std::size_t grid = kDefaultTrajectoryGrid) {
    problem.validate();
    if (grid < 2) throw std::invalid_argument("time-varying: grid needs at least 2 points");
    const System& sys = *problem.system;
    const Interval& iv = problem.interval();
    Trajectory tr;
    std::vector<double> s(grid);
    tr.t.resize(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        s[k] = static_cast<double>(k) / static_cast<double>(grid - 1);
        tr.t[k] = k + 1 == grid ? iv.hi : iv.lo + s[k] * iv.width();
    }
    tr.x = forward_batch(params, s);
    const auto m = static_cast<Eigen::Index>(sys.size());
    tr.residuals.resize(m, static_cast<Eigen::Index>(grid));
    tr.residual_l1.resize(grid);
    if (problem.exact) tr.abs_error = Matrix(tr.x.rows(), static_cast<Eigen::Index>(grid));
    for (std::size_t k = 0; k < grid; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        double l1 = std::numeric_limits<double>::infinity();
        try {
            tr.residuals.col(col) = eval_system(sys, tr.x.col(col), tr.t[k]).cwiseAbs();
            l1 = residual_l1(sys, tr.x.col(col), tr.t[k]);
        } catch (const DomainError&) {
            tr.residuals.col(col).setConstant(std::numeric_limits<double>::infinity());
        }
        tr.residual_l1[k] = l1;
        if (tr.abs_error) tr.abs_error->col(col) = (tr.x.col(col) - problem.exact(tr.t[k])).cwiseAbs();
    }
    tr.params = params;
    return tr;
}

/// Trains on cfg.collocation LHS times plus t = a itself, then evaluates
/// the result on `grid` uniform points. Weights are Xavier; the output bias
/// starts at the anchors.
inline Trajectory solve_time_varying(const TimeVaryingProblem& problem, const TrainConfig& cfg,
                                     std::size_t grid = kDefaultTrajectoryGrid) {
    problem.validate();
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Vector anchors = problem.anchors ? *problem.anchors : compute_anchors(problem, std::nullopt, cfg);

    std::vector<double> coll{0.0};
    const std::vector<double> lhs = latin_hypercube_1d(cfg.collocation, {0.0, 1.0}, derive_seed(cfg.seed, kCollocationStream));
    coll.insert(coll.end(), lhs.begin(), lhs.end());
    const LossSpec spec = time_varying_loss(problem.system, anchors, std::move(coll), cfg.weight_iv, cfg.weight_h);
    NetworkParams p0 = init_xavier(layer_sizes_for(cfg.hidden, static_cast<int>(problem.system->dimension())),
                                   derive_seed(cfg.seed, kInitStream));
    // Start the output bias at x*(a) so the untrained network stays inside
    // the domain of F (ln, 1/x) instead of near the origin.
    p0.bias(p0.layer_sizes.size() - 1) = anchors;
    TrainResult trained = minimize(p0, spec, cfg.optimizer);
    Trajectory tr = evaluate_trajectory(problem, trained.params, grid);
    tr.anchors = anchors;
    tr.history = std::move(trained.history);
    tr.wall_time = detail::elapsed_since(start);
    return tr;
}

/// Columns: t, each variable, each |f_i|, residual_l1, then err_<var> when
/// an exact solution is registered.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const System& sys) {
    os << sys.time->name;
    for (const std::string& v : sys.variables) os << ',' << v;
    for (std::size_t i = 0; i < sys.size(); ++i) os << ",abs_f" << (i + 1);
    os << ",residual_l1";
    if (tr.abs_error)
        for (const std::string& v : sys.variables) os << ",err_" << v;
    os << '\n';
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        os << detail::format_double(tr.t[k]);
        for (Eigen::Index i = 0; i < tr.x.rows(); ++i) os << ',' << detail::format_double(tr.x(i, c));
        for (Eigen::Index i = 0; i < tr.residuals.rows(); ++i) os << ',' << detail::format_double(tr.residuals(i, c));
        os << ',' << detail::format_double(tr.residual_l1[k]);
        if (tr.abs_error)
            for (Eigen::Index i = 0; i < tr.abs_error->rows(); ++i)
                os << ',' << detail::format_double((*tr.abs_error)(i, c));
        os << '\n';
    }
}

}  // namespace hann
