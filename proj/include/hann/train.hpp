/**
 * @file train.hpp
 * @brief Physics-informed loss over a homotopy (or a time-varying system)
 *        and the optimizers that minimize it.
 *
 * Loss, homotopy mode:
 *     w_iv ‖x̂(0) − x0‖² + w_h (1/N) Σ_j Σ_i h_i(x̂(t_j), t_j)²
 * Loss, time-varying mode (network input s ∈ [0,1], t = a + s (b − a)):
 *     w_iv ‖x̂(s=0) − x*(a)‖² + w_h (1/N) Σ_k Σ_i f_i(x̂(s_k), t_k)²
 */
#pragma once

#include "hann/autodiff.hpp"
#include "hann/homotopy.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hann {

/// Non-finite or undefined loss, located at a collocation point.
class LossEvaluationError : public NumericalError {
  public:
    LossEvaluationError(const std::string& what, long point, int equation)
        : NumericalError("collocation point " + std::to_string(point) +
                         (equation >= 0 ? ", equation " + std::to_string(equation) : std::string()) + ": " + what),
          point_(point), equation_(equation) {}

    /// -1 is the anchor (initial-value) term.
    long point() const noexcept { return point_; }
    int equation() const noexcept { return equation_; }

  private:
    long point_;
    int equation_;
};

enum class LossMode { homotopy, time_varying };

struct LossSpec {
    LossMode mode = LossMode::homotopy;
    std::shared_ptr<const System> system;
    std::optional<HomotopyProblem> homotopy;
    Vector anchor;                    // x0, or x*(a) in time-varying mode
    double weight_iv = 1.0;
    double weight_h = 1.0;
    std::vector<double> collocation;  // network inputs in [0, 1]
    Interval time_interval{0.0, 1.0}; // physical time range (time-varying mode)

    void validate() const {
        if (!system) throw std::invalid_argument("loss: no system");
        if (!(weight_iv >= 0.0) || !(weight_h >= 0.0) || !(weight_iv > 0.0 || weight_h > 0.0))
            throw std::invalid_argument("loss: weights must be non-negative with at least one positive");
        if (static_cast<std::size_t>(anchor.size()) != system->dimension())
            throw std::invalid_argument("loss: anchor length does not match the system");
        if (weight_h > 0.0 && collocation.empty()) throw std::invalid_argument("loss: no collocation points");
        for (double s : collocation)
            if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("loss: collocation point outside [0, 1]");
        if (mode == LossMode::homotopy && !homotopy) throw std::invalid_argument("loss: homotopy mode needs a problem");
        if (mode == LossMode::time_varying && !time_interval.valid())
            throw std::invalid_argument("loss: invalid time interval");
    }

    /// Network inputs: the anchor input 0 followed by the collocation points.
    std::vector<double> batch_inputs() const {
        std::vector<double> in;
        in.reserve(collocation.size() + 1);
        in.push_back(0.0);
        in.insert(in.end(), collocation.begin(), collocation.end());
        return in;
    }

    double physical_time(double s) const {
        return mode == LossMode::time_varying ? time_interval.lo + s * time_interval.width() : s;
    }

    /// Loss of a batch of outputs laid out as batch_inputs(); fills the
    /// output adjoint when requested.
    double operator()(const Matrix& outputs, Matrix* adjoint) const {
        const Eigen::Index n = static_cast<Eigen::Index>(system->dimension());
        const auto count = static_cast<Eigen::Index>(collocation.size());
        if (outputs.rows() != n || outputs.cols() != count + 1)
            throw std::invalid_argument("loss: output batch has the wrong shape");

        const Vector diff = outputs.col(0) - anchor;
        const double loss_iv = diff.squaredNorm();
        if (!std::isfinite(loss_iv)) throw LossEvaluationError("non-finite initial-value term", -1, -1);
        if (adjoint) adjoint->col(0) = (2.0 * weight_iv) * diff;

        double loss_h = 0.0;
        if (weight_h > 0.0 && count > 0) {
            const double scale = 2.0 * weight_h / static_cast<double>(count);
            const double sys_time = homotopy ? homotopy->time_value() : 0.0;
            Vector f;
            Matrix jac;
            Vector r;
            for (Eigen::Index j = 0; j < count; ++j) {
                const double s = collocation[static_cast<std::size_t>(j)];
                const double t = physical_time(s);
                const auto x = outputs.col(j + 1);
                try {
                    const double eval_t = mode == LossMode::homotopy ? sys_time : t;
                    if (adjoint) eval_with_jacobian(*system, x, eval_t, f, jac);
                    else f = eval_system(*system, x, eval_t);
                } catch (const DomainError& e) {
                    throw LossEvaluationError(e.reason(), static_cast<long>(j), e.equation());
                }
                double c = 1.0;
                if (mode == LossMode::homotopy) {
                    r = homotopy->combine(f, s);
                    c = homotopy->jacobian_scale(s);
                } else {
                    r = f;
                }
                for (Eigen::Index i = 0; i < r.size(); ++i)
                    if (!std::isfinite(r[i])) throw LossEvaluationError("non-finite residual", static_cast<long>(j), static_cast<int>(i));
                loss_h += r.squaredNorm();
                if (adjoint) adjoint->col(j + 1).noalias() = (scale * c) * (jac.transpose() * r);
            }
            loss_h /= static_cast<double>(count);
        }
        const double loss = weight_iv * loss_iv + weight_h * loss_h;
        if (!std::isfinite(loss)) throw LossEvaluationError("non-finite loss", -1, -1);
        return loss;
    }
};

/// Homotopy-mode loss around an existing problem.
inline LossSpec homotopy_loss(const HomotopyProblem& hp, std::vector<double> collocation, double weight_iv = 1.0,
                              double weight_h = 1.0) {
    LossSpec spec;
    spec.mode = LossMode::homotopy;
    spec.system = hp.base_ptr();
    spec.homotopy = hp;
    spec.anchor = hp.anchor();
    spec.weight_iv = weight_iv;
    spec.weight_h = weight_h;
    spec.collocation = std::move(collocation);
    spec.validate();
    return spec;
}

/// Time-varying loss; `collocation` holds normalized inputs in [0, 1].
inline LossSpec time_varying_loss(std::shared_ptr<const System> sys, Vector anchors, std::vector<double> collocation,
                                  double weight_iv = 1.0, double weight_h = 1.0) {
    if (!sys || !sys->time) throw std::invalid_argument("time-varying loss needs a system with a time axis");
    LossSpec spec;
    spec.mode = LossMode::time_varying;
    spec.time_interval = sys->time->range;
    spec.system = std::move(sys);
    spec.anchor = std::move(anchors);
    spec.weight_iv = weight_iv;
    spec.weight_h = weight_h;
    spec.collocation = std::move(collocation);
    spec.validate();
    return spec;
}

inline double assemble_loss(const LossSpec& spec, const NetworkParams& params) {
    const std::vector<double> inputs = spec.batch_inputs();
    return loss_value(params, spec, inputs);
}

inline LossGrad loss_and_grad(const NetworkParams& params, const LossSpec& spec) {
    const std::vector<double> inputs = spec.batch_inputs();
    return loss_and_grad(params, spec, std::span<const double>(inputs));
}

// ------------------------------------------------------------------------
// Optimizers
// ------------------------------------------------------------------------

enum class OptimizerKind { lbfgs, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::lbfgs;
    int max_iters = 5000;
    double grad_tol = 1e-9;    // on max |∂L/∂Θ_k|
    double loss_tol = 1e-12;   // relative change of accepted losses
    int memory = 10;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 25;  // function evaluations per line search
    double adam_step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (max_iters < 0) throw std::invalid_argument("optimizer: max_iters must be >= 0");
        if (kind == OptimizerKind::lbfgs) {
            if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("optimizer: need 0 < c1 < c2 < 1");
            if (memory < 1) throw std::invalid_argument("optimizer: memory must be >= 1");
            if (max_line_search < 1) throw std::invalid_argument("optimizer: max_line_search must be >= 1");
        } else {
            if (!(adam_step > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
                throw std::invalid_argument("optimizer: invalid Adam settings");
        }
    }
};

enum class OptimizerStatus { gradient_tolerance, loss_tolerance, max_iterations, line_search_failure, non_finite };

inline const char* to_string(OptimizerStatus s) {
    switch (s) {
        case OptimizerStatus::gradient_tolerance: return "gradient-tolerance";
        case OptimizerStatus::loss_tolerance: return "loss-tolerance";
        case OptimizerStatus::max_iterations: return "max-iterations";
        case OptimizerStatus::line_search_failure: return "line-search-failure";
        case OptimizerStatus::non_finite: return "non-finite";
    }
    return "unknown";
}

struct TrainingHistory {
    std::vector<double> loss;  // loss[0] at the start, then one per iteration
    OptimizerStatus status = OptimizerStatus::max_iterations;
    int iterations = 0;
    int evaluations = 0;
    std::string message;
};

inline void write_history_csv(std::ostream& os, const TrainingHistory& h) {
    os << "iteration,loss\n";
    for (std::size_t i = 0; i < h.loss.size(); ++i) os << i << ',' << detail::format_double(h.loss[i]) << '\n';
}

struct MinimizeResult {
    Vector theta;
    TrainingHistory history;
};

namespace detail {

template <class F>
concept ValueGradient = requires(F f, const Vector& x, Vector& g) {
    { f(x, g) } -> std::convertible_to<double>;
};

struct Trial {
    double alpha = 0.0;
    double f = 0.0;
    double dphi = 0.0;
    Vector x;
    Vector g;
    bool finite = false;
};

template <ValueGradient F>
Trial evaluate_trial(F& fg, const Vector& x, const Vector& d, double alpha, int& evals) {
    Trial t;
    t.alpha = alpha;
    t.x = x + alpha * d;
    ++evals;
    try {
        t.f = fg(t.x, t.g);
        t.finite = std::isfinite(t.f) && t.g.allFinite();
    } catch (const NumericalError&) {
        t.finite = false;
    } catch (const DomainError&) {
        t.finite = false;
    }
    if (!t.finite) {
        t.f = std::numeric_limits<double>::infinity();
        t.dphi = std::numeric_limits<double>::quiet_NaN();
    } else {
        t.dphi = t.g.dot(d);
    }
    return t;
}

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), safeguarded
// into the inner 80% of the bracket; bisection when the cubic is unusable.
inline double cubic_step(const Trial& a, const Trial& b) {
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double mid = 0.5 * (lo + hi);
    if (!a.finite || !b.finite) return mid;
    const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.dphi * b.dphi;
    if (!(disc >= 0.0) || !std::isfinite(disc)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom == 0.0 || !std::isfinite(denom)) return mid;
    const double step = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(step) || step < lo + margin || step > hi - margin) return mid;
    return step;
}

struct LineSearchResult {
    bool wolfe = false;     // strong Wolfe conditions met
    bool decrease = false;  // at least sufficient decrease at `best`
    Trial best;
};

// Strong-Wolfe line search with bracketing and cubic zoom.
template <ValueGradient F>
LineSearchResult strong_wolfe(F& fg, const Vector& x, double f0, double dphi0, const Vector& d, double alpha0,
                              const OptimizerConfig& cfg, int& evals) {
    LineSearchResult res;
    const auto armijo = [&](const Trial& t) { return t.finite && t.f <= f0 + cfg.c1 * t.alpha * dphi0; };
    const auto curvature = [&](const Trial& t) { return std::abs(t.dphi) <= -cfg.c2 * dphi0; };
    auto keep_best = [&](const Trial& t) {
        if (armijo(t) && (!res.decrease || t.f < res.best.f)) {
            res.best = t;
            res.decrease = true;
        }
    };

    Trial prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.dphi = dphi0;
    prev.finite = true;
    prev.x = x;
    double alpha = alpha0;
    int budget = cfg.max_line_search;

    auto zoom = [&](Trial lo, Trial hi) {
        while (budget > 0) {
            if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, lo.alpha)) break;
            const double a = cubic_step(lo, hi);
            Trial t = evaluate_trial(fg, x, d, a, evals);
            --budget;
            keep_best(t);
            if (!armijo(t) || t.f >= lo.f) {
                hi = std::move(t);
            } else {
                if (curvature(t)) {
                    res.best = std::move(t);
                    res.wolfe = res.decrease = true;
                    return;
                }
                if (t.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(t);
            }
        }
    };

    for (int i = 0; budget > 0; ++i) {
        Trial t = evaluate_trial(fg, x, d, alpha, evals);
        --budget;
        keep_best(t);
        if (!armijo(t) || (i > 0 && t.f >= prev.f)) {
            zoom(prev, t);
            return res;
        }
        if (curvature(t)) {
            res.best = std::move(t);
            res.wolfe = res.decrease = true;
            return res;
        }
        if (t.dphi >= 0.0) {
            zoom(t, prev);
            return res;
        }
        prev = std::move(t);
        alpha *= 2.0;
    }
    return res;
}

}  // namespace detail

/// L-BFGS (two-loop recursion, strong-Wolfe line search). Accepted losses
/// never increase. Throws if the objective cannot be evaluated at theta0.
template <detail::ValueGradient F>
MinimizeResult lbfgs(F&& fg, Vector theta0, const OptimizerConfig& cfg) {
    cfg.validate();
    MinimizeResult out;
    TrainingHistory& h = out.history;
    Vector x = std::move(theta0);
    Vector g;
    double f = fg(x, g);
    h.evaluations = 1;
    if (!std::isfinite(f) || !g.allFinite()) throw NumericalError("non-finite loss at the initial parameters");
    h.loss.push_back(f);

    std::deque<Vector> S, Y;
    std::deque<double> rho;
    auto converged = [&] { return g.size() == 0 || g.cwiseAbs().maxCoeff() <= cfg.grad_tol; };

    if (converged()) {
        h.status = OptimizerStatus::gradient_tolerance;
        out.theta = std::move(x);
        return out;
    }

    h.status = OptimizerStatus::max_iterations;
    std::vector<double> alpha_buf;
    bool fresh = true;  // memory empty: scale the first step
    while (h.iterations < cfg.max_iters) {
        // two-loop recursion
        Vector d = -g;
        const std::size_t m = S.size();
        alpha_buf.assign(m, 0.0);
        for (std::size_t i = m; i-- > 0;) {
            alpha_buf[i] = rho[i] * S[i].dot(d);
            d.noalias() -= alpha_buf[i] * Y[i];
        }
        if (m > 0) d *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t i = 0; i < m; ++i) {
            const double beta = rho[i] * Y[i].dot(d);
            d.noalias() += (alpha_buf[i] - beta) * S[i];
        }
        double dphi0 = g.dot(d);
        if (!(dphi0 < 0.0)) {
            S.clear(); Y.clear(); rho.clear();
            d = -g;
            dphi0 = -g.squaredNorm();
            fresh = true;
        }
        const double alpha0 = fresh ? std::min(1.0, 1.0 / d.norm()) : 1.0;

        detail::LineSearchResult ls = detail::strong_wolfe(fg, x, f, dphi0, d, alpha0, cfg, h.evaluations);
        if (!ls.decrease) {
            if (!fresh) {
                // stale curvature pairs: retry once along steepest descent
                S.clear(); Y.clear(); rho.clear();
                fresh = true;
                continue;
            }
            h.status = OptimizerStatus::line_search_failure;
            h.message = "line search found no sufficient decrease";
            break;
        }
        detail::Trial& t = ls.best;
        Vector s = t.x - x;
        Vector y = t.g - g;
        const double sy = s.dot(y);
        const double f_old = f;
        x = std::move(t.x);
        g = std::move(t.g);
        f = t.f;
        ++h.iterations;
        h.loss.push_back(f);
        fresh = false;
        if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > cfg.memory) {
                S.pop_front(); Y.pop_front(); rho.pop_front();
            }
        } else if (S.empty()) {
            fresh = true;
        }
        if (converged()) {
            h.status = OptimizerStatus::gradient_tolerance;
            break;
        }
        if (f_old - f <= cfg.loss_tol * std::max({std::abs(f_old), std::abs(f), 1.0})) {
            h.status = OptimizerStatus::loss_tolerance;
            break;
        }
    }
    out.theta = std::move(x);
    return out;
}

/// Adam with bias correction over a fixed iteration budget. A non-finite
/// evaluation ends the run and keeps the last good parameters.
template <detail::ValueGradient F>
MinimizeResult adam(F&& fg, Vector theta0, const OptimizerConfig& cfg) {
    cfg.validate();
    MinimizeResult out;
    TrainingHistory& h = out.history;
    Vector x = std::move(theta0);
    Vector g;
    Vector m = Vector::Zero(x.size());
    Vector v = Vector::Zero(x.size());
    double b1t = 1.0, b2t = 1.0;
    h.status = OptimizerStatus::max_iterations;
    Vector last_good = x;
    for (int it = 0; it <= cfg.max_iters; ++it) {
        double f = 0.0;
        bool ok = true;
        try {
            f = fg(x, g);
            ok = std::isfinite(f) && g.allFinite();
        } catch (const NumericalError&) {
            ok = false;
        } catch (const DomainError&) {
            ok = false;
        }
        ++h.evaluations;
        if (!ok) {
            if (it == 0) throw NumericalError("non-finite loss at the initial parameters");
            h.status = OptimizerStatus::non_finite;
            h.message = "non-finite loss during Adam";
            x = last_good;
            break;
        }
        h.loss.push_back(f);
        last_good = x;
        if (it == cfg.max_iters) break;
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const Vector mhat = m / (1.0 - b1t);
        const Vector vhat = v / (1.0 - b2t);
        x.array() -= cfg.adam_step * mhat.array() / (vhat.array().sqrt() + cfg.epsilon);
        ++h.iterations;
    }
    out.theta = std::move(x);
    return out;
}

struct TrainResult {
    NetworkParams params;
    TrainingHistory history;
};

namespace detail {

inline auto network_objective(const NetworkParams& shape, const LossSpec& spec) {
    return [work = shape, &spec, inputs = spec.batch_inputs()](const Vector& theta, Vector& grad) mutable {
        work.theta = theta;
        LossGrad lg = hann::loss_and_grad(work, spec, std::span<const double>(inputs));
        grad = std::move(lg.gradient);
        return lg.loss;
    };
}

}  // namespace detail

inline TrainResult lbfgs_minimize(const NetworkParams& params0, const LossSpec& spec, const OptimizerConfig& cfg) {
    if (cfg.kind != OptimizerKind::lbfgs) throw std::invalid_argument("lbfgs_minimize: config is not L-BFGS");
    params0.validate();
    spec.validate();
    auto fg = detail::network_objective(params0, spec);
    MinimizeResult r = lbfgs(fg, params0.theta, cfg);
    return {NetworkParams{params0.layer_sizes, std::move(r.theta)}, std::move(r.history)};
}

inline TrainResult adam_minimize(const NetworkParams& params0, const LossSpec& spec, const OptimizerConfig& cfg) {
    if (cfg.kind != OptimizerKind::adam) throw std::invalid_argument("adam_minimize: config is not Adam");
    params0.validate();
    spec.validate();
    auto fg = detail::network_objective(params0, spec);
    MinimizeResult r = adam(fg, params0.theta, cfg);
    return {NetworkParams{params0.layer_sizes, std::move(r.theta)}, std::move(r.history)};
}

inline TrainResult minimize(const NetworkParams& params0, const LossSpec& spec, const OptimizerConfig& cfg) {
    return cfg.kind == OptimizerKind::lbfgs ? lbfgs_minimize(params0, spec, cfg) : adam_minimize(params0, spec, cfg);
}

}  // namespace hann
