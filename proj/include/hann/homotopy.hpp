/**
 * @file homotopy.hpp
 * @brief H(x, t) = t F(x) + γ (t − 1)(F(x) − F(x0)) built around a System.
 *
 * H is evaluated from the base system and the cached F(x0); the equations
 * are never expanded into a larger expression.
 */
#pragma once

#include "hann/expr.hpp"

#include <Eigen/SVD>

#include <limits>
#include <memory>
#include <stdexcept>

namespace hann {

class HomotopyProblem {
  public:
    /// `time_value` fixes the reserved time symbol of a time-varying system.
    HomotopyProblem(std::shared_ptr<const System> base, Vector x0, double gamma, double time_value = 0.0)
        : base_(std::move(base)), x0_(std::move(x0)), gamma_(gamma), time_(time_value) {
        if (!base_) throw std::invalid_argument("homotopy: null system");
        if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw std::invalid_argument("homotopy: gamma must be positive");
        fx0_ = eval_system(*base_, x0_, time_);  // throws DomainError for an inadmissible anchor
    }

    const System& base() const noexcept { return *base_; }
    const std::shared_ptr<const System>& base_ptr() const noexcept { return base_; }
    const Vector& anchor() const noexcept { return x0_; }
    const Vector& anchor_values() const noexcept { return fx0_; }
    double gamma() const noexcept { return gamma_; }
    double time_value() const noexcept { return time_; }
    std::size_t dimension() const noexcept { return base_->dimension(); }

    /// h_i from already evaluated f_i(x).
    Vector combine(const Vector& fx, double t) const {
        return t * fx + (gamma_ * (t - 1.0)) * (fx - fx0_);
    }

    /// Coefficient c(t) with D_x H = c(t) J_F.
    double jacobian_scale(double t) const noexcept { return t + gamma_ * (t - 1.0); }

    Vector eval(const VectorRef& x, double t) const { return combine(eval_system(*base_, x, time_), t); }

    Matrix jacobian_x(const VectorRef& x, double t) const { return jacobian_scale(t) * jacobian(*base_, x, time_); }

    /// ∂H/∂t = F(x) + γ (F(x) − F(x0))
    Vector jacobian_t(const VectorRef& x) const {
        const Vector fx = eval_system(*base_, x, time_);
        return fx + gamma_ * (fx - fx0_);
    }

  private:
    std::shared_ptr<const System> base_;
    Vector x0_;
    double gamma_;
    double time_;
    Vector fx0_;
};

inline HomotopyProblem build_homotopy(const System& sys, const Vector& x0, double gamma, double time_value = 0.0) {
    if (static_cast<std::size_t>(x0.size()) != sys.dimension())
        throw std::invalid_argument("homotopy: anchor length does not match the system");
    return HomotopyProblem(std::make_shared<const System>(sys), x0, gamma, time_value);
}

inline Vector eval_homotopy(const HomotopyProblem& hp, const VectorRef& x, double t) { return hp.eval(x, t); }

/// Quantities governing existence of a smooth path x(t) through (x, t).
struct PathDiagnostic {
    Matrix dx;            // D_x H
    Vector dt;            // D_t H
    double condition = 0; // ‖(D_x H)⁻¹ D_t H‖₂, +∞ when D_x H is numerically singular
    bool singular = false;
    double sigma_min = 0;
    double sigma_max = 0;
};

inline constexpr double kSingularityThreshold = 1e-12;

/// D_x H = c(t) J_F, so singularity is judged against the scale
/// (|t| + γ|t − 1|) σ_max(J_F) that c(t) J_F would have without the
/// cancellation in c(t). This flags both an ill-conditioned J_F and the
/// point where c(t) vanishes.
inline PathDiagnostic path_diagnostic(const HomotopyProblem& hp, const VectorRef& x, double t) {
    if (!hp.base().square()) throw std::invalid_argument("diagnostic requires a square system");
    PathDiagnostic d;
    const Matrix jf = jacobian(hp.base(), x, hp.time_value());
    const double c = hp.jacobian_scale(t);
    d.dx = c * jf;
    d.dt = hp.jacobian_t(x);
    Eigen::JacobiSVD<Matrix> svd(jf, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double jmax = s.size() ? s[0] : 0.0;
    const double jmin = s.size() ? s[s.size() - 1] : 0.0;
    d.sigma_max = std::abs(c) * jmax;
    d.sigma_min = std::abs(c) * jmin;
    const double scale = (std::abs(t) + hp.gamma() * std::abs(t - 1.0)) * jmax;
    d.singular = !(scale > 0.0) || !(d.sigma_min >= kSingularityThreshold * scale);
    d.condition = d.singular ? std::numeric_limits<double>::infinity() : svd.solve(d.dt).norm() / std::abs(c);
    return d;
}

}  // namespace hann
