/**
 * @file autodiff.hpp
 * @brief Reverse-mode gradient of a scalar objective of network outputs.
 *
 * The tape records one batched forward pass (a matrix of activations per
 * layer). The objective maps the output matrix to a scalar and supplies the
 * adjoint ∂loss/∂outputs; backward() pushes that adjoint through the layers
 * and writes ∂loss/∂Θ in the flat parameter layout of NetworkParams.
 *
 * Expression-level derivatives (∂H/∂x̂) stay inside the objective, so
 * expression trees never enter the tape.
 */
#pragma once

#include "hann/net.hpp"

#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

namespace hann {

class Tape {
  public:
    /// Forward pass over a batch of scalar inputs; keeps every activation.
    void record(const NetworkParams& params, std::span<const double> inputs) {
        if (params.inputs() != 1) throw std::invalid_argument("Tape: network must have a scalar input");
        if (inputs.empty()) throw std::invalid_argument("Tape: empty batch");
        params_ = &params;
        const std::size_t layers = params.layers();
        acts_.resize(layers + 1);
        acts_[0] = Eigen::Map<const Eigen::RowVectorXd>(inputs.data(), static_cast<Eigen::Index>(inputs.size()));
        for (std::size_t k = 1; k <= layers; ++k) {
            Matrix& z = acts_[k];
            z.noalias() = params.weight(k) * acts_[k - 1];
            z.colwise() += params.bias(k);
            if (k < layers) detail::tanh_inplace(z);
        }
        detail::check_finite(acts_.back(), "network output");
    }

    /// n_out × batch
    const Matrix& outputs() const { return acts_.back(); }

    /// ∂loss/∂Θ given ∂loss/∂outputs (same shape as outputs()).
    Vector backward(const Matrix& output_adjoint) const {
        if (params_ == nullptr) throw std::logic_error("Tape: backward before record");
        const NetworkParams& p = *params_;
        if (output_adjoint.rows() != outputs().rows() || output_adjoint.cols() != outputs().cols())
            throw std::invalid_argument("Tape: adjoint shape mismatch");
        Vector grad = Vector::Zero(p.theta.size());
        Matrix delta = output_adjoint;
        for (std::size_t k = p.layers(); k >= 1; --k) {
            Eigen::Map<RowMajorMatrix> gw(grad.data() + p.weight_offset(k), p.layer_sizes[k], p.layer_sizes[k - 1]);
            Eigen::Map<Vector> gb(grad.data() + p.bias_offset(k), p.layer_sizes[k]);
            gw.noalias() = delta * acts_[k - 1].transpose();
            gb = delta.rowwise().sum();
            if (k == 1) break;
            Matrix back = p.weight(k).transpose() * delta;
            // tanh' = 1 - tanh²
            delta = back.array() * (1.0 - acts_[k - 1].array().square());
        }
        return grad;
    }

  private:
    const NetworkParams* params_ = nullptr;
    std::vector<Matrix> acts_;
};

/// Objective over a batch of network outputs. Writes ∂loss/∂outputs into
/// `adjoint` when it is non-null and returns the loss.
template <class F>
concept BatchObjective = requires(F f, const Matrix& outputs, Matrix* adjoint) {
    { f(outputs, adjoint) } -> std::convertible_to<double>;
};

struct LossGrad {
    double loss = 0.0;
    Vector gradient;
};

/// Loss and its gradient with respect to every parameter slot.
template <BatchObjective Objective>
LossGrad loss_and_grad(const NetworkParams& params, Objective&& objective, std::span<const double> inputs) {
    Tape tape;
    tape.record(params, inputs);
    Matrix adjoint = Matrix::Zero(tape.outputs().rows(), tape.outputs().cols());
    LossGrad out;
    out.loss = objective(tape.outputs(), &adjoint);
    if (!std::isfinite(out.loss)) throw NumericalError("non-finite loss");
    out.gradient = tape.backward(adjoint);
    if (!out.gradient.allFinite()) throw NumericalError("non-finite gradient");
    return out;
}

/// Loss only (no adjoint is requested from the objective).
template <BatchObjective Objective>
double loss_value(const NetworkParams& params, Objective&& objective, std::span<const double> inputs) {
    Tape tape;
    tape.record(params, inputs);
    const double loss = objective(tape.outputs(), nullptr);
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss");
    return loss;
}

}  // namespace hann
