/**
 * @file net.hpp
 * @brief Fully connected tanh network x̂(Θ; t) with scalar input.
 *
 * Parameters live in one flat vector, layer by layer: the weight matrix of
 * layer k (n_k × n_{k-1}, row-major) followed by its bias vector (n_k).
 * Hidden layers apply tanh; the output layer is affine.
 */
#pragma once

#include "hann/expr.hpp"
#include "hann/sampling.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hann {

/// Raised when a forward pass produces a non-finite value.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetworkParams {
    std::vector<int> layer_sizes;  // [inputs, hidden..., outputs]
    Vector theta;

    static std::size_t parameter_count(const std::vector<int>& sizes) {
        std::size_t total = 0;
        for (std::size_t k = 1; k < sizes.size(); ++k)
            total += static_cast<std::size_t>(sizes[k - 1]) * static_cast<std::size_t>(sizes[k]) +
                     static_cast<std::size_t>(sizes[k]);
        return total;
    }

    std::size_t layers() const noexcept { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
    int inputs() const { return layer_sizes.front(); }
    int outputs() const { return layer_sizes.back(); }

    /// Offset of layer k's weights (k = 1 … layers()).
    std::size_t weight_offset(std::size_t k) const {
        std::size_t off = 0;
        for (std::size_t j = 1; j < k; ++j)
            off += static_cast<std::size_t>(layer_sizes[j - 1] + 1) * static_cast<std::size_t>(layer_sizes[j]);
        return off;
    }
    std::size_t bias_offset(std::size_t k) const {
        return weight_offset(k) +
               static_cast<std::size_t>(layer_sizes[k - 1]) * static_cast<std::size_t>(layer_sizes[k]);
    }

    Eigen::Map<const RowMajorMatrix> weight(std::size_t k) const {
        return {theta.data() + weight_offset(k), layer_sizes[k], layer_sizes[k - 1]};
    }
    Eigen::Map<RowMajorMatrix> weight(std::size_t k) {
        return {theta.data() + weight_offset(k), layer_sizes[k], layer_sizes[k - 1]};
    }
    Eigen::Map<const Vector> bias(std::size_t k) const { return {theta.data() + bias_offset(k), layer_sizes[k]}; }
    Eigen::Map<Vector> bias(std::size_t k) { return {theta.data() + bias_offset(k), layer_sizes[k]}; }

    void validate() const {
        if (layer_sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
        for (int s : layer_sizes)
            if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
        if (static_cast<std::size_t>(theta.size()) != parameter_count(layer_sizes))
            throw std::invalid_argument("theta length does not match layer sizes");
    }

    friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
        return a.layer_sizes == b.layer_sizes && a.theta.size() == b.theta.size() && a.theta == b.theta;
    }
};

/// [1, hidden..., outputs]
inline std::vector<int> layer_sizes_for(const std::vector<int>& hidden, int outputs) {
    std::vector<int> sizes{1};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(outputs);
    return sizes;
}

/// Glorot-uniform weights on ±√(6/(fan_in+fan_out)), zero biases.
inline NetworkParams init_xavier(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    NetworkParams p;
    p.layer_sizes = layer_sizes;
    if (layer_sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
    p.theta = Vector::Zero(static_cast<Eigen::Index>(NetworkParams::parameter_count(layer_sizes)));
    Rng rng(seed);
    for (std::size_t k = 1; k < layer_sizes.size(); ++k) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer_sizes[k - 1] + layer_sizes[k]));
        auto w = p.weight(k);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
    return p;
}

namespace detail {

inline void check_finite(const Matrix& m, const char* where) {
    if (!m.allFinite()) throw NumericalError(std::string("non-finite value in ") + where);
}

// tanh through the vectorized exp: 1 − 2/(e^{2z} + 1). Saturates cleanly to
// ±1 on overflow; absolute error stays at a few ulp of 1.
inline void tanh_inplace(Matrix& z) {
    z = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

}  // namespace detail

/// Outputs for a batch of scalar inputs, one column per input.
inline Matrix forward_batch(const NetworkParams& params, std::span<const double> inputs) {
    if (params.inputs() != 1) throw std::invalid_argument("forward: network must have a scalar input");
    Matrix a = Eigen::Map<const Eigen::RowVectorXd>(inputs.data(), static_cast<Eigen::Index>(inputs.size()));
    const std::size_t layers = params.layers();
    for (std::size_t k = 1; k <= layers; ++k) {
        Matrix z = params.weight(k) * a;
        z.colwise() += params.bias(k);
        if (k < layers) detail::tanh_inplace(z);
        a = std::move(z);
    }
    detail::check_finite(a, "network output");
    return a;
}

inline Vector forward(const NetworkParams& params, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("forward: input must be finite");
    const double in[1] = {t};
    return forward_batch(params, in).col(0);
}

// ------------------------------------------------------------------------
// Snapshot files
//
//   hann-network 1
//   layers <L> <n_0> … <n_{L-1}>
//   theta <count>
//   <one value per line, shortest round-trip decimal>
// ------------------------------------------------------------------------

inline void write_snapshot(std::ostream& os, const NetworkParams& p) {
    p.validate();
    os << "hann-network 1\nlayers " << p.layer_sizes.size();
    for (int s : p.layer_sizes) os << ' ' << s;
    os << "\ntheta " << p.theta.size() << '\n';
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) os << detail::format_double(p.theta[i]) << '\n';
}

inline NetworkParams read_snapshot(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "hann-network" || version != 1)
        throw std::runtime_error("snapshot: not a hann-network v1 file");
    std::string key;
    std::size_t count = 0;
    if (!(is >> key >> count) || key != "layers") throw std::runtime_error("snapshot: expected 'layers'");
    NetworkParams p;
    p.layer_sizes.resize(count);
    for (int& s : p.layer_sizes)
        if (!(is >> s)) throw std::runtime_error("snapshot: truncated layer list");
    if (!(is >> key >> count) || key != "theta") throw std::runtime_error("snapshot: expected 'theta'");
    p.theta.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        std::string tok;
        if (!(is >> tok)) throw std::runtime_error("snapshot: truncated theta");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) throw std::runtime_error("snapshot: bad number '" + tok + "'");
        p.theta[static_cast<Eigen::Index>(i)] = v;
    }
    p.validate();
    return p;
}

inline void save_snapshot(const std::string& path, const NetworkParams& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_snapshot(os, p);
}

inline NetworkParams load_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_snapshot(is);
}

}  // namespace hann
