/**
 * @file sampling.hpp
 * @brief Collocation points and initial-value grids.
 *
 * Random streams come from std::mt19937_64, whose output sequence is fixed
 * by the C++ standard. Conversions to doubles and bounded integers are done
 * here rather than through <random> distributions, whose algorithms are
 * implementation-defined, so seeds reproduce across standard libraries.
 */
#pragma once

#include "hann/expr.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace hann {

using Box = std::vector<Interval>;
using PointList = std::vector<Vector>;

/// Seeded stream with portable conversions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: empty range");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }

  private:
    std::mt19937_64 engine_;
};

/// Independent child seed for a named sub-stream (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class SampleScheme { lhs, midpoint_grid, random_in_cell };

struct SamplePlan {
    std::size_t count = 1;
    Box bounds{Interval{0.0, 1.0}};
    std::uint64_t seed = 1234;
    SampleScheme scheme = SampleScheme::lhs;

    std::size_t dims() const noexcept { return bounds.size(); }
};

namespace detail {

inline void check_box(const Box& box) {
    if (box.empty()) throw std::invalid_argument("sampling: empty domain");
    for (const Interval& iv : box)
        if (!iv.valid()) throw std::invalid_argument("sampling: invalid interval");
}

inline void check_subdivisions(const Box& box, const std::vector<int>& subdivisions) {
    check_box(box);
    if (subdivisions.size() != box.size())
        throw std::invalid_argument("sampling: one subdivision count per dimension required");
    for (int m : subdivisions)
        if (m < 1) throw std::invalid_argument("sampling: subdivisions must be >= 1");
}

// lo + (cell + u) * width / m, kept inside [cell lower bound, cell upper bound)
inline double place_in_stratum(const Interval& iv, std::size_t m, std::size_t cell, double u) {
    const double step = iv.width() / static_cast<double>(m);
    const double lower = iv.lo + static_cast<double>(cell) * step;
    const double upper = cell + 1 == m ? iv.hi : iv.lo + static_cast<double>(cell + 1) * step;
    double v = lower + u * step;
    if (v >= upper) v = std::nextafter(upper, lower);
    if (v < lower) v = lower;
    return v;
}

// Maps a coordinate to its stratum index, consistent with place_in_stratum.
inline std::size_t stratum_of(const Interval& iv, std::size_t m, double v) {
    const double step = iv.width() / static_cast<double>(m);
    auto s = static_cast<std::size_t>(std::floor((v - iv.lo) / step));
    if (s >= m) s = m - 1;
    // floating rounding near the boundaries
    while (s > 0 && v < iv.lo + static_cast<double>(s) * step) --s;
    while (s + 1 < m && v >= iv.lo + static_cast<double>(s + 1) * step) ++s;
    return s;
}

}  // namespace detail

/// Latin hypercube design: per dimension, a random permutation of the
/// `count` equal strata, each point placed uniformly inside its stratum.
inline PointList latin_hypercube(const SamplePlan& plan) {
    if (plan.scheme != SampleScheme::lhs) throw std::invalid_argument("latin_hypercube: scheme must be lhs");
    if (plan.count < 1) throw std::invalid_argument("latin_hypercube: count must be >= 1");
    detail::check_box(plan.bounds);
    const std::size_t n = plan.count;
    const std::size_t d = plan.dims();
    Rng rng(plan.seed);
    PointList points(n, Vector(static_cast<Eigen::Index>(d)));
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i)
            points[i][static_cast<Eigen::Index>(k)] = detail::place_in_stratum(plan.bounds[k], n, perm[i], rng.uniform());
    }
    return points;
}

/// Convenience for one-dimensional designs.
inline std::vector<double> latin_hypercube_1d(std::size_t count, Interval bounds, std::uint64_t seed) {
    const PointList pts = latin_hypercube(SamplePlan{count, {bounds}, seed, SampleScheme::lhs});
    std::vector<double> out;
    out.reserve(pts.size());
    for (const Vector& p : pts) out.push_back(p[0]);
    return out;
}

namespace detail {

// Visits the Cartesian product of cells, first dimension varying slowest.
template <class Visit>
void for_each_cell(const std::vector<int>& subdivisions, Visit&& visit) {
    std::vector<int> idx(subdivisions.size(), 0);
    for (;;) {
        visit(idx);
        std::size_t k = idx.size();
        while (k > 0) {
            --k;
            if (++idx[k] < subdivisions[k]) break;
            idx[k] = 0;
            if (k == 0) return;
        }
        if (idx.empty()) return;
    }
}

}  // namespace detail

/// Midpoints α + (j + ½)(β − α)/m of every cell.
inline PointList midpoint_grid(const Box& domain, const std::vector<int>& subdivisions) {
    detail::check_subdivisions(domain, subdivisions);
    PointList out;
    detail::for_each_cell(subdivisions, [&](const std::vector<int>& idx) {
        Vector p(static_cast<Eigen::Index>(domain.size()));
        for (std::size_t k = 0; k < domain.size(); ++k) {
            const Interval& iv = domain[k];
            p[static_cast<Eigen::Index>(k)] = iv.lo + (idx[k] + 0.5) * iv.width() / subdivisions[k];
        }
        out.push_back(std::move(p));
    });
    return out;
}

/// One uniform point in each cell of the grid.
inline PointList random_in_cell(const Box& domain, const std::vector<int>& subdivisions, std::uint64_t seed) {
    detail::check_subdivisions(domain, subdivisions);
    Rng rng(seed);
    PointList out;
    detail::for_each_cell(subdivisions, [&](const std::vector<int>& idx) {
        Vector p(static_cast<Eigen::Index>(domain.size()));
        for (std::size_t k = 0; k < domain.size(); ++k) {
            double u = rng.uniform();
            if (u == 0.0) u = 0x1.0p-53;  // strictly inside the cell
            p[static_cast<Eigen::Index>(k)] = detail::place_in_stratum(
                domain[k], static_cast<std::size_t>(subdivisions[k]), static_cast<std::size_t>(idx[k]), u);
        }
        out.push_back(std::move(p));
    });
    return out;
}

/// Dispatches on plan.scheme; grid schemes use `subdivisions`.
inline PointList sample(const SamplePlan& plan, const std::vector<int>& subdivisions = {}) {
    switch (plan.scheme) {
        case SampleScheme::lhs: return latin_hypercube(plan);
        case SampleScheme::midpoint_grid: return midpoint_grid(plan.bounds, subdivisions);
        case SampleScheme::random_in_cell: return random_in_cell(plan.bounds, subdivisions, plan.seed);
    }
    return {};
}

}  // namespace hann
