#pragma once

// Partitioning a planar probability measure on the unit square by
// axis-parallel cuts. Either some pair of partitions keeps every rectangle
// below c, or for any quotas there is a pair of partitions and a quota map
// sigma whose rectangles I_{sigma(j)} x J_j all carry mass at least c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "kkmcut/engine.hpp"
#include "kkmcut/errors.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/simplex.hpp"

namespace kkmcut {

/// Piecewise-constant probability density on [0,1]^2 with kx columns and ky
/// rows; values are densities per unit area stored row-major, so cell
/// (ix, iy) is values[iy * kx + ix].
class GridDensity {
public:
    GridDensity(std::size_t kx, std::size_t ky, std::vector<double> values) : kx_(kx), ky_(ky) {
        if (kx == 0 || ky == 0)
            throw InvalidInput("density grid needs at least one cell per axis");
        if (values.size() != kx * ky)
            throw InvalidInput("density has " + std::to_string(values.size()) + " values, expected " +
                               std::to_string(kx * ky));
        double total = 0.0;
        for (double v : values) {
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidInput("density values must be finite and nonnegative");
            total += v;
        }
        total /= static_cast<double>(kx * ky);
        if (!(total > 0.0))
            throw InvalidInput("density has zero total mass");
        normalization_ = total;
        prefix_.assign((kx + 1) * (ky + 1), 0.0);
        const double cell_area = 1.0 / static_cast<double>(kx * ky);
        for (std::size_t iy = 0; iy < ky; ++iy)
            for (std::size_t ix = 0; ix < kx; ++ix) {
                double mass = values[iy * kx + ix] / total * cell_area;
                node(ix + 1, iy + 1) = mass + node(ix, iy + 1) + node(ix + 1, iy) - node(ix, iy);
            }
        for (auto& v : values)
            v /= total;
        values_ = std::move(values);
    }

    static GridDensity uniform(std::size_t kx = 1, std::size_t ky = 1) {
        return GridDensity(kx, ky, std::vector<double>(kx * ky, 1.0));
    }

    std::size_t kx() const { return kx_; }
    std::size_t ky() const { return ky_; }
    const std::vector<double>& values() const { return values_; }

    /// Total mass of the raw values before normalization (1 for an already
    /// normalized input).
    double input_mass() const { return normalization_; }

    /// mu([0,x] x [0,y]); bilinear inside each cell.
    double cumulative(double x, double y) const {
        const double sx = x * static_cast<double>(kx_), sy = y * static_cast<double>(ky_);
        auto ix = std::min<std::size_t>(static_cast<std::size_t>(std::floor(sx)), kx_ - 1);
        auto iy = std::min<std::size_t>(static_cast<std::size_t>(std::floor(sy)), ky_ - 1);
        const double fx = sx - static_cast<double>(ix), fy = sy - static_cast<double>(iy);
        const double p00 = node(ix, iy), p10 = node(ix + 1, iy);
        const double p01 = node(ix, iy + 1), p11 = node(ix + 1, iy + 1);
        return p00 + fx * (p10 - p00) + fy * (p01 - p00) + fx * fy * (p11 - p10 - p01 + p00);
    }

private:
    double& node(std::size_t ix, std::size_t iy) { return prefix_[iy * (kx_ + 1) + ix]; }
    double node(std::size_t ix, std::size_t iy) const { return prefix_[iy * (kx_ + 1) + ix]; }

    std::size_t kx_, ky_;
    std::vector<double> values_;
    std::vector<double> prefix_;
    double normalization_ = 1.0;
};

/// mu([x_lo, x_hi] x [y_lo, y_hi]).
inline double rectangle_mass(const GridDensity& d, double x_lo, double x_hi, double y_lo, double y_hi) {
    auto ok = [](double lo, double hi) { return 0.0 <= lo && lo <= hi && hi <= 1.0; };
    if (!ok(x_lo, x_hi) || !ok(y_lo, y_hi))
        throw OutOfRange("rectangle must satisfy 0 <= lo <= hi <= 1 on both axes");
    if (x_lo == x_hi || y_lo == y_hi)
        return 0.0;
    double m = d.cumulative(x_hi, y_hi) - d.cumulative(x_lo, y_hi) - d.cumulative(x_hi, y_lo) +
               d.cumulative(x_lo, y_lo);
    return std::clamp(m, 0.0, 1.0);
}

/// Cut positions 0 = x_0 <= ... <= x_n = 1 and 0 = y_0 <= ... <= y_m = 1.
/// Segment lengths are the barycentric coordinates of a point of
/// Delta^{n-1} x Delta^{m-1}.
struct PartitionPair {
    std::vector<double> x_cuts;
    std::vector<double> y_cuts;

    std::size_t n() const { return x_cuts.size() - 1; }
    std::size_t m() const { return y_cuts.size() - 1; }
};

inline std::vector<double> cumulative_cuts(const BarycentricPoint& lengths) {
    std::vector<double> cuts{0.0};
    Rational acc(0);
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        acc += lengths[i];
        cuts.push_back(to_double(acc));
    }
    cuts.back() = 1.0;
    return cuts;
}

inline std::vector<double> cumulative_cuts(const std::vector<double>& lengths) {
    std::vector<double> cuts{0.0};
    double acc = 0.0;
    for (double v : lengths) {
        acc += v;
        cuts.push_back(std::min(acc, 1.0));
    }
    cuts.back() = 1.0;
    return cuts;
}

inline PartitionPair partition_from_point(const ProductPoint& p) {
    if (p.factors.size() != 2)
        throw InvalidInput("partition pair needs a two-factor point");
    return PartitionPair{cumulative_cuts(p.factors[0]), cumulative_cuts(p.factors[1])};
}

/// Masses of all rectangles I_i x J_j, indexed i * m + j.
inline std::vector<double> cell_masses(const GridDensity& d, const PartitionPair& pp) {
    std::vector<double> out;
    out.reserve(pp.n() * pp.m());
    for (std::size_t i = 0; i < pp.n(); ++i)
        for (std::size_t j = 0; j < pp.m(); ++j)
            out.push_back(rectangle_mass(d, pp.x_cuts[i], pp.x_cuts[i + 1], pp.y_cuts[j], pp.y_cuts[j + 1]));
    return out;
}

/// s_ij = max(0, mu(I_i x J_j) - (c - eps)): the open eps-relaxation of
/// {mu(I_i x J_j) >= c}. A degenerate segment carries no mass, so the
/// score vanishes on the forbidden facets.
inline ScoreField build_threshold_scores(const GridDensity& d, double c, double eps, std::size_t n, std::size_t m) {
    if (!(c > 0.0))
        throw InvalidInput("threshold c must be positive");
    if (!(eps > 0.0 && eps < c))
        throw InvalidInput("relaxation eps must satisfy 0 < eps < c");
    const double floor_level = c - eps;
    return ScoreField({n, m}, [d, floor_level, n, m](std::span<const ScoreField::Coords> p, std::span<double> out) {
        auto xs = cumulative_cuts(p[0]);
        auto ys = cumulative_cuts(p[1]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double mass = rectangle_mass(d, xs[i], xs[i + 1], ys[j], ys[j + 1]);
                out[i * m + j] = std::max(0.0, mass - floor_level);
            }
    });
}

/// Every rectangle has mass below c; max_mass is the largest of them.
struct AllBelow {
    PartitionPair partition;
    double max_mass = 0.0;
};

/// Every rectangle I_{sigma(j)} x J_j has mass at least min_mass >= c - eps.
struct QuotaPartition {
    PartitionPair partition;
    Assignment assignment;
    double min_mass = 0.0;
};

using SquarePartitionResult = std::variant<AllBelow, QuotaPartition, SolverExhausted>;

struct SquarePartitionOptions {
    double eps = 0.0;  // 0 selects 1e-6 * c
    SearchOptions search{};
};

inline SquarePartitionResult solve_square_partition(const GridDensity& d, double c, std::size_t n, std::size_t m,
                                                    const QuotaVector& a, const SquarePartitionOptions& opt = {}) {
    if (n == 0 || n > m)
        throw InvalidInput("square partition needs 1 <= n <= m");
    if (a.size() != n || a.target != m)
        throw InvalidInput("quota vector must have n entries summing to m");
    const double eps = opt.eps > 0.0 ? opt.eps : 1e-6 * c;
    if (!(eps < c))
        throw InvalidInput("relaxation eps must satisfy 0 < eps < c");

    // An uncovered point of any relaxation c - e >= c - eps has every mass
    // at most c - e < c, so it certifies the first alternative.
    auto all_below = [&](const ProductPoint& p) -> SquarePartitionResult {
        auto pp = partition_from_point(p);
        auto masses = cell_masses(d, pp);
        double top = *std::max_element(masses.begin(), masses.end());
        if (!(top < c))
            return SolverExhausted{p, 0.0, "uncovered point failed mass re-verification"};
        return AllBelow{pp, top};
    };

    auto attempt = [&](double relax, const SearchOptions& search) {
        return solve_kkm_product(build_threshold_scores(d, c, relax, n, m), a, search);
    };

    auto result = attempt(eps, opt.search);
    if (std::holds_alternative<SolverExhausted>(result)) {
        // Continuation: solve wide relaxations first and seed each narrower
        // one with the previous balanced point.
        SearchOptions search = opt.search;
        for (double relax = 0.5 * c; relax > eps; relax *= 0.25) {
            auto stage = attempt(relax, search);
            if (auto* nc = std::get_if<NotCovered>(&stage))
                return all_below(nc->point);
            if (auto* sol = std::get_if<KkmSolution>(&stage))
                search.seeds = {sol->point};
        }
        if (!search.seeds.empty())
            result = attempt(eps, search);
    }

    if (auto* nc = std::get_if<NotCovered>(&result))
        return all_below(nc->point);
    if (auto* sol = std::get_if<KkmSolution>(&result)) {
        auto pp = partition_from_point(sol->point);
        auto masses = cell_masses(d, pp);
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j)
            low = std::min(low, masses[sol->assignment.sigma[j] * m + j]);
        if (!(low >= c - eps))
            return SolverExhausted{sol->point, sol->residual, "quota rectangles failed mass re-verification"};
        return QuotaPartition{pp, sol->assignment, low};
    }
    return std::get<SolverExhausted>(result);
}

} // namespace kkmcut
