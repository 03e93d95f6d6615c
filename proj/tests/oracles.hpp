#pragma once

// Brute-force reference implementations used to check the solvers. They
// share no code paths with the library algorithms they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "kkmcut/lines.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/measure.hpp"
#include "kkmcut/simplex.hpp"

namespace kkmcut::testing {

inline double choose(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// Any map sigma: [m] -> [n] along edges with the quotas? Plain enumeration
/// of all n^m maps.
inline bool brute_quota_feasible(const BipartiteGraph& g, const QuotaVector& a) {
    const std::size_t n = g.n(), m = g.m();
    std::vector<std::size_t> sigma(m, 0);
    while (true) {
        std::vector<std::size_t> counts(n, 0);
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
            ok = g.has_edge(sigma[j], j);
            ++counts[sigma[j]];
        }
        if (ok && counts == a.a)
            return true;
        std::size_t j = 0;
        while (j < m && ++sigma[j] == n)
            sigma[j++] = 0;
        if (j == m)
            return false;
    }
}

/// |N(subset)| computed straight from has_edge.
inline std::size_t brute_neighborhood(const BipartiteGraph& g, const std::vector<std::size_t>& subset) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < g.m(); ++j)
        for (auto i : subset)
            if (g.has_edge(i, j)) {
                ++count;
                break;
            }
    return count;
}

/// Largest matching by enumerating every edge subset.
inline std::size_t brute_max_matching(const Hypergraph& h) {
    const std::size_t e = h.edges.size();
    std::size_t best = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << e); ++mask) {
        std::size_t size = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (size <= best)
            continue;
        bool ok = true;
        for (std::size_t p = 0; p < e && ok; ++p)
            for (std::size_t q = p + 1; q < e && ok; ++q)
                if ((mask >> p & 1) && (mask >> q & 1))
                    for (std::size_t k = 0; k < h.r; ++k)
                        ok = ok && h.edges[p][k] != h.edges[q][k];
        if (ok)
            best = size;
    }
    return best;
}

inline bool brute_box_hit(const Box2& b, const std::vector<double>& xs, const std::vector<double>& ys, bool open) {
    auto inside = [open](double lo, double hi, double p) { return open ? lo < p && p < hi : lo <= p && p <= hi; };
    for (double x : xs)
        if (inside(b.x.lo, b.x.hi, x))
            return true;
    for (double y : ys)
        if (inside(b.y.lo, b.y.hi, y))
            return true;
    return false;
}

/// Candidate positions: every projection endpoint and every midpoint
/// between consecutive endpoints.
inline std::vector<double> brute_positions(const Family& f, bool x_axis) {
    std::vector<double> e;
    for (const auto& b : f.sets) {
        e.push_back(x_axis ? b.x.lo : b.y.lo);
        e.push_back(x_axis ? b.x.hi : b.y.hi);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    std::vector<double> out = e;
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        out.push_back(0.5 * (e[i] + e[i + 1]));
    return out;
}

/// Can n vertical and m horizontal lines cut the family? Exhaustive over
/// all position subsets.
inline bool brute_cuttable(const Family& f, std::size_t n, std::size_t m) {
    const auto xs = brute_positions(f, true);
    const auto ys = brute_positions(f, false);
    std::vector<std::vector<double>> vsets{{}}, hsets{{}};
    auto grow = [](std::vector<std::vector<double>>& sets, const std::vector<double>& pos, std::size_t k) {
        std::vector<std::vector<double>> frontier = sets;
        for (std::size_t size = 1; size <= k; ++size) {
            std::vector<std::vector<double>> next;
            for (const auto& s : frontier)
                for (double p : pos)
                    if (s.empty() || p > s.back()) {
                        auto t = s;
                        t.push_back(p);
                        next.push_back(t);
                    }
            sets.insert(sets.end(), next.begin(), next.end());
            frontier = std::move(next);
        }
    };
    grow(vsets, xs, n);
    grow(hsets, ys, m);
    for (const auto& v : vsets)
        for (const auto& h : hsets) {
            bool all = true;
            for (const auto& b : f.sets)
                if (!brute_box_hit(b, v, h, f.open)) {
                    all = false;
                    break;
                }
            if (all)
                return true;
        }
    return false;
}

inline bool brute_disjoint(const Interval& a, const Interval& b, bool open) {
    return open ? (a.hi <= b.lo || b.hi <= a.lo) : (a.hi < b.lo || b.hi < a.lo);
}

/// Some (m+1)-subfamily and map with the witness pattern for quota a?
/// Enumerates bitmasks and all (n+1)^(m+1) labelings.
inline bool brute_witness_exists(const Family& f, std::size_t n, std::size_t m, const std::vector<std::size_t>& a) {
    const std::size_t k = m + 1, size = f.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << size); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k)
            continue;
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < size; ++i)
            if (mask >> i & 1)
                ids.push_back(i);
        std::vector<std::size_t> label(k, 0);
        while (true) {
            std::vector<std::size_t> counts(n + 1, 0);
            for (auto l : label)
                ++counts[l];
            if (counts == a) {
                bool ok = true;
                for (std::size_t p = 0; p < k && ok; ++p)
                    for (std::size_t q = p + 1; q < k && ok; ++q) {
                        ok = brute_disjoint(f[ids[p]].y, f[ids[q]].y, f.open);
                        if (ok && label[p] != label[q])
                            ok = brute_disjoint(f[ids[p]].x, f[ids[q]].x, f.open);
                    }
                if (ok)
                    return true;
            }
            std::size_t t = 0;
            while (t < k && ++label[t] == n + 1)
                label[t++] = 0;
            if (t == k)
                break;
        }
    }
    return false;
}

/// Mass of a rectangle by summing cell-overlap areas.
inline double brute_rectangle_mass(const GridDensity& d, double x_lo, double x_hi, double y_lo, double y_hi) {
    double total = 0.0;
    const double kx = static_cast<double>(d.kx()), ky = static_cast<double>(d.ky());
    for (std::size_t iy = 0; iy < d.ky(); ++iy)
        for (std::size_t ix = 0; ix < d.kx(); ++ix) {
            double ox = std::max(0.0, std::min(x_hi, (ix + 1) / kx) - std::max(x_lo, ix / kx));
            double oy = std::max(0.0, std::min(y_hi, (iy + 1) / ky) - std::max(y_lo, iy / ky));
            total += d.values()[iy * d.kx() + ix] * ox * oy;
        }
    return total;
}

/// Row and column sums of phi over an n x m table, recomputed directly.
inline double brute_residual(const std::vector<double>& scores, std::size_t n, std::size_t m,
                             const std::vector<std::size_t>& a) {
    double sum = 0.0;
    for (double v : scores)
        sum += v;
    double row_dev = 0.0, col_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            f += scores[i * m + j] / sum;
        row_dev = std::max(row_dev, std::abs(f - static_cast<double>(a[i]) / static_cast<double>(m)));
    }
    for (std::size_t j = 0; j < m; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            g += scores[i * m + j] / sum;
        col_dev = std::max(col_dev, std::abs(g - 1.0 / static_cast<double>(m)));
    }
    return row_dev + col_dev;
}

/// Seeded family of `size` boxes. Integer coordinates on a small grid make
/// shared endpoints common; otherwise coordinates are continuous.
inline Family random_family(std::mt19937_64& rng, std::size_t size, bool integer_grid, bool open) {
    Family f{{}, open};
    std::uniform_int_distribution<int> grid(0, 12), len(1, 5);
    std::uniform_real_distribution<double> pos(0.0, 10.0), width(0.2, 4.0);
    for (std::size_t k = 0; k < size; ++k) {
        if (integer_grid) {
            int x = grid(rng), y = grid(rng);
            f.sets.push_back(make_box(x, x + len(rng), y, y + len(rng)));
        } else {
            double x = pos(rng), y = pos(rng);
            f.sets.push_back(make_box(x, x + width(rng), y, y + width(rng)));
        }
    }
    return f;
}

/// Weighted sub-hypergraph of H(n, 3) whose weights form a perfect
/// fractional matching: a random convex combination of perfect matchings
/// {(i, pi(i), tau(i))} and Latin-square matchings {(i, j, L(i, j))}.
inline Hypergraph random_fractional_matching(std::mt19937_64& rng, std::size_t n) {
    constexpr std::size_t r = 3;
    std::map<std::vector<std::size_t>, double> weight;
    std::uniform_int_distribution<int> parts(1, 4);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    const int k = parts(rng);
    std::vector<double> lambda;
    for (int t = 0; t < k; ++t)
        lambda.push_back(unit(rng));
    const double sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (int t = 0; t < k; ++t) {
        const double lam = lambda[t] / sum;
        if (rng() % 3 == 0) {
            // Latin square L(i, j) = perm[(i + j + shift) mod n]
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            const std::size_t shift = rng() % n;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    weight[{i, j, perm[(i + j + shift) % n]}] += lam / static_cast<double>(n * n);
        } else {
            std::vector<std::size_t> pi(n), tau(n);
            std::iota(pi.begin(), pi.end(), std::size_t{0});
            std::iota(tau.begin(), tau.end(), std::size_t{0});
            std::shuffle(pi.begin(), pi.end(), rng);
            std::shuffle(tau.begin(), tau.end(), rng);
            for (std::size_t i = 0; i < n; ++i)
                weight[{i, pi[i], tau[i]}] += lam / static_cast<double>(n);
        }
    }
    Hypergraph h{r, n, {}, std::vector<double>{}};
    for (const auto& [e, w] : weight) {
        h.edges.push_back(e);
        h.weights->push_back(w);
    }
    // shuffle edge order so the solver sees no structure
    std::vector<std::size_t> order(h.edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    Hypergraph out{r, n, {}, std::vector<double>{}};
    for (auto i : order) {
        out.edges.push_back(h.edges[i]);
        out.weights->push_back((*h.weights)[i]);
    }
    return out;
}

} // namespace kkmcut::testing
