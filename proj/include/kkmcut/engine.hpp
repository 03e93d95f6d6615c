#pragma once

// Constructive KKM-type solvers for products of simplices.
//
// A covering of the product by score supports yields a partition of unity
// phi. At a balanced point the marginals of phi along every factor hit
// prescribed targets (a_i/m for rows, 1/m for columns in the two-factor
// case); the support graph of phi there admits a quota assignment, which
// certifies that the sets A_{sigma(j) j} share a common point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kkmcut/errors.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/simplex.hpp"

namespace kkmcut {

/// Per-factor marginal targets. Each row is itself a barycentric point, so
/// the target also serves as the natural first probe of the search.
struct BalancedTarget {
    std::vector<std::vector<Rational>> rows;

    /// Two factors: rows a_i/m, columns 1/m.
    static BalancedTarget quota(const QuotaVector& a) {
        const auto m = static_cast<std::int64_t>(a.target);
        BalancedTarget t;
        t.rows.resize(2);
        for (auto v : a.a)
            t.rows[0].emplace_back(static_cast<std::int64_t>(v), m);
        t.rows[1].assign(a.target, Rational(1, m));
        return t;
    }

    /// r factors with n vertices each, every marginal 1/n.
    static BalancedTarget uniform(std::size_t r, std::size_t n) {
        BalancedTarget t;
        t.rows.assign(r, std::vector<Rational>(n, Rational(1, static_cast<std::int64_t>(n))));
        return t;
    }

    ProductPoint seed() const {
        ProductPoint p;
        for (const auto& row : rows)
            p.factors.push_back(validate_barycentric(row));
        return p;
    }
};

/// f_{kl} = sum of phi_t over tuples t with t_k = l.
inline std::vector<std::vector<double>> marginals(std::span<const double> phi, std::span<const std::size_t> shape) {
    std::vector<std::vector<double>> f(shape.size());
    for (std::size_t k = 0; k < shape.size(); ++k)
        f[k].assign(shape[k], 0.0);
    for (std::size_t flat = 0; flat < phi.size(); ++flat) {
        if (phi[flat] == 0.0)
            continue;
        auto rest = flat;
        for (std::size_t k = shape.size(); k-- > 0;) {
            f[k][rest % shape[k]] += phi[flat];
            rest /= shape[k];
        }
    }
    return f;
}

/// Sum over factors of the largest marginal deviation from target.
inline double balance_residual(std::span<const double> phi, std::span<const std::size_t> shape,
                               const BalancedTarget& target) {
    auto f = marginals(phi, shape);
    double r = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        double worst = 0.0;
        for (std::size_t l = 0; l < f[k].size(); ++l)
            worst = std::max(worst, std::abs(f[k][l] - to_double(target.rows[k][l])));
        r += worst;
    }
    return r;
}

struct SearchOptions {
    double tol = 1e-7;
    int budget = 40;                   // refinement steps
    std::int64_t base_resolution = 8;  // lattice resolution per factor
    int window_radius = 2;             // local grid half-width, in grid steps
    std::size_t beam = 4;              // centers kept between refinements
    std::vector<ProductPoint> seeds;   // probed before the built-in seeds
};

struct BalancedPoint {
    ProductPoint point;
    double residual = 0.0;
    std::vector<double> history;  // best residual after the base pass and each refinement or restart stage
};

struct NotCovered {
    ProductPoint point;
};

struct ResidualAboveTolerance {
    ProductPoint point;
    double residual = 0.0;
    std::vector<double> history;
};

using SearchResult = std::variant<BalancedPoint, NotCovered, ResidualAboveTolerance>;

namespace detail {

// Integer offset vectors with zero sum and entries in [-radius, radius].
inline std::vector<std::vector<int>> zero_sum_offsets(std::size_t len, int radius) {
    std::vector<std::vector<int>> out;
    std::vector<int> d(len, 0);
    auto rec = [&](auto&& self, std::size_t pos, int sum) -> void {
        if (pos + 1 == len) {
            if (-sum >= -radius && -sum <= radius) {
                d[pos] = -sum;
                out.push_back(d);
            }
            return;
        }
        for (int v = -radius; v <= radius; ++v) {
            d[pos] = v;
            self(self, pos + 1, sum + v);
        }
    };
    if (len == 0)
        return out;
    rec(rec, 0, 0);
    return out;
}

struct Candidate {
    ProductPoint point;
    double residual;
};

// Keeps the best k distinct candidates; earlier insertions win ties.
class Beam {
public:
    explicit Beam(std::size_t k) : k_(std::max<std::size_t>(k, 1)) {}

    void offer(const ProductPoint& p, double residual) {
        if (items_.size() == k_ && !(residual < items_.back().residual))
            return;
        for (const auto& c : items_)
            if (c.point == p)
                return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), residual,
                                    [](double r, const Candidate& c) { return r < c.residual; });
        items_.insert(pos, Candidate{p, residual});
        if (items_.size() > k_)
            items_.pop_back();
    }

    const std::vector<Candidate>& items() const { return items_; }
    const Candidate& best() const { return items_.front(); }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

class Prober {
public:
    Prober(const ScoreField& s, const BalancedTarget& t) : s_(s), t_(t), scores_(s.size()) {}

    // Residual at p, or nullopt when no score is positive there.
    std::optional<double> operator()(const ProductPoint& p) {
        auto c = p.to_doubles();
        s_.eval(c, scores_);
        auto w = normalize_scores(scores_);
        double sum = 0.0;
        for (double v : scores_)
            sum += v;
        if (!(sum > 0.0))
            return std::nullopt;
        return balance_residual(w.phi, s_.shape(), t_);
    }

private:
    const ScoreField& s_;
    const BalancedTarget& t_;
    std::vector<double> scores_;
};

// Solves M x = b in place by Gaussian elimination with partial pivoting.
inline bool solve_dense(std::vector<double>& M, std::vector<double>& b, std::size_t d) {
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::abs(M[r * d + c]) > std::abs(M[piv * d + c]))
                piv = r;
        if (!(std::abs(M[piv * d + c]) > 1e-14))
            return false;
        if (piv != c) {
            for (std::size_t k = 0; k < d; ++k)
                std::swap(M[c * d + k], M[piv * d + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < d; ++r) {
            const double f = M[r * d + c] / M[c * d + c];
            if (f == 0.0)
                continue;
            for (std::size_t k = c; k < d; ++k)
                M[r * d + k] -= f * M[c * d + k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = d; c-- > 0;) {
        double v = b[c];
        for (std::size_t k = c + 1; k < d; ++k)
            v -= M[c * d + k] * b[k];
        b[c] = v / M[c * d + c];
    }
    return true;
}

// Cumulative chart: factor coordinates u_1 <= ... <= u_{L-1} in [0, scale]
// become t_i = u_i - u_{i-1}, rounded to denominator denom.
inline ProductPoint chart_point(std::span<const std::size_t> shape, const std::vector<double>& u, double scale,
                                std::int64_t denom) {
    ProductPoint p;
    std::size_t c = 0;
    for (auto len : shape) {
        std::vector<Rational> t(len);
        std::int64_t prev = 0;
        for (std::size_t i = 0; i + 1 < len; ++i, ++c) {
            auto cur = static_cast<std::int64_t>(std::llround(u[c] / scale * static_cast<double>(denom)));
            cur = std::clamp(cur, prev, denom);
            t[i] = Rational(cur - prev, denom);
            prev = cur;
        }
        t[len - 1] = Rational(denom - prev, denom);
        p.factors.push_back(make_unchecked(std::move(t)));
    }
    return p;
}

inline std::vector<double> chart_coords(const ProductPoint& p) {
    std::vector<double> u;
    for (const auto& f : p.factors) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            acc += to_double(f[i]);
            u.push_back(acc);
        }
    }
    return u;
}

struct PlScan {
    std::vector<ProductPoint> roots;       // best first
    std::optional<ProductPoint> uncovered;
    bool skipped = false;                  // triangulation too large
};

// Zeros of the piecewise-linear interpolant of the marginal map on the Kuhn
// triangulation at resolution N. Each factor of length L is charted by
// cumulative coordinates 0 <= u_1 <= ... <= u_{L-1} <= N; the order region is
// a union of Kuhn simplices, and the interpolant maps every facet into the
// matching facet, so some simplex always carries the target.
inline PlScan pl_roots(const ScoreField& s, const BalancedTarget& target, std::int64_t N, std::size_t keep,
                       double simplex_cap) {
    PlScan scan;
    const auto shape = s.shape();
    std::vector<std::size_t> block;  // factor owning each chart coordinate
    for (std::size_t k = 0; k < shape.size(); ++k)
        for (std::size_t i = 0; i + 1 < shape[k]; ++i)
            block.push_back(k);
    const std::size_t D = block.size();
    double count = std::pow(static_cast<double>(N), static_cast<double>(D));
    for (std::size_t k = 2; k <= D; ++k)
        count *= static_cast<double>(k);
    if (D == 0 || count > simplex_cap) {
        scan.skipped = D != 0;
        return scan;
    }

    auto to_point = [&](const std::vector<double>& u, std::int64_t denom) {
        return chart_point(shape, u, static_cast<double>(N), denom);
    };

    // F: the first L-1 marginals of every factor, minus their targets.
    std::vector<double> goal;
    for (std::size_t k = 0; k < shape.size(); ++k)
        for (std::size_t i = 0; i + 1 < shape[k]; ++i)
            goal.push_back(to_double(target.rows[k][i]));
    std::vector<double> scores(s.size());
    std::vector<std::optional<std::vector<double>>> cache;
    std::vector<char> known;
    const auto side = static_cast<std::size_t>(N + 1);
    std::size_t cells = 1;
    for (std::size_t d = 0; d < D; ++d)
        cells *= side;
    cache.resize(cells);
    known.assign(cells, 0);
    auto value = [&](const std::vector<std::int64_t>& v) -> const std::optional<std::vector<double>>& {
        std::size_t key = 0;
        for (auto x : v)
            key = key * side + static_cast<std::size_t>(x);
        if (!known[key]) {
            known[key] = 1;
            std::vector<double> u(v.begin(), v.end());
            auto p = to_point(u, N);
            s.eval(p.to_doubles(), scores);
            double sum = 0.0;
            for (double x : scores)
                sum += x;
            if (sum > 0.0) {
                auto w = normalize_scores(scores);
                auto f = marginals(w.phi, shape);
                std::vector<double> out;
                for (std::size_t k = 0; k < shape.size(); ++k)
                    for (std::size_t i = 0; i + 1 < shape[k]; ++i)
                        out.push_back(f[k][i]);
                cache[key] = std::move(out);
            } else if (!scan.uncovered) {
                scan.uncovered = p;
            }
        }
        return cache[key];
    };
    auto ordered = [&](const std::vector<std::int64_t>& v) {
        for (std::size_t d = 0; d + 1 < D; ++d)
            if (block[d] == block[d + 1] && v[d] > v[d + 1])
                return false;
        return true;
    };

    std::vector<Candidate> found;
    std::vector<std::int64_t> corner(D, 0);
    std::vector<std::size_t> perm(D);
    std::vector<std::vector<std::int64_t>> verts(D + 1);
    std::vector<double> M((D + 1) * (D + 1)), rhs(D + 1);
    Prober probe(s, target);
    bool more = true;
    while (more) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        do {
            verts[0] = corner;
            bool valid = ordered(verts[0]);
            for (std::size_t k = 0; k < D && valid; ++k) {
                verts[k + 1] = verts[k];
                ++verts[k + 1][perm[k]];
                valid = ordered(verts[k + 1]);
            }
            if (!valid)
                continue;
            bool covered = true;
            for (std::size_t k = 0; k <= D && covered; ++k) {
                const auto& fv = value(verts[k]);
                if (!fv) {
                    covered = false;
                    break;
                }
                for (std::size_t d = 0; d < D; ++d)
                    M[d * (D + 1) + k] = (*fv)[d];
                M[D * (D + 1) + k] = 1.0;
            }
            if (!covered)
                return scan;
            for (std::size_t d = 0; d < D; ++d)
                rhs[d] = goal[d];
            rhs[D] = 1.0;
            if (!solve_dense(M, rhs, D + 1))
                continue;
            if (*std::min_element(rhs.begin(), rhs.end()) < -1e-9)
                continue;
            std::vector<double> u(D, 0.0);
            for (std::size_t k = 0; k <= D; ++k)
                for (std::size_t d = 0; d < D; ++d)
                    u[d] += rhs[k] * static_cast<double>(verts[k][d]);
            auto p = to_point(u, N * 64);
            if (auto r = probe(p))
                found.push_back(Candidate{p, *r});
        } while (std::next_permutation(perm.begin(), perm.end()));
        more = false;
        for (std::size_t d = D; d-- > 0;) {
            if (++corner[d] < N) {
                more = true;
                break;
            }
            corner[d] = 0;
        }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Candidate& a, const Candidate& b) { return a.residual < b.residual; });
    for (std::size_t i = 0; i < found.size() && scan.roots.size() < keep; ++i)
        scan.roots.push_back(found[i].point);
    return scan;
}

// Damped Newton on the marginal map in chart coordinates, from p. Returns the
// best rounded point it reaches, or nullopt when it never improves on p.
inline std::optional<Candidate> newton_polish(const ScoreField& s, const BalancedTarget& target,
                                              const Candidate& start, int iterations) {
    const auto shape = s.shape();
    std::vector<double> goal;
    std::vector<std::size_t> block;
    for (std::size_t k = 0; k < shape.size(); ++k)
        for (std::size_t i = 0; i + 1 < shape[k]; ++i) {
            goal.push_back(to_double(target.rows[k][i]));
            block.push_back(k);
        }
    const std::size_t D = goal.size();
    if (D == 0)
        return std::nullopt;
    std::vector<double> scores(s.size());
    // marginal map minus goal; nullopt outside the domain or off the cover
    auto F = [&](const std::vector<double>& u) -> std::optional<std::vector<double>> {
        std::vector<ScoreField::Coords> c;
        std::size_t at = 0;
        for (auto len : shape) {
            ScoreField::Coords t(len);
            double prev = 0.0;
            for (std::size_t i = 0; i + 1 < len; ++i, ++at) {
                if (u[at] < prev || u[at] > 1.0)
                    return std::nullopt;
                t[i] = u[at] - prev;
                prev = u[at];
            }
            t[len - 1] = 1.0 - prev;
            c.push_back(std::move(t));
        }
        s.eval(c, scores);
        double sum = 0.0;
        for (double x : scores)
            sum += x;
        if (!(sum > 0.0))
            return std::nullopt;
        auto f = marginals(normalize_scores(scores).phi, shape);
        std::vector<double> out;
        for (std::size_t k = 0; k < shape.size(); ++k)
            for (std::size_t i = 0; i + 1 < shape[k]; ++i)
                out.push_back(f[k][i] - goal[out.size()]);
        return out;
    };
    auto norm = [](const std::vector<double>& v) {
        double r = 0.0;
        for (double x : v)
            r = std::max(r, std::abs(x));
        return r;
    };

    Prober probe(s, target);
    auto u = chart_coords(start.point);
    auto fu = F(u);
    if (!fu)
        return std::nullopt;
    std::optional<Candidate> best;
    double best_residual = start.residual;
    constexpr std::int64_t denom = std::int64_t{1} << 40;
    std::vector<double> J(D * D), rhs(D);
    for (int it = 0; it < iterations; ++it) {
        const double h = 1e-7;
        bool ok = true;
        for (std::size_t d = 0; d < D && ok; ++d) {
            auto up = u, dn = u;
            up[d] += h;
            dn[d] -= h;
            auto fp = F(up), fm = F(dn);
            double width = 2 * h;
            if (!fp) {
                fp = fu;
                up = u;
                width = h;
            }
            if (!fm) {
                fm = fu;
                width = up == u ? 0.0 : h;
            }
            if (width == 0.0) {
                ok = false;
                break;
            }
            for (std::size_t e = 0; e < D; ++e)
                J[e * D + d] = ((*fp)[e] - (*fm)[e]) / width;
        }
        if (!ok)
            break;
        for (std::size_t e = 0; e < D; ++e)
            rhs[e] = -(*fu)[e];
        if (!solve_dense(J, rhs, D))
            break;
        bool moved = false;
        for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
            auto v = u;
            for (std::size_t d = 0; d < D; ++d)
                v[d] += lambda * rhs[d];
            auto fv = F(v);
            if (fv && norm(*fv) < norm(*fu)) {
                u = std::move(v);
                fu = std::move(fv);
                moved = true;
                break;
            }
        }
        if (!moved)
            break;
        auto p = chart_point(shape, u, 1.0, denom);
        if (auto r = probe(p); r && *r < best_residual) {
            best_residual = *r;
            best = Candidate{p, *r};
        }
    }
    return best;
}

} // namespace detail

/// Multi-resolution search for a point whose partition-of-unity marginals
/// match the target. Probes the target point and the barycenter, then the full product lattice
/// at the base resolution, then repeatedly re-grids a window of halving
/// width around the best centers. The base lattice is always probed, and
/// any uncovered probe ends the search.
inline SearchResult balanced_point_search(const ScoreField& s, const BalancedTarget& target,
                                          const SearchOptions& opt = {}) {
    if (!(opt.tol > 0.0))
        throw InvalidInput("tolerance must be positive");
    if (opt.budget < 0 || opt.budget > 48)
        throw InvalidInput("refinement budget must lie in [0, 48]");
    if (opt.base_resolution < 1 || opt.base_resolution > 64)
        throw InvalidInput("base resolution must lie in [1, 64]");
    if (target.rows.size() != s.factors())
        throw InvalidInput("target has " + std::to_string(target.rows.size()) + " factors, field has " +
                           std::to_string(s.factors()));
    for (std::size_t k = 0; k < s.factors(); ++k)
        if (target.rows[k].size() != s.shape()[k])
            throw InvalidInput("target row " + std::to_string(k) + " does not match the field shape");

    detail::Prober probe(s, target);
    detail::Beam beam(opt.beam);
    std::vector<double> history;

    // Seeds: caller-supplied points, the target point, then the product of
    // factor barycenters.
    ProductPoint center;
    for (auto len : s.shape())
        center.factors.push_back(
            make_unchecked(std::vector<Rational>(len, Rational(1, static_cast<std::int64_t>(len)))));
    std::vector<ProductPoint> seeds = opt.seeds;
    seeds.push_back(target.seed());
    seeds.push_back(center);
    for (const auto& seed : seeds) {
        if (seed.factors.size() != s.factors())
            throw InvalidInput("search seed has the wrong number of factors");
        auto r0 = probe(seed);
        if (!r0)
            return NotCovered{seed};
        beam.offer(seed, *r0);
    }

    std::optional<ProductPoint> uncovered;
    for_each_product_lattice_point(s.shape(), opt.base_resolution, [&](const ProductPoint& p) {
        auto r = probe(p);
        if (!r) {
            uncovered = p;
            return false;
        }
        beam.offer(p, *r);
        return true;
    });
    if (uncovered)
        return NotCovered{*uncovered};
    history.push_back(beam.best().residual);

    std::vector<std::vector<std::vector<int>>> offsets;
    for (auto len : s.shape())
        offsets.push_back(detail::zero_sum_offsets(len, opt.window_radius));

    // Re-grids windows of halving width around the beam centers.
    std::optional<ProductPoint> hole;
    auto zoom = [&](detail::Beam& b, std::int64_t denom, bool record) {
        for (int step = 1; step <= opt.budget && !(b.best().residual < opt.tol); ++step) {
            denom *= 2;
            const auto centers = b.items();
            for (const auto& c : centers) {
                // odometer over the per-factor offset lists
                std::vector<std::size_t> idx(s.factors(), 0);
                ProductPoint p;
                p.factors.resize(s.factors());
                bool done = false;
                while (!done) {
                    bool inside = true;
                    for (std::size_t k = 0; k < s.factors() && inside; ++k) {
                        const auto& base = c.point.factors[k];
                        const auto& d = offsets[k][idx[k]];
                        std::vector<Rational> x(base.size());
                        for (std::size_t i = 0; i < base.size(); ++i) {
                            x[i] = base[i] + Rational(d[i], denom);
                            if (x[i] < Rational(0)) {
                                inside = false;
                                break;
                            }
                        }
                        if (inside)
                            p.factors[k] = make_unchecked(std::move(x));
                    }
                    if (inside) {
                        auto r = probe(p);
                        if (!r) {
                            hole = p;
                            return;
                        }
                        b.offer(p, *r);
                    }
                    std::size_t k = s.factors();
                    done = true;
                    while (k > 0) {
                        --k;
                        if (++idx[k] < offsets[k].size()) {
                            done = false;
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
            if (record)
                history.push_back(b.best().residual);
        }
    };

    zoom(beam, opt.base_resolution, true);
    if (hole)
        return NotCovered{*hole};

    // Stalled in a spurious local minimum: restart from the zeros of the
    // piecewise-linear interpolant on successively finer triangulations.
    for (std::int64_t N = opt.base_resolution; !(beam.best().residual < opt.tol) && N <= 4 * opt.base_resolution;
         N *= 2) {
        auto scan = detail::pl_roots(s, target, N, 4 * opt.beam, 4e6);
        if (scan.uncovered)
            return NotCovered{*scan.uncovered};
        if (scan.skipped)
            break;
        for (const auto& root : scan.roots) {
            detail::Beam local(opt.beam);
            auto r = probe(root);
            if (!r)
                return NotCovered{root};
            local.offer(root, *r);
            zoom(local, N, false);
            if (hole)
                return NotCovered{*hole};
            beam.offer(local.best().point, local.best().residual);
            if (beam.best().residual < opt.tol)
                break;
        }
        history.push_back(beam.best().residual);
    }

    if (!(beam.best().residual < opt.tol)) {
        const auto centers = beam.items();
        for (const auto& c : centers)
            if (auto polished = detail::newton_polish(s, target, c, 30))
                beam.offer(polished->point, polished->residual);
        history.push_back(beam.best().residual);
    }

    const auto& best = beam.best();
    if (best.residual < opt.tol)
        return BalancedPoint{best.point, best.residual, history};
    return ResidualAboveTolerance{best.point, best.residual, history};
}

struct ExtractionFailed {};

/// Thresholds tried by the support sweep: start, start/2, ..., then 0.
inline std::vector<double> delta_sweep(double start) {
    std::vector<double> out;
    for (double d = start; d > 1e-18; d *= 0.5)
        out.push_back(d);
    out.push_back(0.0);
    return out;
}

/// Quota assignment inside the support {phi_ij > delta} for the largest
/// delta of the sweep that admits one.
inline std::variant<Assignment, ExtractionFailed> extract_assignment(const UnityWeights& w, const QuotaVector& a) {
    const std::size_t n = a.size(), m = a.target;
    if (w.phi.size() != n * m)
        throw InvalidInput("weights do not match an n x m index shape");
    for (double delta : delta_sweep(1.0 / (2.0 * static_cast<double>(n * m)))) {
        BipartiteGraph g(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (w.phi[i * m + j] > delta)
                    g.add_edge(i, j);
        auto r = quota_matching(g, a);
        if (auto* s = std::get_if<Assignment>(&r))
            return *s;
    }
    return ExtractionFailed{};
}

struct KkmSolution {
    ProductPoint point;
    Assignment assignment;
    double residual = 0.0;
    UnityWeights weights;
};

struct SolverExhausted {
    ProductPoint best_point;
    double best_residual = std::numeric_limits<double>::infinity();
    std::string reason;
};

using KkmResult = std::variant<KkmSolution, NotCovered, SolverExhausted>;

/// Recomputes everything a KkmSolution claims from the field itself.
inline bool validate_solution(const ScoreField& s, const QuotaVector& a, const KkmSolution& sol, double tol) {
    if (s.factors() != 2 || s.shape()[0] != a.size() || s.shape()[1] != a.target)
        return false;
    const std::size_t m = a.target;
    if (sol.assignment.sigma.size() != m)
        return false;
    for (auto i : sol.assignment.sigma)
        if (i >= a.size())
            return false;
    if (sol.assignment.counts(a.size()) != a.a)
        return false;
    auto scores = s(sol.point);
    for (std::size_t j = 0; j < m; ++j)
        if (!(scores[sol.assignment.sigma[j] * m + j] > 0.0))
            return false;
    auto w = normalize_scores(scores);
    double r = balance_residual(w.phi, s.shape(), BalancedTarget::quota(a));
    return r <= tol && std::abs(r - sol.residual) <= 1e-12;
}

/// Searches for a balanced point and extracts a quota assignment from its
/// support; tightens the tolerance and searches again when extraction fails.
inline KkmResult solve_kkm_product(const ScoreField& s, const QuotaVector& a, const SearchOptions& opt = {}) {
    if (s.factors() != 2)
        throw InvalidInput("two-factor solver needs a field over exactly two simplices");
    if (s.shape()[0] != a.size() || s.shape()[1] != a.target)
        throw InvalidInput("quota vector does not match the field shape (n = " + std::to_string(s.shape()[0]) +
                           ", m = " + std::to_string(s.shape()[1]) + ")");
    const auto target = BalancedTarget::quota(a);
    auto local = opt;
    SolverExhausted last{target.seed(), std::numeric_limits<double>::infinity(), "no attempt made"};
    for (int attempt = 0; attempt < 4 && local.tol >= 1e-15; ++attempt, local.tol *= 1e-3) {
        auto found = balanced_point_search(s, target, local);
        if (auto* nc = std::get_if<NotCovered>(&found))
            return *nc;
        if (auto* ra = std::get_if<ResidualAboveTolerance>(&found))
            return SolverExhausted{ra->point, ra->residual, "refinement budget exhausted"};
        auto& bp = std::get<BalancedPoint>(found);
        auto w = unity_weights(s, bp.point);
        auto ex = extract_assignment(w, a);
        if (auto* sigma = std::get_if<Assignment>(&ex)) {
            KkmSolution sol{bp.point, *sigma, bp.residual, std::move(w)};
            if (validate_solution(s, a, sol, opt.tol))
                return sol;
        }
        last = SolverExhausted{bp.point, bp.residual, "assignment extraction failed at best point"};
    }
    return last;
}

/// Scores of a covering of a single simplex Delta^{n-1} by n*m sets A_ij;
/// out is indexed i*m + j.
struct ColoredField {
    std::size_t n = 0;
    std::size_t m = 0;
    std::function<void(std::span<const double>, std::span<double>)> eval;

    std::vector<double> operator()(std::span<const double> x) const {
        std::vector<double> out(n * m, 0.0);
        eval(x, out);
        return out;
    }
};

/// Lifts a colored covering of Delta^{n-1} to Delta^{n-1} x Delta^{m-1}:
/// s_ij(x, y) = s'_ij(x) * max(0, y_j - max_k y_k + 1/(2m)).
inline ScoreField lift_colored(const ColoredField& c) {
    auto cf = c;
    return ScoreField({c.n, c.m}, [cf](std::span<const ScoreField::Coords> p, std::span<double> out) {
        const auto& x = p[0];
        const auto& y = p[1];
        std::vector<double> base(cf.n * cf.m, 0.0);
        cf.eval(x, base);
        const double top = *std::max_element(y.begin(), y.end());
        const double margin = 0.5 / static_cast<double>(cf.m);
        for (std::size_t j = 0; j < cf.m; ++j) {
            const double lift = std::max(0.0, y[j] - top + margin);
            for (std::size_t i = 0; i < cf.n; ++i)
                out[i * cf.m + j] = base[i * cf.m + j] * lift;
        }
    });
}

/// Colored KKM: finds x in Delta^{n-1} and sigma with the prescribed quotas
/// such that x lies in A_{sigma(j) j} for every j.
inline KkmResult solve_colored_kkm(const ColoredField& c, const QuotaVector& a, const SearchOptions& opt = {}) {
    if (c.n != a.size() || c.m != a.target)
        throw InvalidInput("quota vector does not match the colored field");
    auto result = solve_kkm_product(lift_colored(c), a, opt);
    if (auto* sol = std::get_if<KkmSolution>(&result)) {
        auto x = sol->point.factors[0].to_doubles();
        auto base = c(x);
        for (std::size_t j = 0; j < c.m; ++j)
            if (!(base[sol->assignment.sigma[j] * c.m + j] > 0.0))
                return SolverExhausted{sol->point, sol->residual, "lifted solution left a colored set"};
    }
    return result;
}

struct KkmMatchingSolution {
    ProductPoint point;
    Hypergraph support;                          // edges with phi > delta, weighted by phi
    std::vector<std::vector<std::size_t>> matching;  // matched index tuples
    double residual = 0.0;
    double delta = 0.0;
    UnityWeights weights;
};

struct MatchingTooSmall {
    ProductPoint point;
    std::size_t size = 0;
    std::size_t bound = 0;
};

using KkmRResult = std::variant<KkmMatchingSolution, NotCovered, SolverExhausted, MatchingTooSmall>;

/// r-factor version: balances every factor marginal at 1/n and returns a
/// maximum matching of the support hypergraph of phi, whose size must reach
/// ceil(n / (r - 1)).
inline KkmRResult solve_kkm_r(const ScoreField& s, const SearchOptions& opt = {}) {
    const std::size_t r = s.factors();
    if (r < 2)
        throw InvalidInput("r-factor solver needs at least two factors");
    const std::size_t n = s.shape()[0];
    for (auto v : s.shape())
        if (v != n)
            throw InvalidInput("all factors must have the same number of vertices");
    const std::size_t bound = fractional_matching_bound(n, r);
    const auto target = BalancedTarget::uniform(r, n);

    auto local = opt;
    KkmRResult last = SolverExhausted{target.seed(), std::numeric_limits<double>::infinity(), "no attempt made"};
    for (int attempt = 0; attempt < 4 && local.tol >= 1e-15; ++attempt, local.tol *= 1e-3) {
        auto found = balanced_point_search(s, target, local);
        if (auto* nc = std::get_if<NotCovered>(&found))
            return *nc;
        if (auto* ra = std::get_if<ResidualAboveTolerance>(&found))
            return SolverExhausted{ra->point, ra->residual, "refinement budget exhausted"};
        auto& bp = std::get<BalancedPoint>(found);
        auto scores = s(bp.point);
        auto w = unity_weights(s, bp.point);
        std::size_t best_size = 0;
        for (double delta : delta_sweep(0.5 / static_cast<double>(s.size()))) {
            Hypergraph h{r, n, {}, std::vector<double>{}};
            for (std::size_t flat = 0; flat < s.size(); ++flat)
                if (w.phi[flat] > delta) {
                    h.edges.push_back(s.unflatten(flat));
                    h.weights->push_back(w.phi[flat]);
                }
            auto mm = max_hypergraph_matching(h);
            best_size = std::max(best_size, mm.size());
            if (mm.size() < bound)
                continue;
            KkmMatchingSolution sol{bp.point, h, {}, bp.residual, delta, w};
            bool positive = true;
            for (auto e : mm.edges) {
                sol.matching.push_back(h.edges[e]);
                positive = positive && scores[s.flatten(h.edges[e])] > 0.0;
            }
            if (positive)
                return sol;
        }
        last = MatchingTooSmall{bp.point, best_size, bound};
    }
    return last;
}

/// All maps sigma: [m] -> [n] with |sigma^{-1}(i)| = a_i, lexicographic.
inline std::vector<Assignment> quota_maps(const QuotaVector& a) {
    std::vector<Assignment> out;
    std::vector<std::size_t> left = a.a;
    Assignment cur;
    cur.sigma.assign(a.target, 0);
    auto rec = [&](auto&& self, std::size_t j) -> void {
        if (j == a.target) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = 0; i < left.size(); ++i) {
            if (left[i] == 0)
                continue;
            --left[i];
            cur.sigma[j] = i;
            self(self, j + 1);
            ++left[i];
        }
    };
    rec(rec, 0);
    return out;
}

struct OracleHit {
    Assignment assignment;
    ProductPoint point;
    double min_score = 0.0;
};

struct NoneFound {};

namespace detail {

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n)
        return 0;
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return static_cast<std::size_t>(std::llround(r));
}

inline void require_oracle_size(const ScoreField& s, std::int64_t resolution, std::size_t maps) {
    double points = 1.0;
    for (auto v : s.shape())
        points *= static_cast<double>(binomial(static_cast<std::size_t>(resolution) + v - 1, v - 1));
    if (points * static_cast<double>(std::max<std::size_t>(maps, 1)) > 1e7)
        throw TooLarge("oracle enumeration exceeds 10^7 (map, point) pairs");
}

} // namespace detail

/// Brute force over every quota-respecting map and every product lattice
/// point: the pair maximizing min_j s_{sigma(j) j}, provided it is positive.
inline std::variant<OracleHit, NoneFound> oracle_solve(const ScoreField& s, const QuotaVector& a,
                                                       std::int64_t resolution) {
    if (s.factors() != 2 || s.shape()[0] != a.size() || s.shape()[1] != a.target)
        throw InvalidInput("oracle needs a two-factor field matching the quota vector");
    const auto maps = quota_maps(a);
    detail::require_oracle_size(s, resolution, maps.size());
    const std::size_t m = a.target;
    std::vector<ProductPoint> points;
    std::vector<std::vector<double>> scores;
    for_each_product_lattice_point(s.shape(), resolution, [&](const ProductPoint& p) {
        points.push_back(p);
        scores.push_back(s(p));
        return true;
    });
    std::optional<OracleHit> best;
    for (const auto& sigma : maps) {
        for (std::size_t p = 0; p < points.size(); ++p) {
            double v = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j)
                v = std::min(v, scores[p][sigma.sigma[j] * m + j]);
            if (v > 0.0 && (!best || v > best->min_score))
                best = OracleHit{sigma, points[p], v};
        }
    }
    if (best)
        return *best;
    return NoneFound{};
}

/// First product lattice point where every A_{sigma(j) j} scores positive.
inline std::optional<ProductPoint> oracle_feasible(const ScoreField& s, const Assignment& sigma,
                                                   std::int64_t resolution) {
    detail::require_oracle_size(s, resolution, 1);
    const std::size_t m = s.shape()[1];
    std::optional<ProductPoint> hit;
    for_each_product_lattice_point(s.shape(), resolution, [&](const ProductPoint& p) {
        auto sc = s(p);
        for (std::size_t j = 0; j < m; ++j)
            if (!(sc[sigma.sigma[j] * m + j] > 0.0))
                return true;
        hit = p;
        return false;
    });
    return hit;
}

} // namespace kkmcut
