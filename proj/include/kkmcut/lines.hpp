#pragma once

// Cutting finite families of planar sets by horizontal and vertical lines.
//
// A connected set meets the vertical line x = p iff p lies in its projection
// to the x axis (likewise for horizontal lines), so each set is reduced to
// its two projection intervals. Open sets give open intervals, compact sets
// closed ones; the family carries the flag.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kkmcut/engine.hpp"
#include "kkmcut/errors.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/measure.hpp"
#include "kkmcut/simplex.hpp"

namespace kkmcut {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double p, bool open) const { return open ? (lo < p && p < hi) : (lo <= p && p <= hi); }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline bool disjoint(const Interval& a, const Interval& b, bool open) {
    return open ? (a.hi <= b.lo || b.hi <= a.lo) : (a.hi < b.lo || b.hi < a.lo);
}

/// A planar set through its projections to the two axes.
struct Box2 {
    Interval x;
    Interval y;

    friend bool operator==(const Box2&, const Box2&) = default;
};

inline Box2 make_box(double x_lo, double x_hi, double y_lo, double y_hi) {
    for (double v : {x_lo, x_hi, y_lo, y_hi})
        if (!std::isfinite(v))
            throw InvalidInput("box coordinates must be finite");
    if (!(x_lo < x_hi) || !(y_lo < y_hi))
        throw InvalidInput("box needs x_lo < x_hi and y_lo < y_hi");
    return Box2{{x_lo, x_hi}, {y_lo, y_hi}};
}

struct Family {
    std::vector<Box2> sets;
    bool open = true;

    std::size_t size() const { return sets.size(); }
    const Box2& operator[](std::size_t i) const { return sets[i]; }
};

namespace detail {

inline double cross(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline bool on_segment(const std::array<double, 2>& p, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
           p[1] <= std::max(a[1], b[1]);
}

inline bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                               const std::array<double, 2>& c, const std::array<double, 2>& d) {
    const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
           (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

} // namespace detail

/// Projections of a simple polygon. Rejects self-intersecting or
/// degenerate outlines.
inline Box2 box_from_polygon(const std::vector<std::array<double, 2>>& pts) {
    const std::size_t k = pts.size();
    if (k < 3)
        throw InvalidInput("polygon needs at least three vertices");
    for (const auto& p : pts)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            throw InvalidInput("polygon coordinates must be finite");
    for (std::size_t e = 0; e < k; ++e) {
        const auto& a = pts[e];
        const auto& b = pts[(e + 1) % k];
        if (a == b)
            throw InvalidInput("polygon has a repeated vertex");
        for (std::size_t f = e + 1; f < k; ++f) {
            if (f == e + 1 || (e == 0 && f == k - 1))
                continue;
            if (detail::segments_intersect(a, b, pts[f], pts[(f + 1) % k]))
                throw InvalidInput("polygon is not simple");
        }
    }
    double x_lo = pts[0][0], x_hi = pts[0][0], y_lo = pts[0][1], y_hi = pts[0][1];
    for (const auto& p : pts) {
        x_lo = std::min(x_lo, p[0]);
        x_hi = std::max(x_hi, p[0]);
        y_lo = std::min(y_lo, p[1]);
        y_hi = std::max(y_hi, p[1]);
    }
    return make_box(x_lo, x_hi, y_lo, y_hi);
}

/// `vertical` holds x positions, `horizontal` y positions.
struct CutFamily {
    std::vector<double> vertical;
    std::vector<double> horizontal;

    void normalize() {
        for (auto* v : {&vertical, &horizontal}) {
            std::sort(v->begin(), v->end());
            v->erase(std::unique(v->begin(), v->end()), v->end());
        }
    }

    friend bool operator==(const CutFamily&, const CutFamily&) = default;
};

inline bool is_cut(const Box2& b, const CutFamily& cut, bool open = true) {
    for (double x : cut.vertical)
        if (b.x.contains(x, open))
            return true;
    for (double y : cut.horizontal)
        if (b.y.contains(y, open))
            return true;
    return false;
}

inline bool cuts_family(const Family& f, const CutFamily& cut) {
    return std::all_of(f.sets.begin(), f.sets.end(), [&](const Box2& b) { return is_cut(b, cut, f.open); });
}

enum class Axis { x, y };

inline const Interval& projection(const Box2& b, Axis axis) {
    return axis == Axis::x ? b.x : b.y;
}

inline std::vector<double> axis_endpoints(const Family& f, Axis axis) {
    std::vector<double> e;
    for (const auto& b : f.sets) {
        e.push_back(projection(b, axis).lo);
        e.push_back(projection(b, axis).hi);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

/// One representative line position per elementary interval of the
/// projection endpoints: midpoints for open families, the endpoints
/// themselves for closed ones. Every achievable cut uses only these.
inline std::vector<double> canonical_positions(const Family& f, Axis axis) {
    if (f.sets.empty())
        throw InvalidInput("canonical positions need a nonempty family");
    auto e = axis_endpoints(f, axis);
    if (!f.open)
        return e;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        out.push_back(0.5 * (e[i] + e[i + 1]));
    return out;
}

struct NoneExists {};

namespace detail {

// Position just below `hi` that every interval of the family containing
// points arbitrarily close below hi also contains.
inline double position_below(const std::vector<double>& endpoints, double hi, bool open) {
    if (!open)
        return hi;
    auto it = std::lower_bound(endpoints.begin(), endpoints.end(), hi);
    if (it == endpoints.begin())
        return hi;
    return 0.5 * (*std::prev(it) + hi);
}

class CutSearch {
public:
    CutSearch(const Family& f, std::size_t n, std::size_t m, std::size_t node_budget)
        : f_(f), n_(n), m_(m), budget_(node_budget), xs_(axis_endpoints(f, Axis::x)),
          ys_(axis_endpoints(f, Axis::y)) {}

    std::optional<CutFamily> run() {
        std::vector<double> vertical;
        std::vector<bool> deferred(f_.size(), false);
        if (dfs(vertical, deferred))
            return found_;
        return std::nullopt;
    }

private:
    // Classic right-endpoint sweep; minimal number of horizontal lines
    // stabbing every deferred set.
    std::vector<double> stab_deferred(const std::vector<bool>& deferred) const {
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < f_.size(); ++i)
            if (deferred[i])
                ids.push_back(i);
        std::stable_sort(ids.begin(), ids.end(), [&](auto a, auto b) { return f_[a].y.hi < f_[b].y.hi; });
        std::vector<double> lines;
        for (auto i : ids) {
            bool hit = false;
            for (double y : lines)
                hit = hit || f_[i].y.contains(y, f_.open);
            if (!hit)
                lines.push_back(position_below(ys_, f_[i].y.hi, f_.open));
        }
        return lines;
    }

    bool dfs(std::vector<double>& vertical, std::vector<bool>& deferred) {
        if (++nodes_ > budget_)
            throw BudgetExceeded("cut search exceeded " + std::to_string(budget_) + " nodes");
        auto lines = stab_deferred(deferred);
        if (lines.size() > m_)
            return false;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < f_.size(); ++i) {
            if (deferred[i])
                continue;
            bool hit = false;
            for (double x : vertical)
                hit = hit || f_[i].x.contains(x, f_.open);
            if (!hit && (!pick || f_[i].x.hi < f_[*pick].x.hi))
                pick = i;
        }
        if (!pick) {
            found_ = CutFamily{vertical, lines};
            found_.normalize();
            return true;
        }
        if (vertical.size() < n_) {
            vertical.push_back(position_below(xs_, f_[*pick].x.hi, f_.open));
            if (dfs(vertical, deferred))
                return true;
            vertical.pop_back();
        }
        deferred[*pick] = true;
        bool ok = dfs(vertical, deferred);
        deferred[*pick] = false;
        return ok;
    }

    const Family& f_;
    std::size_t n_, m_;
    std::size_t budget_;
    std::size_t nodes_ = 0;
    std::vector<double> xs_, ys_;
    CutFamily found_;
};

} // namespace detail

/// Exact decision: can the family be cut by n vertical and m horizontal
/// lines? Branches on the uncut set with the leftmost right end: a vertical
/// line just inside its right end, or leave it to the horizontal lines,
/// which are placed by the greedy interval-stabbing sweep.
inline std::variant<CutFamily, NoneExists> find_cut(const Family& f, std::size_t n, std::size_t m,
                                                    std::size_t node_budget = 5'000'000) {
    if (f.size() > 30 || n > 6 || m > 6)
        throw BudgetExceeded("exact cut search is limited to 30 sets and 6 lines per direction");
    if (f.sets.empty())
        return CutFamily{};
    detail::CutSearch search(f, n, m, node_budget);
    if (auto cut = search.run()) {
        if (!cuts_family(f, *cut) || cut->vertical.size() > n || cut->horizontal.size() > m)
            throw Error("internal: cut search produced an invalid cut");
        return *cut;
    }
    return NoneExists{};
}

/// Independent check of find_cut: tries every set of at most n canonical
/// x positions with every set of at most m canonical y positions.
inline std::variant<CutFamily, NoneExists> find_cut_exhaustive(const Family& f, std::size_t n, std::size_t m) {
    if (f.sets.empty())
        return CutFamily{};
    const auto xs = canonical_positions(f, Axis::x);
    const auto ys = canonical_positions(f, Axis::y);
    auto subsets = [](std::size_t size, std::size_t k) {
        double c = 0.0;
        for (std::size_t t = 0; t <= std::min(size, k); ++t)
            c += static_cast<double>(detail::binomial(size, t));
        return c;
    };
    if (subsets(xs.size(), n) * subsets(ys.size(), m) > 1e8)
        throw TooLarge("exhaustive cut enumeration exceeds 10^8 combinations");

    auto for_each_subset = [](const std::vector<double>& pos, std::size_t k, auto&& fn) {
        std::vector<double> cur;
        auto rec = [&](auto&& self, std::size_t from) -> bool {
            if (fn(cur))
                return true;
            if (cur.size() == k)
                return false;
            for (std::size_t i = from; i < pos.size(); ++i) {
                cur.push_back(pos[i]);
                if (self(self, i + 1))
                    return true;
                cur.pop_back();
            }
            return false;
        };
        return rec(rec, 0);
    };

    CutFamily found;
    bool ok = for_each_subset(xs, n, [&](const std::vector<double>& vertical) {
        return for_each_subset(ys, m, [&](const std::vector<double>& horizontal) {
            CutFamily c{vertical, horizontal};
            if (!cuts_family(f, c))
                return false;
            found = c;
            return true;
        });
    });
    if (ok) {
        found.normalize();
        return found;
    }
    return NoneExists{};
}

/// m+1 members with pairwise disjoint y-projections, grouped by sigma into
/// n+1 classes of sizes a; members of different classes have disjoint
/// x-projections.
struct HellyWitness {
    std::vector<std::size_t> members;
    std::vector<std::size_t> sigma;
    std::vector<std::size_t> quota;
};

inline bool validate_witness(const Family& f, const HellyWitness& w) {
    const std::size_t k = w.members.size();
    if (w.sigma.size() != k || w.quota.empty())
        return false;
    std::vector<std::size_t> counts(w.quota.size(), 0);
    for (auto s : w.sigma) {
        if (s >= w.quota.size())
            return false;
        ++counts[s];
    }
    if (counts != w.quota)
        return false;
    for (std::size_t p = 0; p < k; ++p) {
        if (w.members[p] >= f.size())
            return false;
        for (std::size_t q = p + 1; q < k; ++q) {
            if (w.members[p] == w.members[q])
                return false;
            const auto& a = f[w.members[p]];
            const auto& b = f[w.members[q]];
            if (!disjoint(a.y, b.y, f.open))
                return false;
            if (w.sigma[p] != w.sigma[q] && !disjoint(a.x, b.x, f.open))
                return false;
        }
    }
    return true;
}

/// Exhaustive witness search over (m+1)-subsets in lexicographic order and
/// quota maps in lexicographic order.
inline std::variant<HellyWitness, NoneFound> find_witness(const Family& f, std::size_t n, std::size_t m,
                                                          const QuotaVector& a) {
    if (a.size() != n + 1 || a.target != m + 1)
        throw InvalidInput("witness quota needs n+1 positive entries summing to m+1");
    const std::size_t k = m + 1;
    const double work = static_cast<double>(detail::binomial(f.size(), k)) *
                        std::pow(static_cast<double>(n + 1), static_cast<double>(k));
    if (work > 1e7)
        throw TooLarge("witness enumeration exceeds 10^7 candidates");
    if (f.size() < k)
        return NoneFound{};
    const auto maps = quota_maps(a);
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i)
        pick[i] = i;
    while (true) {
        bool y_ok = true;
        for (std::size_t p = 0; p < k && y_ok; ++p)
            for (std::size_t q = p + 1; q < k && y_ok; ++q)
                y_ok = disjoint(f[pick[p]].y, f[pick[q]].y, f.open);
        if (y_ok) {
            for (const auto& sigma : maps) {
                bool x_ok = true;
                for (std::size_t p = 0; p < k && x_ok; ++p)
                    for (std::size_t q = p + 1; q < k && x_ok; ++q)
                        if (sigma.sigma[p] != sigma.sigma[q])
                            x_ok = disjoint(f[pick[p]].x, f[pick[q]].x, f.open);
                if (x_ok)
                    return HellyWitness{pick, sigma.sigma, a.a};
            }
        }
        // next k-subset
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == f.size() - k + (i - 1))
            --i;
        if (i == 0)
            break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return NoneFound{};
}

/// Homothety taking the bounding square of a family onto
/// [pad, 1 - pad]^2. It preserves every containment and disjointness
/// relation between projections.
struct SquareFrame {
    double x0 = 0.0, y0 = 0.0, scale = 1.0, pad = 0.0;

    double to_unit_x(double x) const { return pad + (x - x0) * scale; }
    double to_unit_y(double y) const { return pad + (y - y0) * scale; }
    double from_unit_x(double u) const { return x0 + (u - pad) / scale; }
    double from_unit_y(double u) const { return y0 + (u - pad) / scale; }
};

inline SquareFrame unit_square_frame(const Family& f, double pad = 0.1) {
    if (f.sets.empty())
        return {};
    double x_lo = f[0].x.lo, x_hi = f[0].x.hi, y_lo = f[0].y.lo, y_hi = f[0].y.hi;
    for (const auto& b : f.sets) {
        x_lo = std::min(x_lo, b.x.lo);
        x_hi = std::max(x_hi, b.x.hi);
        y_lo = std::min(y_lo, b.y.lo);
        y_hi = std::max(y_hi, b.y.hi);
    }
    const double side = std::max(x_hi - x_lo, y_hi - y_lo);
    return SquareFrame{x_lo, y_lo, (1.0 - 2.0 * pad) / side, pad};
}

inline Family normalize_to_unit_square(const Family& f, double pad = 0.1) {
    const auto fr = unit_square_frame(f, pad);
    Family out{{}, f.open};
    for (const auto& b : f.sets)
        out.sets.push_back(Box2{{fr.to_unit_x(b.x.lo), fr.to_unit_x(b.x.hi)}, {fr.to_unit_y(b.y.lo), fr.to_unit_y(b.y.hi)}});
    return out;
}

/// Score of cell I_i x J_j: the largest margin by which some member fits
/// strictly inside it; shape (n+1) x (m+1) over Delta^n x Delta^m.
inline ScoreField enclosure_scores(const Family& f, std::size_t n, std::size_t m) {
    for (const auto& b : f.sets)
        if (b.x.lo < 0.0 || b.x.hi > 1.0 || b.y.lo < 0.0 || b.y.hi > 1.0)
            throw InvalidInput("family must lie in the unit square; normalize it first");
    const std::size_t rows = n + 1, cols = m + 1;
    return ScoreField({rows, cols}, [f, rows, cols](std::span<const ScoreField::Coords> p, std::span<double> out) {
        auto xs = cumulative_cuts(p[0]);
        auto ys = cumulative_cuts(p[1]);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                double best = 0.0;
                for (const auto& b : f.sets) {
                    double margin = std::min({b.x.lo - xs[i], xs[i + 1] - b.x.hi, b.y.lo - ys[j], ys[j + 1] - b.y.hi});
                    best = std::max(best, margin);
                }
                out[i * cols + j] = best;
            }
    });
}

/// An uncovered partition pair: its interior cuts form n vertical and m
/// horizontal lines that cut the family.
struct CutPoint {
    PartitionPair partition;
    CutFamily cut;
};

using KkmWitnessResult = std::variant<HellyWitness, CutPoint, SolverExhausted>;

/// Witness extraction through the two-factor KKM solver on the enclosure
/// scores. The family must already lie inside the unit square.
namespace detail {

inline KkmWitnessResult witness_attempt(const Family& f, std::size_t m, const QuotaVector& a, const ScoreField& scores,
                                        const SearchOptions& opt) {
    auto result = solve_kkm_product(scores, a, opt);

    if (auto* nc = std::get_if<NotCovered>(&result)) {
        auto pp = partition_from_point(nc->point);
        CutFamily cut;
        for (std::size_t i = 1; i < pp.x_cuts.size() - 1; ++i)
            cut.vertical.push_back(pp.x_cuts[i]);
        for (std::size_t j = 1; j < pp.y_cuts.size() - 1; ++j)
            cut.horizontal.push_back(pp.y_cuts[j]);
        cut.normalize();
        if (cuts_family(f, cut))
            return CutPoint{pp, cut};
        // Lines lying on a member's edge: shift each by -eta, 0 or +eta.
        constexpr double eta = 1e-9;
        std::vector<double*> lines;
        for (std::size_t i = 1; i + 1 < pp.x_cuts.size(); ++i)
            lines.push_back(&pp.x_cuts[i]);
        for (std::size_t j = 1; j + 1 < pp.y_cuts.size(); ++j)
            lines.push_back(&pp.y_cuts[j]);
        const auto base = pp;
        std::size_t tries = 1;
        for (std::size_t k = 0; k < lines.size(); ++k)
            tries *= 3;
        for (std::size_t code = 1; code < tries; ++code) {
            pp = base;
            std::size_t c = code;
            for (auto* line : lines) {
                // pointers index into pp, which was just reset from base
                *line += eta * (static_cast<double>(c % 3) - 1.0);
                c /= 3;
            }
            std::sort(pp.x_cuts.begin(), pp.x_cuts.end());
            std::sort(pp.y_cuts.begin(), pp.y_cuts.end());
            CutFamily moved{{pp.x_cuts.begin() + 1, pp.x_cuts.end() - 1}, {pp.y_cuts.begin() + 1, pp.y_cuts.end() - 1}};
            moved.normalize();
            if (cuts_family(f, moved))
                return CutPoint{pp, moved};
        }
        return SolverExhausted{nc->point, 0.0, "uncovered partition leaves a member touching a cell boundary"};
    }
    if (auto* sol = std::get_if<KkmSolution>(&result)) {
        auto pp = partition_from_point(sol->point);
        HellyWitness w{{}, sol->assignment.sigma, a.a};
        for (std::size_t j = 0; j <= m; ++j) {
            const std::size_t i = sol->assignment.sigma[j];
            std::optional<std::size_t> member;
            double best = 0.0;
            for (std::size_t x = 0; x < f.size(); ++x) {
                const auto& b = f[x];
                double margin = std::min({b.x.lo - pp.x_cuts[i], pp.x_cuts[i + 1] - b.x.hi, b.y.lo - pp.y_cuts[j],
                                          pp.y_cuts[j + 1] - b.y.hi});
                if (margin > best) {
                    best = margin;
                    member = x;
                }
            }
            if (!member)
                return SolverExhausted{sol->point, sol->residual, "no member strictly inside an assigned cell"};
            w.members.push_back(*member);
        }
        if (!validate_witness(f, w))
            return SolverExhausted{sol->point, sol->residual, "extracted witness failed re-validation"};
        return w;
    }
    return std::get<SolverExhausted>(result);
}

} // namespace detail

inline KkmWitnessResult witness_from_kkm(const Family& f, std::size_t n, std::size_t m, const QuotaVector& a,
                                         const SearchOptions& opt = {}) {
    if (a.size() != n + 1 || a.target != m + 1)
        throw InvalidInput("witness quota needs n+1 positive entries summing to m+1");
    if (f.sets.empty())
        throw InvalidInput("witness search needs a nonempty family");
    auto scores = enclosure_scores(f, n, m);
    auto result = detail::witness_attempt(f, m, a, scores, opt);
    if (std::holds_alternative<SolverExhausted>(result) && opt.base_resolution <= 42) {
        // a lattice of another resolution rarely lands on the same member edges
        auto retry = opt;
        retry.base_resolution = opt.base_resolution * 3 / 2 + 1;
        auto second = detail::witness_attempt(f, m, a, scores, retry);
        if (!std::holds_alternative<SolverExhausted>(second))
            return second;
    }
    return result;
}

struct HellyReport {
    bool premise = true;
    std::optional<std::vector<std::size_t>> violating;  // first subfamily failing the premise
    std::variant<CutFamily, NoneExists> conclusion;
    bool theorem_respected = true;
    std::size_t subfamilies_checked = 0;
};

/// Checks the Helly-type statement on one family: if every subfamily of at
/// most m+1 members is cut by m horizontal lines or by n vertical lines,
/// the whole family is cut by n vertical and m horizontal lines.
// Requires 1 <= n <= m; outside that range the implication fails trivially.
inline HellyReport helly_check(const Family& f, std::size_t n, std::size_t m) {
    if (n == 0 || n > m)
        throw InvalidInput("helly check needs 1 <= n <= m");
    const std::size_t top = std::min(m + 1, f.size());
    double count = 0.0;
    for (std::size_t k = 1; k <= top; ++k)
        count += static_cast<double>(detail::binomial(f.size(), k));
    if (count > 1e6)
        throw TooLarge("helly check would enumerate more than 10^6 subfamilies");

    HellyReport report;
    for (std::size_t k = 1; k <= top && report.premise; ++k) {
        std::vector<std::size_t> pick(k);
        for (std::size_t i = 0; i < k; ++i)
            pick[i] = i;
        while (true) {
            Family g{{}, f.open};
            for (auto i : pick)
                g.sets.push_back(f[i]);
            ++report.subfamilies_checked;
            bool ok = std::holds_alternative<CutFamily>(find_cut(g, 0, m)) ||
                      std::holds_alternative<CutFamily>(find_cut(g, n, 0));
            if (!ok) {
                report.premise = false;
                report.violating = pick;
                break;
            }
            std::size_t i = k;
            while (i > 0 && pick[i - 1] == f.size() - k + (i - 1))
                --i;
            if (i == 0)
                break;
            ++pick[i - 1];
            for (std::size_t j = i; j < k; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    report.conclusion = find_cut(f, n, m);
    report.theorem_respected = !report.premise || std::holds_alternative<CutFamily>(report.conclusion);
    return report;
}

} // namespace kkmcut
