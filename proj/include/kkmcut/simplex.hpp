#pragma once

// Points of simplices and of products of simplices, their lattice
// discretizations, and score fields standing in for open coverings.
//
// A covering set A_t of the product is represented by the positive support
// of a nonnegative continuous score s_t. Normalizing the score vector at a
// point gives a partition of unity subordinated to the covering.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "kkmcut/errors.hpp"

namespace kkmcut {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& q) {
    return boost::rational_cast<double>(q);
}

inline std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << q.numerator();
    if (q.denominator() != 1)
        os << '/' << q.denominator();
    return os.str();
}

/// Point of the simplex of dimension size()-1 in exact barycentric
/// coordinates. Construct through validate_barycentric or the lattice.
class BarycentricPoint {
public:
    BarycentricPoint() = default;

    std::size_t size() const { return coords_.size(); }
    std::size_t dim() const { return coords_.size() - 1; }
    const Rational& operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<Rational>& coords() const { return coords_; }

    std::vector<double> to_doubles() const {
        std::vector<double> out(coords_.size());
        for (std::size_t i = 0; i < coords_.size(); ++i)
            out[i] = to_double(coords_[i]);
        return out;
    }

    friend bool operator==(const BarycentricPoint&, const BarycentricPoint&) = default;

    friend std::ostream& operator<<(std::ostream& os, const BarycentricPoint& p) {
        os << '(';
        for (std::size_t i = 0; i < p.size(); ++i)
            os << (i ? "," : "") << to_string(p[i]);
        return os << ')';
    }

private:
    explicit BarycentricPoint(std::vector<Rational> coords) : coords_(std::move(coords)) {}

    friend BarycentricPoint validate_barycentric(std::vector<Rational> coords);
    friend BarycentricPoint make_unchecked(std::vector<Rational> coords);

    std::vector<Rational> coords_;
};

inline BarycentricPoint validate_barycentric(std::vector<Rational> coords) {
    if (coords.empty())
        throw InvalidInput("barycentric point needs at least one coordinate");
    Rational sum = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] < Rational(0))
            throw NegativeCoordinate("coordinate " + std::to_string(i) + " is negative: " +
                                     to_string(coords[i]));
        sum += coords[i];
    }
    if (sum != Rational(1))
        throw SumNotOne("coordinates sum to " + to_string(sum));
    return BarycentricPoint(std::move(coords));
}

// Used internally where the invariants hold by construction.
inline BarycentricPoint make_unchecked(std::vector<Rational> coords) {
    return BarycentricPoint(std::move(coords));
}

/// True iff p lies on the facet where coordinate i vanishes (exact test).
inline bool facet_indicator(const BarycentricPoint& p, std::size_t i) {
    if (i >= p.size())
        throw IndexOutOfRange("facet index " + std::to_string(i) + " out of range for " +
                              std::to_string(p.size()) + " coordinates");
    return p[i] == Rational(0);
}

/// All points of the dimension-d simplex whose coordinates are multiples of
/// 1/N, in lexicographic order. There are C(N+d, d) of them.
inline std::vector<BarycentricPoint> lattice_points(std::size_t dim, std::int64_t resolution) {
    if (resolution < 1)
        throw ResolutionZero();
    std::vector<BarycentricPoint> out;
    std::vector<std::int64_t> num(dim + 1, 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t pos, std::int64_t left) {
        if (pos == dim) {
            num[pos] = left;
            std::vector<Rational> c(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i)
                c[i] = Rational(num[i], resolution);
            out.push_back(make_unchecked(std::move(c)));
            return;
        }
        for (std::int64_t k = 0; k <= left; ++k) {
            num[pos] = k;
            rec(pos + 1, left - k);
        }
    };
    rec(0, resolution);
    return out;
}

/// Point of a product of simplices, one barycentric factor per simplex.
struct ProductPoint {
    std::vector<BarycentricPoint> factors;

    std::vector<std::vector<double>> to_doubles() const {
        std::vector<std::vector<double>> out;
        out.reserve(factors.size());
        for (const auto& f : factors)
            out.push_back(f.to_doubles());
        return out;
    }

    friend bool operator==(const ProductPoint&, const ProductPoint&) = default;

    friend std::ostream& operator<<(std::ostream& os, const ProductPoint& p) {
        for (std::size_t k = 0; k < p.factors.size(); ++k)
            os << (k ? "x" : "") << p.factors[k];
        return os;
    }
};

/// Nonnegative continuous scores s_t indexed by tuples t in
/// [shape[0]] x ... x [shape[r-1]]; factor k is the simplex with shape[k]
/// vertices. Tuples are flattened row-major (last factor fastest).
///
/// Providers guarantee s_t = 0 whenever factor k lies on facet t_k, for
/// every k. The evaluator must be re-entrant.
class ScoreField {
public:
    using Coords = std::vector<double>;
    using Evaluator = std::function<void(std::span<const Coords>, std::span<double>)>;

    ScoreField(std::vector<std::size_t> shape, Evaluator eval)
        : shape_(std::move(shape)), eval_(std::move(eval)) {
        if (shape_.empty())
            throw InvalidInput("score field needs at least one factor");
        size_ = 1;
        for (auto s : shape_) {
            if (s == 0)
                throw InvalidInput("score field factor with zero vertices");
            size_ *= s;
        }
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t factors() const { return shape_.size(); }
    std::size_t size() const { return size_; }

    void eval(std::span<const Coords> coords, std::span<double> out) const {
        eval_(coords, out);
    }

    std::vector<double> operator()(const ProductPoint& p) const {
        auto c = p.to_doubles();
        std::vector<double> out(size_, 0.0);
        eval_(c, out);
        return out;
    }

    std::size_t flatten(std::span<const std::size_t> tuple) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < shape_.size(); ++k)
            flat = flat * shape_[k] + tuple[k];
        return flat;
    }

    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> t(shape_.size());
        for (std::size_t k = shape_.size(); k-- > 0;) {
            t[k] = flat % shape_[k];
            flat /= shape_[k];
        }
        return t;
    }

private:
    std::vector<std::size_t> shape_;
    std::size_t size_ = 0;
    Evaluator eval_;
};

/// s_t(p) = prod_k (p_k)_{t_k}. Sums to one everywhere, so it covers the
/// whole product, and it vanishes on every forbidden facet.
inline ScoreField canonical_field(std::vector<std::size_t> shape) {
    auto sh = shape;
    return ScoreField(std::move(shape), [sh](std::span<const ScoreField::Coords> c, std::span<double> out) {
        std::size_t total = out.size();
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rest = flat;
            double v = 1.0;
            for (std::size_t k = sh.size(); k-- > 0;) {
                v *= c[k][rest % sh[k]];
                rest /= sh[k];
            }
            out[flat] = v;
        }
    });
}

/// Partition of unity evaluated at one point.
struct UnityWeights {
    std::vector<double> phi;
};

class NotCoveredError : public Error {
public:
    explicit NotCoveredError(ProductPoint p)
        : Error("point is not covered by any score"), point(std::move(p)) {}
    ProductPoint point;
};

inline UnityWeights normalize_scores(std::span<const double> scores) {
    double sum = 0.0;
    for (double v : scores)
        sum += v;
    UnityWeights w;
    w.phi.assign(scores.size(), 0.0);
    if (!(sum > 0.0))
        return w;
    for (std::size_t t = 0; t < scores.size(); ++t)
        w.phi[t] = scores[t] > 0.0 ? scores[t] / sum : 0.0;
    return w;
}

inline UnityWeights unity_weights(const ScoreField& s, const ProductPoint& p) {
    auto scores = s(p);
    double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (!(sum > 0.0))
        throw NotCoveredError(p);
    return normalize_scores(scores);
}

/// Calls fn(point) for every point of the product lattice at the given
/// resolution, first factor outermost, each factor in lexicographic order.
/// Stops early when fn returns false.
template <class Fn>
void for_each_product_lattice_point(std::span<const std::size_t> shape, std::int64_t resolution, Fn&& fn) {
    std::vector<std::vector<BarycentricPoint>> lattices;
    lattices.reserve(shape.size());
    for (auto s : shape)
        lattices.push_back(lattice_points(s - 1, resolution));
    std::vector<std::size_t> idx(shape.size(), 0);
    ProductPoint p;
    p.factors.resize(shape.size());
    while (true) {
        for (std::size_t k = 0; k < shape.size(); ++k)
            p.factors[k] = lattices[k][idx[k]];
        if (!fn(static_cast<const ProductPoint&>(p)))
            return;
        std::size_t k = shape.size();
        while (k > 0) {
            --k;
            if (++idx[k] < lattices[k].size())
                break;
            idx[k] = 0;
            if (k == 0)
                return;
        }
    }
}

struct CoverReport {
    bool boundary_ok = true;
    std::vector<ProductPoint> uncovered;
};

/// Evaluates s on the full product lattice: checks that every score vanishes
/// on its forbidden facets and lists the lattice points no score covers.
inline CoverReport check_cover_conditions(const ScoreField& s, std::int64_t resolution) {
    if (resolution < 1)
        throw ResolutionZero();
    CoverReport report;
    std::vector<double> scores(s.size());
    for_each_product_lattice_point(s.shape(), resolution, [&](const ProductPoint& p) {
        auto c = p.to_doubles();
        s.eval(c, scores);
        bool covered = false;
        for (std::size_t flat = 0; flat < scores.size(); ++flat) {
            if (scores[flat] > 0.0) {
                covered = true;
                if (report.boundary_ok) {
                    auto t = s.unflatten(flat);
                    for (std::size_t k = 0; k < t.size(); ++k) {
                        if (p.factors[k][t[k]] == Rational(0)) {
                            report.boundary_ok = false;
                            break;
                        }
                    }
                }
            }
        }
        if (!covered)
            report.uncovered.push_back(p);
        return true;
    });
    return report;
}

} // namespace kkmcut
