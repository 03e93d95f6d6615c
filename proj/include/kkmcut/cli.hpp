#pragma once

// Command-line front end. Every solver outcome is written as a certificate
// that embeds the problem and a verification block recomputed from the
// problem alone; a certificate whose checks do not all pass is never
// emitted.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kkmcut/engine.hpp"
#include "kkmcut/errors.hpp"
#include "kkmcut/lines.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/measure.hpp"
#include "kkmcut/simplex.hpp"

namespace kkmcut::cli {

using json = nlohmann::json;

class UnsupportedCertificate : public Error {
public:
    explicit UnsupportedCertificate(const std::string& what) : Error(what) {}
};

// ---- small conversions ----------------------------------------------------

inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        std::size_t used = 0;
        std::int64_t num = std::stoll(text.substr(0, slash), &used);
        if (used != (slash == std::string::npos ? text.size() : slash))
            throw InvalidInput("bad rational '" + text + "'");
        std::int64_t den = 1;
        if (slash != std::string::npos) {
            den = std::stoll(text.substr(slash + 1), &used);
            if (used != text.size() - slash - 1 || den <= 0)
                throw InvalidInput("bad rational '" + text + "'");
        }
        return Rational(num, den);
    } catch (const std::logic_error&) {
        throw InvalidInput("bad rational '" + text + "'");
    }
}

inline json point_to_json(const ProductPoint& p) {
    json exact = json::array(), approx = json::array();
    for (const auto& f : p.factors) {
        json e = json::array(), a = json::array();
        for (std::size_t i = 0; i < f.size(); ++i) {
            e.push_back(to_string(f[i]));
            a.push_back(to_double(f[i]));
        }
        exact.push_back(e);
        approx.push_back(a);
    }
    return {{"exact", exact}, {"approx", approx}};
}

inline ProductPoint point_from_json(const json& j) {
    ProductPoint p;
    for (const auto& f : j.at("exact")) {
        std::vector<Rational> c;
        for (const auto& v : f)
            c.push_back(parse_rational(v.get<std::string>()));
        p.factors.push_back(validate_barycentric(std::move(c)));
    }
    return p;
}

inline std::vector<std::size_t> parse_quota_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(item, &used);
            if (used != item.size() || v <= 0)
                throw InvalidInput("quota entries must be positive integers");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw InvalidInput("quota entries must be positive integers, got '" + item + "'");
        }
    }
    if (out.empty())
        throw InvalidInput("empty quota list");
    return out;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline double finite_number(const json& j, const char* what) {
    if (!j.is_number())
        throw InvalidInput(std::string(what) + " must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v))
        throw InvalidInput(std::string(what) + " must be finite");
    return v;
}

inline std::size_t count_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
        throw InvalidInput(std::string("field '") + key + "' must be a nonnegative integer");
    return j.at(key).get<std::size_t>();
}

// ---- input schemas --------------------------------------------------------

inline GridDensity density_from_json(const json& j) {
    if (!j.is_object())
        throw InvalidInput("density file must be a JSON object");
    const auto kx = count_field(j, "kx");
    const auto ky = count_field(j, "ky");
    if (!j.contains("values") || !j.at("values").is_array())
        throw InvalidInput("density needs a 'values' array");
    std::vector<double> values;
    for (const auto& v : j.at("values"))
        values.push_back(finite_number(v, "density value"));
    return GridDensity(kx, ky, std::move(values));
}

inline Family family_from_json(const json& j) {
    if (!j.is_object() || !j.contains("sets") || !j.at("sets").is_array())
        throw InvalidInput("family file needs a 'sets' array");
    Family f;
    if (j.contains("open")) {
        if (!j.at("open").is_boolean())
            throw InvalidInput("'open' must be a boolean");
        f.open = j.at("open").get<bool>();
    }
    for (const auto& s : j.at("sets")) {
        if (s.contains("box")) {
            const auto& b = s.at("box");
            if (!b.is_array() || b.size() != 4)
                throw InvalidInput("box must be [x_lo, x_hi, y_lo, y_hi]");
            f.sets.push_back(make_box(finite_number(b[0], "box"), finite_number(b[1], "box"),
                                      finite_number(b[2], "box"), finite_number(b[3], "box")));
        } else if (s.contains("polygon")) {
            std::vector<std::array<double, 2>> pts;
            for (const auto& v : s.at("polygon")) {
                if (!v.is_array() || v.size() != 2)
                    throw InvalidInput("polygon vertices must be [x, y]");
                pts.push_back({finite_number(v[0], "vertex"), finite_number(v[1], "vertex")});
            }
            f.sets.push_back(box_from_polygon(pts));
        } else {
            throw InvalidInput("each set needs a 'box' or a 'polygon'");
        }
    }
    if (f.sets.empty())
        throw InvalidInput("family is empty");
    return f;
}

inline json family_to_json(const Family& f) {
    json sets = json::array();
    for (const auto& b : f.sets)
        sets.push_back({{"box", {b.x.lo, b.x.hi, b.y.lo, b.y.hi}}});
    return {{"open", f.open}, {"sets", sets}};
}

namespace detail {

// Tabulated scores on the simplex lattice of one factor, interpolated
// piecewise linearly over the Freudenthal (Kuhn) triangulation.
class SimplexLattice {
public:
    SimplexLattice(std::size_t vertices, std::int64_t resolution) : dim_(vertices - 1), n_(resolution) {
        auto pts = lattice_points(dim_, resolution);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            std::vector<std::int64_t> key;
            for (std::size_t i = 0; i < pts[k].size(); ++i)
                key.push_back((pts[k][i] * Rational(resolution)).numerator());
            index_[key] = k;
        }
        count_ = pts.size();
    }

    std::size_t count() const { return count_; }

    // (lattice index, weight) pairs with positive weight summing to one.
    std::vector<std::pair<std::size_t, double>> stencil(const std::vector<double>& x) const {
        const double N = static_cast<double>(n_);
        std::vector<double> z(dim_ + 1, 0.0);  // z[k] = N * sum_{i >= k} x_i, k >= 1
        double tail = 0.0;
        for (std::size_t k = dim_; k >= 1; --k) {
            tail += x[k];
            z[k] = std::clamp(N * tail, 0.0, N);
        }
        for (std::size_t k = 2; k <= dim_; ++k)
            z[k] = std::min(z[k], z[k - 1]);
        std::vector<std::int64_t> base(dim_ + 1, 0);
        std::vector<double> frac(dim_ + 1, 0.0);
        for (std::size_t k = 1; k <= dim_; ++k) {
            base[k] = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(z[k])), n_);
            frac[k] = z[k] - static_cast<double>(base[k]);
        }
        std::vector<std::size_t> order;
        for (std::size_t k = 1; k <= dim_; ++k)
            order.push_back(k);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });

        std::vector<std::pair<std::size_t, double>> out;
        auto vertex = base;
        auto emit = [&](double w) {
            if (w <= 0.0)
                return;
            std::vector<std::int64_t> key(dim_ + 1);
            key[0] = n_ - (dim_ >= 1 ? vertex[1] : 0);
            for (std::size_t k = 1; k <= dim_; ++k)
                key[k] = vertex[k] - (k < dim_ ? vertex[k + 1] : 0);
            auto it = index_.find(key);
            if (it == index_.end())
                throw Error("internal: interpolation stencil left the lattice");
            out.emplace_back(it->second, w);
        };
        double prev = 1.0;
        for (std::size_t t = 0; t < order.size(); ++t) {
            emit(prev - frac[order[t]]);
            prev = frac[order[t]];
            ++vertex[order[t]];
        }
        emit(prev);
        return out;
    }

private:
    std::size_t dim_;
    std::int64_t n_;
    std::size_t count_ = 0;
    std::map<std::vector<std::int64_t>, std::size_t> index_;
};

} // namespace detail

/// Score field from a file {"n", "m", "lattice_resolution", "values": {"i,j":
/// [...]}} with one value per product lattice point (first factor
/// outermost, lexicographic inside each factor). Piecewise linear inside each
/// factor, multilinear across the two.
inline ScoreField tabulated_field(const json& j) {
    if (!j.is_object())
        throw InvalidInput("score file must be a JSON object");
    const auto n = count_field(j, "n");
    const auto m = count_field(j, "m");
    const auto res = count_field(j, "lattice_resolution");
    if (n == 0 || m == 0)
        throw InvalidInput("score file needs n, m >= 1");
    if (res == 0)
        throw ResolutionZero();
    auto lx = std::make_shared<detail::SimplexLattice>(n, static_cast<std::int64_t>(res));
    auto ly = std::make_shared<detail::SimplexLattice>(m, static_cast<std::int64_t>(res));
    const std::size_t points = lx->count() * ly->count();
    if (points > 2'000'000)
        throw TooLarge("score table too large");
    auto table = std::make_shared<std::vector<std::vector<double>>>(n * m);
    if (!j.contains("values") || !j.at("values").is_object())
        throw InvalidInput("score file needs a 'values' object keyed \"i,j\"");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m; ++c) {
            const std::string key = std::to_string(i) + "," + std::to_string(c);
            if (!j.at("values").contains(key))
                throw InvalidInput("score file is missing values for \"" + key + "\"");
            const auto& arr = j.at("values").at(key);
            if (!arr.is_array() || arr.size() != points)
                throw InvalidInput("values for \"" + key + "\" must have " + std::to_string(points) + " entries");
            auto& dst = (*table)[i * m + c];
            for (const auto& v : arr) {
                double d = finite_number(v, "score value");
                if (d < 0.0)
                    throw InvalidInput("score values must be nonnegative");
                dst.push_back(d);
            }
        }
    const std::size_t ny = ly->count();
    ScoreField s({n, m}, [lx, ly, table, ny](std::span<const ScoreField::Coords> p, std::span<double> out) {
        auto sx = lx->stencil(p[0]);
        auto sy = ly->stencil(p[1]);
        for (std::size_t t = 0; t < out.size(); ++t) {
            double v = 0.0;
            const auto& tab = (*table)[t];
            for (auto [ix, wx] : sx)
                for (auto [iy, wy] : sy)
                    v += wx * wy * tab[ix * ny + iy];
            out[t] = v;
        }
    });
    auto report = check_cover_conditions(s, static_cast<std::int64_t>(res));
    if (!report.boundary_ok)
        throw InvalidInput("score file violates the forbidden-facet condition");
    return s;
}

inline ScoreField field_from_problem(const json& problem) {
    const auto& scores = problem.at("scores");
    if (scores.is_string()) {
        if (scores.get<std::string>() != "canonical")
            throw InvalidInput("unknown built-in score field '" + scores.get<std::string>() + "'");
        return canonical_field({problem.at("n").get<std::size_t>(), problem.at("m").get<std::size_t>()});
    }
    auto s = tabulated_field(scores);
    if (s.shape()[0] != problem.at("n").get<std::size_t>() || s.shape()[1] != problem.at("m").get<std::size_t>())
        throw InvalidInput("score file dimensions disagree with --n/--m");
    return s;
}

// Built-in colored covering of Delta^{n-1}: A_ij = {x_i > 0}.
inline ColoredField canonical_colored(std::size_t n, std::size_t m) {
    return ColoredField{n, m, [n, m](std::span<const double> x, std::span<double> out) {
                            for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t j = 0; j < m; ++j)
                                    out[i * m + j] = x[i];
                        }};
}

inline QuotaVector quota_from_problem(const json& problem) {
    auto a = problem.at("quota").get<std::vector<std::size_t>>();
    std::size_t total = 0;
    for (auto v : a)
        total += v;
    return make_quota(a, total);
}

// ---- verification ---------------------------------------------------------

namespace detail {

struct Checks {
    json items = json::object();
    void add(const std::string& name, bool ok) { items[name] = ok; }
    json block() const {
        bool all = true;
        for (const auto& [k, v] : items.items())
            all = all && v.get<bool>();
        return {{"checks", items}, {"all_passed", all}};
    }
};

inline bool sigma_matches_quota(const std::vector<std::size_t>& sigma, const QuotaVector& a) {
    std::vector<std::size_t> counts(a.size(), 0);
    for (auto s : sigma) {
        if (s >= a.size())
            return false;
        ++counts[s];
    }
    return counts == a.a && sigma.size() == a.target;
}

inline bool cuts_valid(const std::vector<double>& cuts) {
    if (cuts.size() < 2 || cuts.front() != 0.0 || cuts.back() != 1.0)
        return false;
    return std::is_sorted(cuts.begin(), cuts.end());
}

inline CutFamily cut_from_json(const json& j) {
    return CutFamily{j.at("vertical").get<std::vector<double>>(), j.at("horizontal").get<std::vector<double>>()};
}

inline json cut_to_json(const CutFamily& c) {
    return {{"vertical", c.vertical}, {"horizontal", c.horizontal}};
}

inline HellyWitness witness_from_json(const json& j) {
    return HellyWitness{j.at("members").get<std::vector<std::size_t>>(), j.at("sigma").get<std::vector<std::size_t>>(),
                        j.at("quota").get<std::vector<std::size_t>>()};
}

inline json witness_to_json(const HellyWitness& w) {
    return {{"members", w.members}, {"sigma", w.sigma}, {"quota", w.quota}};
}

inline void verify_kkm_like(Checks& ck, const ScoreField& s, const QuotaVector& a, double tol,
                            const std::string& outcome, const json& sol) {
    auto p = point_from_json(sol.at("point"));
    auto scores = s(p);
    if (outcome == "KkmSolution") {
        auto sigma = sol.at("sigma").get<std::vector<std::size_t>>();
        ck.add("quota_exact", sigma_matches_quota(sigma, a));
        bool positive = sigma.size() == a.target;
        for (std::size_t j = 0; j < sigma.size() && positive; ++j)
            positive = sigma[j] < a.size() && scores[sigma[j] * a.target + j] > 0.0;
        ck.add("scores_positive_along_sigma", positive);
        auto w = normalize_scores(scores);
        ck.add("residual_within_tol", balance_residual(w.phi, s.shape(), BalancedTarget::quota(a)) <= tol);
    } else if (outcome == "NotCovered") {
        ck.add("all_scores_zero", std::all_of(scores.begin(), scores.end(), [](double v) { return !(v > 0.0); }));
    } else {
        ck.add("known_outcome", false);
    }
}

inline double opt_number(const json& problem, const char* key, double fallback) {
    return problem.contains(key) ? problem.at(key).get<double>() : fallback;
}

} // namespace detail

/// Recomputes the verification block of a certificate from its embedded
/// problem and solution.
inline json verify_certificate(const json& cert) {
    detail::Checks ck;
    const auto command = cert.at("command").get<std::string>();
    const auto& problem = cert.at("problem");
    const auto outcome = cert.at("outcome").get<std::string>();
    const auto& sol = cert.at("solution");
    const double tol = detail::opt_number(problem, "tol", 1e-7);

    if (command == "kkm") {
        detail::verify_kkm_like(ck, field_from_problem(problem), quota_from_problem(problem), tol, outcome, sol);
    } else if (command == "colored-kkm") {
        const auto n = problem.at("n").get<std::size_t>(), m = problem.at("m").get<std::size_t>();
        auto colored = canonical_colored(n, m);
        auto a = quota_from_problem(problem);
        detail::verify_kkm_like(ck, lift_colored(colored), a, tol, outcome, sol);
        if (outcome == "KkmSolution") {
            auto x = point_from_json(sol.at("point")).factors.at(0).to_doubles();
            auto base = colored(x);
            auto sigma = sol.at("sigma").get<std::vector<std::size_t>>();
            bool inside = sigma.size() == m;
            for (std::size_t j = 0; j < sigma.size() && inside; ++j)
                inside = sigma[j] < n && base[sigma[j] * m + j] > 0.0;
            ck.add("x_in_colored_sets", inside);
        }
    } else if (command == "kkm-r") {
        const auto r = problem.at("r").get<std::size_t>(), n = problem.at("n").get<std::size_t>();
        auto s = canonical_field(std::vector<std::size_t>(r, n));
        auto p = point_from_json(sol.at("point"));
        auto scores = s(p);
        if (outcome == "KkmMatchingSolution") {
            auto tuples = sol.at("matching").get<std::vector<std::vector<std::size_t>>>();
            bool shape_ok = true, positive = true, disjoint = true;
            for (const auto& t : tuples) {
                shape_ok = shape_ok && t.size() == r && std::all_of(t.begin(), t.end(), [n](auto v) { return v < n; });
                if (shape_ok)
                    positive = positive && scores[s.flatten(t)] > 0.0;
            }
            for (std::size_t e = 0; e < tuples.size() && shape_ok; ++e)
                for (std::size_t f = e + 1; f < tuples.size(); ++f)
                    disjoint = disjoint && !edges_conflict(tuples[e], tuples[f]);
            ck.add("tuples_well_formed", shape_ok);
            ck.add("matching_disjoint", disjoint);
            ck.add("matched_scores_positive", positive);
            ck.add("size_reaches_bound", tuples.size() >= fractional_matching_bound(n, r));
            auto w = normalize_scores(scores);
            ck.add("residual_within_tol", balance_residual(w.phi, s.shape(), BalancedTarget::uniform(r, n)) <= tol);
        } else if (outcome == "NotCovered") {
            ck.add("all_scores_zero", std::all_of(scores.begin(), scores.end(), [](double v) { return !(v > 0.0); }));
        } else {
            ck.add("known_outcome", false);
        }
    } else if (command == "oracle") {
        auto s = field_from_problem(problem);
        auto a = quota_from_problem(problem);
        const auto res = problem.at("resolution").get<std::int64_t>();
        if (outcome == "OracleHit") {
            auto p = point_from_json(sol.at("point"));
            auto scores = s(p);
            auto sigma = sol.at("sigma").get<std::vector<std::size_t>>();
            ck.add("quota_exact", detail::sigma_matches_quota(sigma, a));
            bool positive = sigma.size() == a.target;
            for (std::size_t j = 0; j < sigma.size() && positive; ++j)
                positive = scores[sigma[j] * a.target + j] > 0.0;
            ck.add("scores_positive_along_sigma", positive);
            bool on_lattice = true;
            for (const auto& f : p.factors)
                for (const auto& c : f.coords())
                    on_lattice = on_lattice && (res % c.denominator() == 0);
            ck.add("point_on_lattice", on_lattice);
        } else if (outcome == "NoneFound") {
            bool none = true;
            for (const auto& sigma : quota_maps(a))
                none = none && !oracle_feasible(s, sigma, res);
            ck.add("no_feasible_map_on_lattice", none);
        } else {
            ck.add("known_outcome", false);
        }
    } else if (command == "square-partition") {
        auto d = density_from_json(problem.at("density"));
        const double c = problem.at("c").get<double>();
        const double eps = problem.at("eps").get<double>();
        PartitionPair pp{sol.at("x_cuts").get<std::vector<double>>(), sol.at("y_cuts").get<std::vector<double>>()};
        const auto n = problem.at("n").get<std::size_t>(), m = problem.at("m").get<std::size_t>();
        ck.add("partition_well_formed",
               detail::cuts_valid(pp.x_cuts) && detail::cuts_valid(pp.y_cuts) && pp.n() == n && pp.m() == m);
        if (pp.n() != n || pp.m() != m)
            return ck.block();
        auto masses = cell_masses(d, pp);
        if (outcome == "AllBelow") {
            ck.add("all_masses_below_c",
                   std::all_of(masses.begin(), masses.end(), [c](double v) { return v < c; }));
        } else if (outcome == "QuotaPartition") {
            auto sigma = sol.at("sigma").get<std::vector<std::size_t>>();
            auto a = quota_from_problem(problem);
            ck.add("quota_exact", detail::sigma_matches_quota(sigma, a));
            bool heavy = sigma.size() == m;
            for (std::size_t j = 0; j < sigma.size() && heavy; ++j)
                heavy = sigma[j] < n && masses[sigma[j] * m + j] >= c - eps;
            ck.add("quota_masses_at_least_c_minus_eps", heavy);
        } else {
            ck.add("known_outcome", false);
        }
    } else if (command == "cut-lines" || command == "witness" || command == "helly-check") {
        auto f = family_from_json(problem.at("family"));
        const auto n = problem.at("n").get<std::size_t>(), m = problem.at("m").get<std::size_t>();
        auto check_cut = [&](const CutFamily& cut, const std::string& prefix) {
            ck.add(prefix + "cuts_every_member", cuts_family(f, cut));
            ck.add(prefix + "line_budget", cut.vertical.size() <= n && cut.horizontal.size() <= m);
        };
        if (command == "cut-lines") {
            if (outcome == "Cut") {
                check_cut(detail::cut_from_json(sol.at("cut")), "");
            } else if (outcome == "NoneExists") {
                ck.add("no_cut_by_enumeration", std::holds_alternative<NoneExists>(find_cut_exhaustive(f, n, m)));
                bool witnesses = true;
                std::size_t count = 0;
                for (const auto& w : sol.at("witnesses")) {
                    auto hw = detail::witness_from_json(w);
                    witnesses = witnesses && hw.members.size() == m + 1 && hw.quota.size() == n + 1 &&
                                validate_witness(f, hw);
                    ++count;
                }
                ck.add("witnesses_valid", witnesses);
                ck.add("witness_per_quota", count == compositions(m + 1, n + 1).size());
            } else {
                ck.add("known_outcome", false);
            }
        } else if (command == "witness") {
            if (outcome == "HellyWitness") {
                auto hw = detail::witness_from_json(sol.at("witness"));
                ck.add("witness_valid", hw.members.size() == m + 1 && hw.quota == quota_from_problem(problem).a &&
                                            validate_witness(f, hw));
            } else if (outcome == "CutPoint") {
                check_cut(detail::cut_from_json(sol.at("cut")), "");
            } else if (outcome == "NoneFound") {
                ck.add("no_witness_by_enumeration",
                       std::holds_alternative<NoneFound>(find_witness(f, n, m, quota_from_problem(problem))));
            } else {
                ck.add("known_outcome", false);
            }
        } else {
            const bool premise = sol.at("premise").get<bool>();
            if (!premise) {
                auto ids = sol.at("violating").get<std::vector<std::size_t>>();
                Family g{{}, f.open};
                bool ok = !ids.empty() && ids.size() <= m + 1;
                for (auto i : ids) {
                    ok = ok && i < f.size();
                    if (ok)
                        g.sets.push_back(f[i]);
                }
                ok = ok && std::holds_alternative<NoneExists>(find_cut_exhaustive(g, 0, m)) &&
                     std::holds_alternative<NoneExists>(find_cut_exhaustive(g, n, 0));
                ck.add("violating_subfamily_confirmed", ok);
            }
            if (sol.at("conclusion").at("outcome").get<std::string>() == "Cut")
                check_cut(detail::cut_from_json(sol.at("conclusion").at("cut")), "conclusion_");
            else
                ck.add("conclusion_no_cut_by_enumeration",
                       std::holds_alternative<NoneExists>(find_cut_exhaustive(f, n, m)));
            ck.add("theorem_respected", sol.at("theorem_respected").get<bool>() &&
                                            (!premise || sol.at("conclusion").at("outcome") == "Cut"));
        }
    } else {
        throw InvalidInput("unknown certificate command '" + command + "'");
    }
    return ck.block();
}

// ---- plot data ------------------------------------------------------------

inline std::string emit_plot_data(const json& cert) {
    const auto command = cert.at("command").get<std::string>();
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "kind,index,v0,v1,v2,v3\n";
    if (command == "square-partition") {
        const auto& sol = cert.at("solution");
        auto xs = sol.at("x_cuts").get<std::vector<double>>();
        auto ys = sol.at("y_cuts").get<std::vector<double>>();
        for (std::size_t i = 1; i + 1 < xs.size(); ++i)
            os << "x_cut," << i << ',' << num(xs[i]) << ",,,\n";
        for (std::size_t j = 1; j + 1 < ys.size(); ++j)
            os << "y_cut," << j << ',' << num(ys[j]) << ",,,\n";
        return os.str();
    }
    if (command == "cut-lines") {
        auto f = family_from_json(cert.at("problem").at("family"));
        for (std::size_t k = 0; k < f.size(); ++k)
            os << "box," << k << ',' << num(f[k].x.lo) << ',' << num(f[k].x.hi) << ',' << num(f[k].y.lo) << ','
               << num(f[k].y.hi) << '\n';
        if (cert.at("outcome") == "Cut") {
            auto cut = detail::cut_from_json(cert.at("solution").at("cut"));
            for (std::size_t k = 0; k < cut.vertical.size(); ++k)
                os << "vertical," << k << ',' << num(cut.vertical[k]) << ",,,\n";
            for (std::size_t k = 0; k < cut.horizontal.size(); ++k)
                os << "horizontal," << k << ',' << num(cut.horizontal[k]) << ",,,\n";
        }
        return os.str();
    }
    throw UnsupportedCertificate("plot data is available for square-partition and cut-lines certificates only");
}

// ---- dispatch -------------------------------------------------------------

struct Options {
    std::size_t n = 0, m = 0, r = 0;
    std::string quota;
    double c = 0.0;
    double eps = 0.0;
    double tol = 1e-7;
    int budget = 40;
    std::int64_t resolution = 0;
    std::int64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string scores = "canonical";
    std::string input;
    std::string density;
    std::string family;
    std::string method = "exhaustive";
};

struct Outcome {
    std::string tag;
    json solution;
    int code = 0;
};

namespace detail {

inline SearchOptions search_options(const Options& o) {
    SearchOptions s;
    s.tol = o.tol;
    s.budget = o.budget;
    if (o.resolution > 0)
        s.base_resolution = o.resolution;
    return s;
}

inline Outcome kkm_outcome(const KkmResult& r) {
    if (auto* sol = std::get_if<KkmSolution>(&r))
        return {"KkmSolution",
                {{"point", point_to_json(sol->point)}, {"sigma", sol->assignment.sigma}, {"residual", sol->residual}},
                0};
    if (auto* nc = std::get_if<NotCovered>(&r))
        return {"NotCovered", {{"point", point_to_json(nc->point)}}, 1};
    auto& ex = std::get<SolverExhausted>(r);
    return {"SolverExhausted",
            {{"best_point", point_to_json(ex.best_point)}, {"best_residual", ex.best_residual}, {"reason", ex.reason}},
            2};
}

inline json witness_list(const Family& f, std::size_t n, std::size_t m, const SearchOptions& opt) {
    json out = json::array();
    for (const auto& a : compositions(m + 1, n + 1)) {
        std::optional<HellyWitness> w;
        try {
            auto r = find_witness(f, n, m, a);
            if (auto* hw = std::get_if<HellyWitness>(&r))
                w = *hw;
        } catch (const TooLarge&) {
            auto r = witness_from_kkm(normalize_to_unit_square(f), n, m, a, opt);
            if (auto* hw = std::get_if<HellyWitness>(&r))
                w = *hw;
        }
        if (!w)
            throw Error("no witness found for a quota although no cut exists");
        out.push_back(witness_to_json(*w));
    }
    return out;
}

inline json cut_outcome_json(const std::variant<CutFamily, NoneExists>& r) {
    if (auto* c = std::get_if<CutFamily>(&r))
        return {{"outcome", "Cut"}, {"cut", cut_to_json(*c)}};
    return {{"outcome", "NoneExists"}};
}

} // namespace detail

inline Outcome solve_problem(const std::string& command, json& problem, const Options& o) {
    const auto opt = detail::search_options(o);
    if (command == "kkm") {
        auto s = field_from_problem(problem);
        return detail::kkm_outcome(solve_kkm_product(s, quota_from_problem(problem), opt));
    }
    if (command == "colored-kkm") {
        auto colored = canonical_colored(o.n, o.m);
        return detail::kkm_outcome(solve_colored_kkm(colored, quota_from_problem(problem), opt));
    }
    if (command == "kkm-r") {
        auto s = canonical_field(std::vector<std::size_t>(o.r, o.n));
        auto r = solve_kkm_r(s, opt);
        if (auto* sol = std::get_if<KkmMatchingSolution>(&r))
            return {"KkmMatchingSolution",
                    {{"point", point_to_json(sol->point)},
                     {"matching", sol->matching},
                     {"residual", sol->residual},
                     {"delta", sol->delta},
                     {"support_edges", sol->support.edges.size()}},
                    0};
        if (auto* nc = std::get_if<NotCovered>(&r))
            return {"NotCovered", {{"point", point_to_json(nc->point)}}, 1};
        if (auto* small = std::get_if<MatchingTooSmall>(&r))
            return {"MatchingTooSmall",
                    {{"point", point_to_json(small->point)}, {"size", small->size}, {"bound", small->bound}},
                    2};
        auto& ex = std::get<SolverExhausted>(r);
        return {"SolverExhausted", {{"best_residual", ex.best_residual}, {"reason", ex.reason}}, 2};
    }
    if (command == "oracle") {
        auto s = field_from_problem(problem);
        auto r = oracle_solve(s, quota_from_problem(problem), problem.at("resolution").get<std::int64_t>());
        if (auto* hit = std::get_if<OracleHit>(&r))
            return {"OracleHit",
                    {{"point", point_to_json(hit->point)},
                     {"sigma", hit->assignment.sigma},
                     {"min_score", hit->min_score}},
                    0};
        return {"NoneFound", json::object(), 1};
    }
    if (command == "square-partition") {
        auto d = density_from_json(problem.at("density"));
        SquarePartitionOptions sp;
        sp.eps = problem.at("eps").get<double>();
        sp.search = opt;
        auto r = solve_square_partition(d, problem.at("c").get<double>(), o.n, o.m, quota_from_problem(problem), sp);
        if (auto* ab = std::get_if<AllBelow>(&r))
            return {"AllBelow",
                    {{"x_cuts", ab->partition.x_cuts}, {"y_cuts", ab->partition.y_cuts}, {"max_mass", ab->max_mass}},
                    0};
        if (auto* q = std::get_if<QuotaPartition>(&r))
            return {"QuotaPartition",
                    {{"x_cuts", q->partition.x_cuts},
                     {"y_cuts", q->partition.y_cuts},
                     {"sigma", q->assignment.sigma},
                     {"min_mass", q->min_mass}},
                    1};
        auto& ex = std::get<SolverExhausted>(r);
        return {"SolverExhausted", {{"best_residual", ex.best_residual}, {"reason", ex.reason}}, 2};
    }

    auto f = family_from_json(problem.at("family"));
    if (command == "cut-lines") {
        auto r = find_cut(f, o.n, o.m);
        if (auto* c = std::get_if<CutFamily>(&r))
            return {"Cut", {{"cut", detail::cut_to_json(*c)}}, 0};
        return {"NoneExists", {{"witnesses", detail::witness_list(f, o.n, o.m, opt)}}, 1};
    }
    if (command == "witness") {
        auto a = quota_from_problem(problem);
        if (o.method == "exhaustive") {
            auto r = find_witness(f, o.n, o.m, a);
            if (auto* w = std::get_if<HellyWitness>(&r))
                return {"HellyWitness", {{"witness", detail::witness_to_json(*w)}, {"method", "exhaustive"}}, 0};
            return {"NoneFound", {{"method", "exhaustive"}}, 1};
        }
        const auto frame = unit_square_frame(f);
        auto r = witness_from_kkm(normalize_to_unit_square(f), o.n, o.m, a, opt);
        if (auto* w = std::get_if<HellyWitness>(&r))
            return {"HellyWitness", {{"witness", detail::witness_to_json(*w)}, {"method", "kkm"}}, 0};
        if (auto* cp = std::get_if<CutPoint>(&r)) {
            CutFamily cut;
            for (double u : cp->cut.vertical)
                cut.vertical.push_back(frame.from_unit_x(u));
            for (double u : cp->cut.horizontal)
                cut.horizontal.push_back(frame.from_unit_y(u));
            return {"CutPoint", {{"cut", detail::cut_to_json(cut)}, {"method", "kkm"}}, 1};
        }
        auto& ex = std::get<SolverExhausted>(r);
        return {"SolverExhausted", {{"best_residual", ex.best_residual}, {"reason", ex.reason}}, 2};
    }
    if (command == "helly-check") {
        auto rep = helly_check(f, o.n, o.m);
        json sol = {{"premise", rep.premise},
                    {"conclusion", detail::cut_outcome_json(rep.conclusion)},
                    {"theorem_respected", rep.theorem_respected},
                    {"subfamilies_checked", rep.subfamilies_checked}};
        if (rep.violating)
            sol["violating"] = *rep.violating;
        return {"HellyReport", sol, rep.theorem_respected ? 0 : 2};
    }
    throw InvalidInput("unknown command '" + command + "'");
}

inline json build_problem(const std::string& command, const Options& o, std::ostream& err) {
    json p = {{"n", o.n}, {"m", o.m}, {"tol", o.tol}, {"budget", o.budget}};
    auto need_quota = [&]() {
        auto q = parse_quota_list(o.quota);
        p["quota"] = q;
    };
    if (command == "kkm" || command == "oracle") {
        need_quota();
        if (o.scores == "canonical")
            p["scores"] = "canonical";
        else if (o.scores == "file") {
            if (o.input.empty())
                throw InvalidInput("--scores file needs --input");
            p["scores"] = read_json_file(o.input);
        } else
            throw InvalidInput("--scores must be canonical or file");
        if (command == "oracle")
            p["resolution"] = o.resolution > 0 ? o.resolution : 16;
    } else if (command == "colored-kkm") {
        need_quota();
        p["scores"] = "canonical";
    } else if (command == "kkm-r") {
        if (o.scores != "canonical")
            throw InvalidInput("kkm-r supports the canonical field only");
        p["r"] = o.r;
        p["scores"] = "canonical";
    } else if (command == "square-partition") {
        need_quota();
        if (o.density.empty())
            throw InvalidInput("square-partition needs --density");
        auto dj = read_json_file(o.density);
        auto d = density_from_json(dj);
        if (std::abs(d.input_mass() - 1.0) > 1e-6)
            err << "warning: density total mass " << d.input_mass() << " normalized to 1\n";
        p["density"] = dj;
        if (!(o.c > 0.0))
            throw InvalidInput("--c must be positive");
        p["c"] = o.c;
        p["eps"] = o.eps > 0.0 ? o.eps : 1e-6 * o.c;
    } else {
        if (o.family.empty())
            throw InvalidInput(command + " needs --family");
        auto fj = read_json_file(o.family);
        p["family"] = family_to_json(family_from_json(fj));
        if (command == "witness") {
            need_quota();
            if (o.method != "exhaustive" && o.method != "kkm")
                throw InvalidInput("--method must be exhaustive or kkm");
        }
    }
    return p;
}

/// Runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Balanced-point solvers for products of simplices, measure partitions and line cuts", "kkmcut"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--n", o.n, "first dimension parameter");
        sub->add_option("--m", o.m, "second dimension parameter");
        sub->add_option("--tol", o.tol, "balance tolerance");
        sub->add_option("--budget", o.budget, "refinement steps");
        sub->add_option("--resolution", o.resolution, "lattice resolution");
        sub->add_option("--seed", o.seed, "seed recorded in the certificate");
        sub->add_option("--out", o.out, "write the certificate here instead of stdout");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };

    std::vector<std::pair<std::string, CLI::App*>> subs;
    auto add = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        common(s);
        subs.emplace_back(name, s);
        return s;
    };
    auto* kkm = add("kkm", "balanced point and quota map on a product of two simplices");
    kkm->add_option("--quota", o.quota)->required();
    kkm->add_option("--scores", o.scores, "canonical or file");
    kkm->add_option("--input", o.input, "score file");
    auto* kr = add("kkm-r", "r-factor matching version on the canonical field");
    kr->add_option("--r", o.r)->required();
    kr->add_option("--scores", o.scores);
    auto* ck = add("colored-kkm", "colored covering of one simplex");
    ck->add_option("--quota", o.quota)->required();
    auto* sp = add("square-partition", "partition a density on the unit square");
    sp->add_option("--density", o.density)->required();
    sp->add_option("--c", o.c)->required();
    sp->add_option("--eps", o.eps);
    sp->add_option("--quota", o.quota)->required();
    auto* cl = add("cut-lines", "cut a family by n vertical and m horizontal lines");
    cl->add_option("--family", o.family)->required();
    auto* wi = add("witness", "find an obstruction subfamily");
    wi->add_option("--family", o.family)->required();
    wi->add_option("--quota", o.quota)->required();
    wi->add_option("--method", o.method)->check(CLI::IsMember({"exhaustive", "kkm"}));
    auto* hc = add("helly-check", "check the small-subfamily condition and its conclusion");
    hc->add_option("--family", o.family)->required();
    auto* oc = add("oracle", "brute force over lattice points and quota maps");
    oc->add_option("--quota", o.quota)->required();
    oc->add_option("--scores", o.scores);
    oc->add_option("--input", o.input);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    std::string command;
    for (auto& [name, s] : subs)
        if (s->parsed())
            command = name;

    try {
        const auto start = std::chrono::steady_clock::now();
        json problem = build_problem(command, o, err);
        Outcome result = solve_problem(command, problem, o);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        json cert = {{"command", command},
                     {"problem", problem},
                     {"outcome", result.tag},
                     {"solution", result.solution},
                     {"seed", o.seed},
                     {"timing_ms", ms}};
        if (result.code == 2 && result.tag != "HellyReport") {
            err << "error: " << result.tag << ": " << result.solution.value("reason", std::string("no certificate"))
                << '\n';
            return 2;
        }
        cert["verification"] = verify_certificate(cert);
        if (!cert["verification"]["all_passed"].get<bool>()) {
            err << "error: certificate failed verification: " << cert["verification"].dump() << '\n';
            return 2;
        }
        std::string text = o.format == "csv" ? emit_plot_data(cert) : cert.dump(2) + "\n";
        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream file(o.out);
            if (!file)
                throw InvalidInput("cannot write " + o.out);
            file << text;
        }
        return result.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace kkmcut::cli
