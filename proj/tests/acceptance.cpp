// Acceptance gate: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kkmcut/engine.hpp"
#include "kkmcut/lines.hpp"
#include "kkmcut/matching.hpp"
#include "kkmcut/measure.hpp"
#include "oracles.hpp"
#include "random_fields.hpp"

using namespace kkmcut;
namespace kt = kkmcut::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
    bool pass = true;
    std::ostringstream note;

    void fail(const std::string& why) {
        if (pass)
            note << "first failure: " << why << "; ";
        pass = false;
    }
};

bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); });
}

// Independent check of a two-factor solution from raw scores.
bool solution_ok(const ScoreField& s, const QuotaVector& a, const KkmSolution& sol, double tol) {
    const std::size_t n = a.size(), m = a.target;
    auto sc = s(sol.point);
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t j = 0; j < m; ++j) {
        auto i = sol.assignment.sigma.at(j);
        if (i >= n || !(sc[i * m + j] > 0.0))
            return false;
        ++counts[i];
    }
    return counts == a.a && kt::brute_residual(sc, n, m, a.a) < tol;
}

// 1. Two-factor theorem on random fields.
Verdict criterion_1() {
    Verdict v;
    int solved = 0, uncovered = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        // alternate dense fields with fields that have holes
        auto s = kt::random_product_field({2, 3}, 1000 + seed, seed % 2 ? 0.4 : 1.5);
        for (auto q : {std::vector<std::size_t>{1, 2}, std::vector<std::size_t>{2, 1}}) {
            auto a = make_quota(q, 3);
            auto t0 = Clock::now();
            auto r = solve_kkm_product(s, a);
            double dt = seconds_since(t0);
            worst = std::max(worst, dt);
            if (dt >= 5.0)
                v.fail("seed " + std::to_string(seed) + " took " + std::to_string(dt) + " s");
            if (auto* sol = std::get_if<KkmSolution>(&r)) {
                if (!solution_ok(s, a, *sol, 1e-7))
                    v.fail("unverified solution at seed " + std::to_string(seed));
                ++solved;
            } else if (auto* nc = std::get_if<NotCovered>(&r)) {
                if (!all_zero(s(nc->point)))
                    v.fail("NotCovered point is covered at seed " + std::to_string(seed));
                ++uncovered;
            } else {
                v.fail("solver exhausted at seed " + std::to_string(seed));
            }
        }
    }
    for (auto q : {std::vector<std::size_t>{1, 2}, std::vector<std::size_t>{2, 1}}) {
        auto s = canonical_field({2, 3});
        auto a = make_quota(q, 3);
        auto r = solve_kkm_product(s, a);
        auto* sol = std::get_if<KkmSolution>(&r);
        if (!sol || !solution_ok(s, a, *sol, 1e-12) || !(sol->residual < 1e-12))
            v.fail("canonical field residual not below 1e-12");
    }
    v.note << solved << " solved, " << uncovered << " uncovered, slowest " << worst << " s";
    return v;
}

// 2. Quota-Hall lemma, exhaustive over small graphs.
Verdict criterion_2() {
    Verdict v;
    auto t0 = Clock::now();
    std::size_t cases = 0, infeasible = 0;
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t m = 1; m <= 4; ++m) {
            auto quotas = compositions(m, n);
            if (quotas.empty())
                continue;
            const std::size_t slots = n * m;
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots); ++mask) {
                BipartiteGraph g(n, m);
                for (std::size_t e = 0; e < slots; ++e)
                    if (mask >> e & 1)
                        g.add_edge(e / m, e % m);
                for (const auto& a : quotas) {
                    ++cases;
                    auto r = quota_matching(g, a);
                    bool hall = check_hall_quota(g, a);
                    bool feasible = std::holds_alternative<Assignment>(r);
                    if (feasible != hall || hall != kt::brute_quota_feasible(g, a))
                        v.fail("feasibility disagreement");
                    if (auto* s = std::get_if<Assignment>(&r)) {
                        std::vector<std::size_t> counts(n, 0);
                        for (std::size_t j = 0; j < m; ++j) {
                            if (!g.has_edge(s->sigma[j], j))
                                v.fail("assignment uses a non-edge");
                            ++counts[s->sigma[j]];
                        }
                        if (counts != a.a)
                            v.fail("assignment misses quota");
                    } else {
                        ++infeasible;
                        const auto& bad = std::get<Infeasible>(r);
                        std::size_t demand = 0;
                        for (auto i : bad.subset)
                            demand += a[i];
                        if (bad.subset.empty() || kt::brute_neighborhood(g, bad.subset) >= demand)
                            v.fail("certificate subset does not violate the inequality");
                    }
                }
            }
        }
    double dt = seconds_since(t0);
    if (dt >= 60.0)
        v.fail("runtime " + std::to_string(dt) + " s");
    v.note << cases << " (graph, quota) pairs, " << infeasible << " infeasible, " << dt << " s";
    return v;
}

// 3. Fractional matching bound for r = 3.
Verdict criterion_3() {
    Verdict v;
    std::mt19937_64 rng(3003);
    std::size_t instances = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 3);
        auto h = kt::random_fractional_matching(rng, n);
        if (!verify_fractional_matching(h, n)) {
            v.fail("generator produced an invalid fractional matching");
            continue;
        }
        ++instances;
        auto mm = max_hypergraph_matching(h);
        if (!is_matching(h, mm))
            v.fail("returned edges are not pairwise disjoint");
        for (std::size_t p = 0; p < mm.edges.size(); ++p)
            for (std::size_t q = p + 1; q < mm.edges.size(); ++q)
                for (std::size_t k = 0; k < 3; ++k)
                    if (h.edges[mm.edges[p]][k] == h.edges[mm.edges[q]][k])
                        v.fail("matched edges share a vertex");
        if (mm.size() < (n + 1) / 2)
            v.fail("matching below ceil(n/2) for n = " + std::to_string(n));
    }
    v.note << instances << " weighted sub-hypergraphs";
    return v;
}

// 4. r-factor theorem on canonical fields.
Verdict criterion_4() {
    Verdict v;
    for (auto [r, n] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {3, 3}, {4, 2}}) {
        auto s = canonical_field(std::vector<std::size_t>(r, n));
        auto res = solve_kkm_r(s);
        auto* sol = std::get_if<KkmMatchingSolution>(&res);
        const std::size_t bound = (n + r - 2) / (r - 1);
        if (!sol) {
            v.fail("no matching for (r, n) = (" + std::to_string(r) + ", " + std::to_string(n) + ")");
            continue;
        }
        auto sc = s(sol->point);
        if (sol->matching.size() < bound)
            v.fail("matching below bound");
        for (std::size_t p = 0; p < sol->matching.size(); ++p) {
            if (!(sc[s.flatten(sol->matching[p])] > 0.0))
                v.fail("matched edge has zero score");
            for (std::size_t q = p + 1; q < sol->matching.size(); ++q)
                for (std::size_t k = 0; k < r; ++k)
                    if (sol->matching[p][k] == sol->matching[q][k])
                        v.fail("matched edges intersect");
        }
        v.note << "(" << r << "," << n << "): |M| = " << sol->matching.size() << " >= " << bound << "; ";
    }
    return v;
}

double brute_cell(const GridDensity& d, const PartitionPair& pp, std::size_t i, std::size_t j) {
    return kt::brute_rectangle_mass(d, pp.x_cuts[i], pp.x_cuts[i + 1], pp.y_cuts[j], pp.y_cuts[j + 1]);
}

// 5. Square partition on the uniform density.
Verdict criterion_5() {
    Verdict v;
    const auto uni = GridDensity::uniform();
    {
        auto r = solve_square_partition(uni, 0.125, 2, 4, make_quota({2, 2}));
        auto* q = std::get_if<QuotaPartition>(&r);
        if (!q) {
            v.fail("n=2, m=4, c=1/8 did not give a quota partition");
        } else {
            if (q->assignment.counts(2) != std::vector<std::size_t>{2, 2})
                v.fail("quota counts wrong");
            for (std::size_t j = 0; j < 4; ++j)
                if (!(brute_cell(uni, q->partition, q->assignment.sigma[j], j) >= 0.125 - 1e-6))
                    v.fail("quota rectangle below 1/8 - 1e-6");
        }
    }
    {
        auto r = solve_square_partition(uni, 0.3, 2, 2, make_quota({1, 1}));
        auto* ab = std::get_if<AllBelow>(&r);
        if (!ab) {
            v.fail("n=m=2, c=0.3 did not give AllBelow");
        } else {
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j)
                    if (!(brute_cell(uni, ab->partition, i, j) < 0.3))
                        v.fail("AllBelow cell not below 0.3");
        }
    }
    std::mt19937_64 rng(5005);
    int trials = 0;
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 1 + rng() % 3, m = 1 + rng() % 3;
        if (n > m)
            std::swap(n, m);
        auto comps = compositions(m, n);
        auto a = comps[rng() % comps.size()];
        // c at or slightly below the pigeonhole bound 1/(nm)
        const double c = (1.0 - 0.2 * static_cast<double>(rng() % 2) * static_cast<double>(rng() % 100) / 100.0) /
                         static_cast<double>(n * m);
        auto r = solve_square_partition(uni, c, n, m, a);
        ++trials;
        if (std::holds_alternative<AllBelow>(r)) {
            v.fail("AllBelow returned although c <= 1/(nm)");
        } else if (auto* q = std::get_if<QuotaPartition>(&r)) {
            if (q->assignment.counts(n) != a.a)
                v.fail("quota counts wrong in pigeonhole trial");
            for (std::size_t j = 0; j < m; ++j)
                if (!(brute_cell(uni, q->partition, q->assignment.sigma[j], j) >= c - 1e-6 * c))
                    v.fail("pigeonhole quota rectangle too light");
        } else {
            v.fail("solver exhausted in pigeonhole trial n=" + std::to_string(n) + " m=" + std::to_string(m));
        }
    }
    v.note << "fixed cases plus " << trials << " pigeonhole trials";
    return v;
}

// 6. Line-cutting dichotomy.
Verdict criterion_6() {
    Verdict v;
    std::mt19937_64 rng(6006);
    int none = 0, cut = 0, kkm_runs = 0, kkm_witness = 0, kkm_cut = 0, kkm_exhausted = 0;
    for (int t = 0; t < 200; ++t) {
        const bool open = rng() % 4 != 0;
        auto f = kt::random_family(rng, 1 + rng() % 10, rng() % 2 == 0, open);
        std::size_t m = 1 + rng() % 3, n = 1 + rng() % std::min<std::size_t>(2, m);
        auto r = find_cut(f, n, m);
        const bool no_cut = std::holds_alternative<NoneExists>(r);
        if (no_cut)
            ++none;
        else
            ++cut;
        if (auto* c = std::get_if<CutFamily>(&r))
            if (!cuts_family(f, *c))
                v.fail("returned cut misses a member");
        auto g = normalize_to_unit_square(f);
        for (const auto& a : compositions(m + 1, n + 1)) {
            auto w = find_witness(f, n, m, a);
            auto* hw = std::get_if<HellyWitness>(&w);
            if (no_cut && !hw)
                v.fail("no cut and no witness, family " + std::to_string(t));
            if (hw && !(validate_witness(f, *hw) && kt::brute_witness_exists(f, n, m, a.a)))
                v.fail("witness failed re-validation");
            if (hw) {
                // pairwise y-disjoint, cross-group x-disjoint, recomputed here
                for (std::size_t p = 0; p < hw->members.size(); ++p)
                    for (std::size_t q = p + 1; q < hw->members.size(); ++q) {
                        const auto &A = f[hw->members[p]], &B = f[hw->members[q]];
                        if (!kt::brute_disjoint(A.y, B.y, f.open))
                            v.fail("witness y-projections meet");
                        if (hw->sigma[p] != hw->sigma[q] && !kt::brute_disjoint(A.x, B.x, f.open))
                            v.fail("witness x-projections meet across groups");
                    }
            }
            ++kkm_runs;
            auto k = witness_from_kkm(g, n, m, a);
            if (auto* kw = std::get_if<HellyWitness>(&k)) {
                ++kkm_witness;
                if (!validate_witness(f, *kw) || !hw)
                    v.fail("kkm witness disagrees with exhaustive search");
            } else if (auto* cp = std::get_if<CutPoint>(&k)) {
                ++kkm_cut;
                if (!cuts_family(g, cp->cut) || no_cut)
                    v.fail("kkm cut point disagrees with exact cutting");
            } else {
                ++kkm_exhausted;
            }
        }
    }
    v.note << none << " uncuttable, " << cut << " cuttable; kkm: " << kkm_witness << " witnesses, " << kkm_cut
           << " cut points, " << kkm_exhausted << " not converged of " << kkm_runs;
    return v;
}

// 7. Helly-type cutting property.
Verdict criterion_7() {
    Verdict v;
    std::mt19937_64 rng(7007);
    int premise_true = 0;
    for (int t = 0; t < 500; ++t) {
        auto f = kt::random_family(rng, 1 + rng() % 8, rng() % 2 == 0, rng() % 4 != 0);
        std::size_t n = 1 + rng() % 2, m = n + rng() % (3 - n);
        auto rep = helly_check(f, n, m);
        premise_true += rep.premise;
        if (!rep.theorem_respected)
            v.fail("theorem violated on family " + std::to_string(t));
        if (rep.premise && !kt::brute_cuttable(f, n, m))
            v.fail("premise holds but enumeration finds no cut");
    }
    Family common{{make_box(0, 2, 0, 1), make_box(1, 3, 2, 3), make_box(1.5, 4, 5, 9), make_box(-1, 1.8, 4, 4.5)}, true};
    auto good = helly_check(common, 1, 2);
    if (!good.premise || !std::holds_alternative<CutFamily>(good.conclusion) || !good.theorem_respected)
        v.fail("premise-true fixture");
    Family diag{{make_box(0, 1, 0, 1), make_box(2, 3, 2, 3), make_box(4, 5, 4, 5)}, true};
    auto bad = helly_check(diag, 1, 1);
    if (bad.premise || !bad.violating || *bad.violating != std::vector<std::size_t>{0, 1} || !bad.theorem_respected)
        v.fail("premise-false fixture");
    v.note << "500 random families (" << premise_true << " with premise true) plus two fixtures";
    return v;
}

// 8. Oracle equivalence.
Verdict criterion_8() {
    Verdict v;
    std::mt19937_64 rng(8008);
    int families = 0;
    for (int t = 0; t < 500; ++t) {
        auto f = kt::random_family(rng, 1 + rng() % 8, rng() % 2 == 0, rng() % 4 != 0);
        std::size_t n = rng() % 5;
        std::size_t m = rng() % (5 - n);
        bool fast = std::holds_alternative<CutFamily>(find_cut(f, n, m));
        if (fast != kt::brute_cuttable(f, n, m))
            v.fail("find_cut disagrees with enumeration on family " + std::to_string(t));
        ++families;
    }
    int fields = 0, solved = 0;
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto [n, m] = shapes[seed % shapes.size()];
        auto s = kt::random_product_field({n, m}, 8000 + seed, seed % 3 == 0 ? 0.4 : 1.2);
        for (const auto& a : compositions(m, n)) {
            ++fields;
            auto r = solve_kkm_product(s, a);
            auto oracle = oracle_solve(s, a, 16);
            if (auto* sol = std::get_if<KkmSolution>(&r)) {
                ++solved;
                if (!std::holds_alternative<OracleHit>(oracle) || !oracle_feasible(s, sol->assignment, 16))
                    v.fail("solver sigma infeasible for the oracle, seed " + std::to_string(seed));
            } else if (std::holds_alternative<SolverExhausted>(r)) {
                v.fail("solver exhausted, seed " + std::to_string(seed));
            }
        }
    }
    v.note << families << " families; " << fields << " (field, quota) pairs, " << solved << " solved";
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"two-factor balanced point and quota map", criterion_1},
        {"quota Hall lemma", criterion_2},
        {"fractional hypergraph matching bound", criterion_3},
        {"r-factor matching", criterion_4},
        {"square partition", criterion_5},
        {"line-cutting dichotomy", criterion_6},
        {"Helly-type cutting property", criterion_7},
        {"oracle equivalence", criterion_8},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.fail(std::string("exception: ") + e.what());
        }
        failed += !v.pass;
        std::printf("[%s] %zu %s (%.2f s) %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    seconds_since(t0), v.note.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
