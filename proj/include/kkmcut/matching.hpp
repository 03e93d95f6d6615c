#pragma once

// Quota-constrained bipartite assignment (generalized Hall lemma) and
// matchings in r-partite r-uniform hypergraphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kkmcut/errors.hpp"

namespace kkmcut {

/// Positive integers a_0..a_{n-1} summing to target.
struct QuotaVector {
    std::vector<std::size_t> a;
    std::size_t target = 0;

    std::size_t size() const { return a.size(); }
    std::size_t operator[](std::size_t i) const { return a[i]; }
};

inline QuotaVector make_quota(std::vector<std::size_t> a, std::size_t target) {
    if (a.empty())
        throw InvalidInput("quota vector is empty");
    std::size_t sum = 0;
    for (auto v : a) {
        if (v == 0)
            throw InvalidInput("quota entries must be positive");
        sum += v;
    }
    if (sum != target)
        throw InvalidInput("quota entries sum to " + std::to_string(sum) + ", expected " +
                           std::to_string(target));
    return QuotaVector{std::move(a), target};
}

inline QuotaVector make_quota(std::vector<std::size_t> a) {
    std::size_t sum = std::accumulate(a.begin(), a.end(), std::size_t{0});
    return make_quota(std::move(a), sum);
}

/// Every composition of total into parts positive integers, lexicographic.
inline std::vector<QuotaVector> compositions(std::size_t total, std::size_t parts) {
    std::vector<QuotaVector> out;
    if (parts == 0 || parts > total)
        return out;
    std::vector<std::size_t> a(parts);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
        if (pos + 1 == parts) {
            a[pos] = left;
            out.push_back(QuotaVector{a, total});
            return;
        }
        for (std::size_t v = 1; v + (parts - pos - 1) <= left; ++v) {
            a[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    rec(rec, 0, total);
    return out;
}

/// Bipartite graph between V = [n] and W = [m].
class BipartiteGraph {
public:
    BipartiteGraph(std::size_t n, std::size_t m) : n_(n), m_(m), adj_(n, std::vector<bool>(m, false)) {}

    BipartiteGraph(std::size_t n, std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
        : BipartiteGraph(n, m) {
        for (auto [i, j] : edges)
            add_edge(i, j);
    }

    void add_edge(std::size_t i, std::size_t j) {
        if (i >= n_ || j >= m_)
            throw IndexOutOfRange("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
        if (adj_[i][j])
            throw InvalidInput("duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
        adj_[i][j] = true;
    }

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    bool has_edge(std::size_t i, std::size_t j) const { return adj_[i][j]; }

private:
    std::size_t n_, m_;
    std::vector<std::vector<bool>> adj_;
};

/// sigma[j] is the V-vertex serving W-vertex j.
struct Assignment {
    std::vector<std::size_t> sigma;

    std::vector<std::size_t> counts(std::size_t n) const {
        std::vector<std::size_t> c(n, 0);
        for (auto i : sigma)
            ++c[i];
        return c;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Witness that no assignment exists: |N(subset)| < sum of quotas over subset.
struct Infeasible {
    std::vector<std::size_t> subset;
    std::size_t neighborhood = 0;
    std::size_t demand = 0;
};

inline bool is_valid_assignment(const BipartiteGraph& g, const QuotaVector& a, const Assignment& s) {
    if (s.sigma.size() != g.m())
        return false;
    for (std::size_t j = 0; j < s.sigma.size(); ++j)
        if (s.sigma[j] >= g.n() || !g.has_edge(s.sigma[j], j))
            return false;
    return s.counts(g.n()) == a.a;
}

inline std::size_t neighborhood_size(const BipartiteGraph& g, const std::vector<std::size_t>& subset) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < g.m(); ++j)
        for (auto i : subset)
            if (g.has_edge(i, j)) {
                ++count;
                break;
            }
    return count;
}

namespace detail {

struct FlowEdge {
    std::size_t to;
    int cap;
    std::size_t rev;
};

class FlowNetwork {
public:
    explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

    void add(std::size_t from, std::size_t to, int cap) {
        adj_[from].push_back({to, cap, adj_[to].size()});
        adj_[to].push_back({from, 0, adj_[from].size() - 1});
    }

    // Edmonds-Karp; BFS scans adjacency in insertion order so the result is
    // deterministic.
    int max_flow(std::size_t s, std::size_t t) {
        int total = 0;
        std::vector<std::pair<std::size_t, std::size_t>> parent(adj_.size());
        while (true) {
            std::vector<bool> seen(adj_.size(), false);
            std::deque<std::size_t> queue{s};
            seen[s] = true;
            while (!queue.empty() && !seen[t]) {
                auto u = queue.front();
                queue.pop_front();
                for (std::size_t e = 0; e < adj_[u].size(); ++e) {
                    const auto& edge = adj_[u][e];
                    if (edge.cap > 0 && !seen[edge.to]) {
                        seen[edge.to] = true;
                        parent[edge.to] = {u, e};
                        queue.push_back(edge.to);
                    }
                }
            }
            if (!seen[t])
                return total;
            int push = std::numeric_limits<int>::max();
            for (auto v = t; v != s; v = parent[v].first)
                push = std::min(push, adj_[parent[v].first][parent[v].second].cap);
            for (auto v = t; v != s; v = parent[v].first) {
                auto& edge = adj_[parent[v].first][parent[v].second];
                edge.cap -= push;
                adj_[edge.to][edge.rev].cap += push;
            }
            total += push;
        }
    }

    const std::vector<FlowEdge>& out(std::size_t u) const { return adj_[u]; }

private:
    std::vector<std::vector<FlowEdge>> adj_;
};

} // namespace detail

/// Finds sigma: W -> V along edges with |sigma^{-1}(i)| = a_i by integral max
/// flow source -> v_i (cap a_i) -> w_j (cap 1) -> sink (cap 1). On failure
/// the residual reachable part of V is returned as a Hall violator.
inline std::variant<Assignment, Infeasible> quota_matching(const BipartiteGraph& g, const QuotaVector& a) {
    const std::size_t n = g.n(), m = g.m();
    if (a.size() != n)
        throw InvalidInput("quota vector has " + std::to_string(a.size()) + " entries, graph has " +
                           std::to_string(n) + " left vertices");
    if (a.target != m)
        throw InvalidInput("quota target " + std::to_string(a.target) + " differs from |W| = " + std::to_string(m));

    const std::size_t src = 0, sink = n + m + 1;
    auto v_node = [](std::size_t i) { return 1 + i; };
    auto w_node = [n](std::size_t j) { return 1 + n + j; };

    detail::FlowNetwork net(n + m + 2);
    for (std::size_t i = 0; i < n; ++i)
        net.add(src, v_node(i), static_cast<int>(a[i]));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (g.has_edge(i, j))
                net.add(v_node(i), w_node(j), 1);
    for (std::size_t j = 0; j < m; ++j)
        net.add(w_node(j), sink, 1);

    int flow = net.max_flow(src, sink);

    if (static_cast<std::size_t>(flow) == m) {
        Assignment s;
        s.sigma.assign(m, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& e : net.out(v_node(i)))
                if (e.to >= w_node(0) && e.to < w_node(0) + m && e.cap == 0)
                    s.sigma[e.to - w_node(0)] = i;
        return s;
    }

    // Reachability with V->W edges treated as uncapacitated: enter v through
    // an unsaturated source edge or back from a w it sends flow to.
    std::vector<bool> reach_v(n, false), reach_w(m, false);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = net.out(src)[i];
        if (e.cap > 0) {
            reach_v[i] = true;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        auto i = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < m; ++j) {
            if (!g.has_edge(i, j) || reach_w[j])
                continue;
            reach_w[j] = true;
            for (const auto& e : net.out(w_node(j)))
                if (e.to >= v_node(0) && e.to < v_node(0) + n && e.cap > 0) {
                    auto k = e.to - v_node(0);
                    if (!reach_v[k]) {
                        reach_v[k] = true;
                        queue.push_back(k);
                    }
                }
        }
    }
    Infeasible bad;
    for (std::size_t i = 0; i < n; ++i)
        if (reach_v[i]) {
            bad.subset.push_back(i);
            bad.demand += a[i];
        }
    bad.neighborhood = neighborhood_size(g, bad.subset);
    return bad;
}

/// Exhaustive quota-Hall test over every nonempty subset of V.
inline bool check_hall_quota(const BipartiteGraph& g, const QuotaVector& a) {
    const std::size_t n = g.n();
    if (n > 20)
        throw TooLarge("quota-Hall check is exhaustive; n = " + std::to_string(n) + " exceeds 20");
    if (a.size() != n)
        throw InvalidInput("quota vector size differs from |V|");
    std::vector<std::vector<std::uint64_t>> nbr(n, std::vector<std::uint64_t>((g.m() + 63) / 64, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < g.m(); ++j)
            if (g.has_edge(i, j))
                nbr[i][j / 64] |= std::uint64_t{1} << (j % 64);
    std::vector<std::uint64_t> acc(nbr.empty() ? 0 : nbr[0].size());
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::fill(acc.begin(), acc.end(), 0);
        std::size_t demand = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) {
                demand += a[i];
                for (std::size_t w = 0; w < acc.size(); ++w)
                    acc[w] |= nbr[i][w];
            }
        std::size_t covered = 0;
        for (auto word : acc)
            covered += static_cast<std::size_t>(__builtin_popcountll(word));
        if (covered < demand)
            return false;
    }
    return true;
}

/// Sub-hypergraph of the complete r-partite r-uniform hypergraph H(n, r):
/// an edge picks one vertex from each of the r classes [n].
struct Hypergraph {
    std::size_t r = 0;
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> edges;
    std::optional<std::vector<double>> weights;
};

inline Hypergraph complete_hypergraph(std::size_t n, std::size_t r) {
    Hypergraph h{r, n, {}, std::nullopt};
    std::size_t total = 1;
    for (std::size_t k = 0; k < r; ++k)
        total *= n;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::vector<std::size_t> e(r);
        auto rest = flat;
        for (std::size_t k = r; k-- > 0;) {
            e[k] = rest % n;
            rest /= n;
        }
        h.edges.push_back(std::move(e));
    }
    return h;
}

/// Indices into Hypergraph::edges of pairwise disjoint edges.
struct HMatching {
    std::vector<std::size_t> edges;
    std::size_t size() const { return edges.size(); }
};

inline bool edges_conflict(const std::vector<std::size_t>& e, const std::vector<std::size_t>& f) {
    for (std::size_t k = 0; k < e.size(); ++k)
        if (e[k] == f[k])
            return true;
    return false;
}

inline bool is_matching(const Hypergraph& h, const HMatching& m) {
    for (std::size_t p = 0; p < m.edges.size(); ++p) {
        if (m.edges[p] >= h.edges.size())
            return false;
        for (std::size_t q = p + 1; q < m.edges.size(); ++q)
            if (m.edges[p] == m.edges[q] || edges_conflict(h.edges[m.edges[p]], h.edges[m.edges[q]]))
                return false;
    }
    return true;
}

/// Exact maximum-cardinality matching by branch and bound. Edges are tried
/// heaviest first (index order when unweighted); a branch is cut when the
/// free vertices of its scarcest class cannot beat the incumbent.
inline HMatching max_hypergraph_matching(const Hypergraph& h) {
    if (h.edges.size() > 100000)
        throw TooLarge("hypergraph has " + std::to_string(h.edges.size()) + " edges; limit is 100000");
    if (h.r * h.n > 64)
        throw TooLarge("r*n = " + std::to_string(h.r * h.n) + " exceeds 64 vertex slots");
    for (const auto& e : h.edges) {
        if (e.size() != h.r)
            throw InvalidInput("hypergraph edge has wrong arity");
        for (auto v : e)
            if (v >= h.n)
                throw IndexOutOfRange("hypergraph vertex out of range");
    }

    std::vector<std::size_t> order(h.edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (h.weights) {
        const auto& w = *h.weights;
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return w[x] > w[y]; });
    }
    std::vector<std::uint64_t> masks(h.edges.size(), 0);
    for (std::size_t e = 0; e < h.edges.size(); ++e)
        for (std::size_t k = 0; k < h.r; ++k)
            masks[e] |= std::uint64_t{1} << (k * h.n + h.edges[e][k]);

    const std::size_t cap = h.r == 0 ? 0 : h.n;
    std::vector<std::size_t> current, best;
    auto free_bound = [&](std::uint64_t used) {
        std::size_t b = cap;
        for (std::size_t k = 0; k < h.r; ++k) {
            std::size_t free = 0;
            for (std::size_t v = 0; v < h.n; ++v)
                if (!(used >> (k * h.n + v) & 1))
                    ++free;
            b = std::min(b, free);
        }
        return b;
    };
    auto dfs = [&](auto&& self, std::size_t pos, std::uint64_t used) -> void {
        if (current.size() > best.size())
            best = current;
        if (best.size() == cap)
            return;
        if (pos == order.size())
            return;
        std::size_t bound = current.size() + std::min(order.size() - pos, free_bound(used));
        if (bound <= best.size())
            return;
        auto e = order[pos];
        if (!(masks[e] & used)) {
            current.push_back(e);
            self(self, pos + 1, used | masks[e]);
            current.pop_back();
        }
        self(self, pos + 1, used);
    };
    dfs(dfs, 0, 0);
    HMatching m;
    m.edges = best;
    std::sort(m.edges.begin(), m.edges.end());
    return m;
}

/// Every one of the r*n vertex slots carries incident weight 1/n and the
/// total weight is 1, both within 1e-9.
inline bool verify_fractional_matching(const Hypergraph& h, std::size_t n) {
    if (!h.weights)
        throw MissingWeights();
    const auto& w = *h.weights;
    if (w.size() != h.edges.size())
        throw InvalidInput("weight count differs from edge count");
    if (n == 0)
        return false;
    std::vector<double> incident(h.r * n, 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        if (w[e] < 0.0 || !std::isfinite(w[e]))
            throw InvalidInput("hypergraph weights must be finite and nonnegative");
        total += w[e];
        for (std::size_t k = 0; k < h.r; ++k) {
            if (h.edges[e][k] >= n)
                return false;
            incident[k * n + h.edges[e][k]] += w[e];
        }
    }
    const double target = 1.0 / static_cast<double>(n);
    for (double v : incident)
        if (std::abs(v - target) > 1e-9)
            return false;
    return std::abs(total - 1.0) <= 1e-9;
}

/// ceil(n / (r - 1)), the size guaranteed by a perfect fractional matching.
inline std::size_t fractional_matching_bound(std::size_t n, std::size_t r) {
    if (r < 2)
        throw InvalidInput("bound needs r >= 2");
    return (n + r - 2) / (r - 1);
}

} // namespace kkmcut
