#pragma once

// Fixtures and reference oracles shared by the unit and acceptance tests.
// The oracles deliberately avoid the library's solvers: dense long-double
// elimination, brute-force enumeration and plain graph search.

#include "sisdmdp/model.hpp"
#include "sisdmdp/policy_eval.hpp"
#include "sisdmdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace testing {

using namespace sisdmdp;

struct Triplet {
    std::size_t s, t;
    double p;
};

inline SparseChain make_chain(std::size_t n, const std::vector<Triplet>& arcs, std::vector<double> rewards) {
    std::vector<std::vector<Arc>> rows(n);
    for (const auto& a : arcs) rows[a.s].push_back({static_cast<state_t>(a.t), a.p});
    return SparseChain(rows, std::move(rewards));
}

/// Chain with uniform probabilities over each state's listed successors.
inline SparseChain uniform_chain(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                 std::vector<double> rewards = {}) {
    std::vector<std::vector<std::size_t>> succ(n);
    for (auto [s, t] : edges) succ[s].push_back(t);
    std::vector<std::vector<Arc>> rows(n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t : succ[s]) rows[s].push_back({static_cast<state_t>(t), 1.0 / static_cast<double>(succ[s].size())});
    if (rewards.empty()) rewards.assign(n, 0.0);
    return SparseChain(rows, std::move(rewards));
}

inline MdpModel single_action(SparseChain chain, PartitionLayout layout) {
    std::vector<SparseChain> a;
    a.push_back(std::move(chain));
    return MdpModel(std::move(a), std::move(layout));
}

/// F1 written out from its description, independent of fixture_f1().
inline SparseChain f1_chain() {
    return make_chain(4,
                      {{0, 1, .5}, {0, 2, .5}, {1, 0, .6}, {1, 2, .4}, {2, 3, 1.0}, {3, 0, .7}, {3, 2, .3}},
                      {1, 0, 2, 0});
}
inline PartitionLayout f1_layout() { return PartitionLayout({0, 2, 4}); }

// Fig. 1 topology, listed with the 1-based labels of the drawing.
inline std::vector<std::pair<std::size_t, std::size_t>> fig1b_edges_1based() {
    return {
        // partition {1..4}: arborescence from 1 with returns
        {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}, {3, 10}, {4, 1}, {4, 5}, {1, 5},
        // partition {5..9}
        {5, 6}, {5, 7}, {6, 8}, {6, 9}, {7, 8}, {7, 9}, {8, 5}, {8, 1}, {9, 5}, {9, 10}, {5, 10},
        // partition {10..14}: anti-arborescence towards 10
        {10, 13}, {10, 14}, {13, 11}, {14, 12}, {14, 13}, {11, 10}, {12, 10}, {12, 1}, {11, 5}, {10, 1},
    };
}
inline std::vector<std::pair<std::size_t, std::size_t>> fig1a_red_edges_1based() { return {{4, 3}, {9, 7}, {11, 13}}; }

inline SparseChain fig1_chain(bool with_red_arcs) {
    auto edges = fig1b_edges_1based();
    if (with_red_arcs)
        for (auto e : fig1a_red_edges_1based()) edges.push_back(e);
    for (auto& [s, t] : edges) {
        --s;
        --t;
    }
    return uniform_chain(14, edges);
}
inline PartitionLayout fig1_layout() { return PartitionLayout({0, 4, 9, 14}); }

/// 2-state deterministic cycle, rewards (0, 2), one partition.
inline MdpModel period_two_model() {
    return single_action(make_chain(2, {{0, 1, 1.0}, {1, 0, 1.0}}, {0, 2}), PartitionLayout({0, 2}));
}

// ---------------------------------------------------------------------------
// Dense long-double oracles

using Dense = std::vector<std::vector<long double>>;

inline Dense dense_of(const SparseChain& c) {
    Dense d(c.n_states(), std::vector<long double>(c.n_states(), 0.0L));
    for (std::size_t s = 0; s < c.n_states(); ++s)
        for (const Arc& a : c.row(s)) d[s][a.target] += a.prob;
    return d;
}

/// Gaussian elimination with partial pivoting in long double.
inline std::vector<long double> oracle_solve(Dense a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::fabs(a[i][c]) > std::fabs(a[p][c])) p = i;
        if (std::fabs(a[p][c]) < 1e-300L) throw std::runtime_error("oracle: singular system");
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const long double f = a[i][c] / a[c][c];
            if (f == 0.0L) continue;
            for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
            b[i] -= f * b[c];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= a[i][j] * x[j];
        x[i] = acc / a[i][i];
    }
    return x;
}

/// Stationary distribution from pi (P - I) = 0 with the last balance
/// equation replaced by normalisation.
inline std::vector<double> oracle_steady_state(const SparseChain& c) {
    const std::size_t n = c.n_states();
    const Dense p = dense_of(c);
    Dense a(n, std::vector<long double>(n));
    std::vector<long double> b(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = p[j][i] - (i == j ? 1.0L : 0.0L);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0L;
    b[n - 1] = 1.0L;
    auto x = oracle_solve(std::move(a), std::move(b));
    return {x.begin(), x.end()};
}

struct OracleValues {
    std::vector<double> v;
    double rho = 0.0;
};

/// Average: V(0) = 0 and rho from V = r - rho + P V. Discounted: (I - gamma P) V = r.
inline OracleValues oracle_values(const SparseChain& c, const Criterion& criterion) {
    const std::size_t n = c.n_states();
    const Dense p = dense_of(c);
    Dense a(n, std::vector<long double>(n, 0.0L));
    std::vector<long double> b(n);
    for (std::size_t s = 0; s < n; ++s) b[s] = c.reward(s);
    OracleValues out;
    if (criterion.is_average()) {
        // unknown 0 is rho, unknowns 1.. are V(1..)
        for (std::size_t s = 0; s < n; ++s) {
            a[s][0] = 1.0L;
            for (std::size_t t = 1; t < n; ++t) a[s][t] = (s == t ? 1.0L : 0.0L) - p[s][t];
        }
        auto x = oracle_solve(std::move(a), std::move(b));
        out.rho = static_cast<double>(x[0]);
        out.v.assign(n, 0.0);
        for (std::size_t s = 1; s < n; ++s) out.v[s] = static_cast<double>(x[s]);
    } else {
        const long double g = criterion.gamma();
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = 0; t < n; ++t) a[s][t] = (s == t ? 1.0L : 0.0L) - g * p[s][t];
        auto x = oracle_solve(std::move(a), std::move(b));
        out.v.assign(x.begin(), x.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute force

/// Row-by-row copy of the chosen action's row, the reference for induce_chain.
inline SparseChain oracle_row_picker(const MdpModel& m, const Policy& pi) {
    std::vector<std::vector<Arc>> rows(m.n_states());
    std::vector<double> r(m.n_states());
    for (std::size_t s = 0; s < m.n_states(); ++s) {
        const SparseChain& c = m.transitions(pi[s]);
        rows[s].assign(c.row(s).begin(), c.row(s).end());
        r[s] = c.reward(s);
    }
    return SparseChain(rows, std::move(r));
}

/// Calls fn for every stationary deterministic policy.
inline void for_each_policy(std::size_t n_states, std::size_t n_actions, const std::function<void(const Policy&)>& fn) {
    Policy pi(n_states, 0);
    for (;;) {
        fn(pi);
        std::size_t s = 0;
        while (s < n_states && ++pi[s] == n_actions) pi[s++] = 0;
        if (s == n_states) return;
    }
}

/// Every simple directed cycle (as its vertex list, smallest vertex first)
/// of the graph restricted to `allowed` arcs.
inline std::vector<std::vector<std::size_t>> enumerate_cycles(
    const SparseChain& c, const std::function<bool(std::size_t, std::size_t)>& allowed) {
    const std::size_t n = c.n_states();
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> path;
    std::vector<bool> on_path(n, false);
    std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t u) {
        for (const Arc& a : c.row(u)) {
            const std::size_t v = a.target;
            if (!allowed(u, v) || v < start) continue;
            if (v == start) {
                out.push_back(path);
            } else if (!on_path[v]) {
                on_path[v] = true;
                path.push_back(v);
                dfs(start, v);
                path.pop_back();
                on_path[v] = false;
            }
        }
    };
    for (std::size_t s = 0; s < n; ++s) {
        path = {s};
        on_path.assign(n, false);
        on_path[s] = true;
        dfs(s, s);
    }
    return out;
}

/// Argmax with the incumbent tie rule, written out longhand.
inline action_t oracle_argmax(const std::vector<double>& q, action_t current, double tol) {
    double best = q[0];
    for (double x : q) best = std::max(best, x);
    if (q[current] >= best - tol) return current;
    for (action_t a = 0; a < q.size(); ++a)
        if (q[a] >= best - tol) return a;
    return current;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace testing
