#include "sisdmdp/structure.hpp"

#include "sisdmdp/error.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace sisdmdp {

namespace {

// Witness lists can grow quadratically on adversarial input; a bounded sample is enough.
constexpr std::size_t kMaxCycleWitnesses = 256;

bool intra_non_root_arc(const PartitionLayout& layout, std::size_t s, std::size_t t) {
    return t != s && layout.partition_of(t) == layout.partition_of(s) && !layout.is_root(t);
}

void find_intra_cycles(const SparseChain& chain, const PartitionLayout& layout, std::size_t r,
                       std::vector<std::vector<ArcRef>>& out) {
    const std::size_t lo = layout.begin(r), hi = layout.end(r);
    std::vector<std::uint8_t> color(hi - lo, 0);
    struct Frame {
        std::size_t state;
        std::size_t next_arc;
    };
    std::vector<Frame> stack;
    for (std::size_t start = lo + 1; start < hi; ++start) {
        if (color[start - lo] != 0) continue;
        stack.push_back({start, 0});
        color[start - lo] = 1;
        while (!stack.empty()) {
            Frame& f = stack.back();
            auto row = chain.row(f.state);
            if (f.next_arc == row.size()) {
                color[f.state - lo] = 2;
                stack.pop_back();
                continue;
            }
            const std::size_t t = row[f.next_arc++].target;
            if (!intra_non_root_arc(layout, f.state, t)) continue;
            if (color[t - lo] == 0) {
                color[t - lo] = 1;
                stack.push_back({t, 0});
            } else if (color[t - lo] == 1 && out.size() < kMaxCycleWitnesses) {
                std::vector<ArcRef> cycle;
                auto it = std::find_if(stack.begin(), stack.end(),
                                       [t](const Frame& fr) { return fr.state == t; });
                for (; std::next(it) != stack.end(); ++it)
                    cycle.push_back({static_cast<state_t>(it->state),
                                     static_cast<state_t>(std::next(it)->state)});
                cycle.push_back({static_cast<state_t>(stack.back().state), static_cast<state_t>(t)});
                out.push_back(std::move(cycle));
            }
        }
    }
}

std::vector<std::uint8_t> reach(std::size_t n, std::size_t start,
                                const std::function<void(std::size_t, const std::function<void(std::size_t)>&)>& next) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::size_t> queue{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        next(queue[head], [&](std::size_t t) {
            if (!seen[t]) {
                seen[t] = 1;
                queue.push_back(t);
            }
        });
    }
    return seen;
}

} // namespace

std::string StructureReport::summary() const {
    std::ostringstream os;
    os << "stochastic: " << (stochastic_ok ? "ok" : "FAIL") << " (worst deficit " << worst_row_deficit
       << ")\n"
       << "single-input: " << (single_input_ok() ? "ok" : "FAIL") << " ("
       << single_input_violations.size() << " violations)\n"
       << "single-cycle: " << (single_cycle_ok() ? "ok" : "FAIL") << " ("
       << single_cycle_violations.size() << " cycles)\n"
       << "irreducible: " << (irreducible ? "yes" : "NO") << "\n"
       << "aperiodic: " << (aperiodic ? "yes" : "no (advisory)") << "\n"
       << "canonical order: " << (canonical_order_ok ? "yes" : "no") << "\n";
    return os.str();
}

StructureReport validate_structure(const SparseChain& chain, const PartitionLayout& layout) {
    if (chain.n_states() != layout.n_states())
        throw ValidationError("chain and layout sizes differ");
    StructureReport rep;
    rep.worst_row_deficit = chain.max_row_deficit();
    rep.stochastic_ok = rep.worst_row_deficit <= kStochasticTolerance;

    for (std::size_t s = 0; s < chain.n_states(); ++s) {
        const std::size_t ps = layout.partition_of(s);
        for (const Arc& a : chain.row(s)) {
            const std::size_t t = a.target;
            const std::size_t pt = layout.partition_of(t);
            if (pt != ps) {
                if (!layout.is_root(t))
                    rep.single_input_violations.push_back({static_cast<state_t>(s), a.target});
            } else if (!layout.is_root(t) && t < s) {
                rep.canonical_order_violations.push_back({static_cast<state_t>(s), a.target});
            }
        }
    }
    rep.canonical_order_ok = rep.canonical_order_violations.empty();

    for (std::size_t r = 0; r < layout.n_partitions(); ++r)
        find_intra_cycles(chain, layout, r, rep.single_cycle_violations);

    const ErgodicityReport erg = validate_ergodic(chain);
    rep.irreducible = erg.irreducible;
    rep.aperiodic = erg.aperiodic;
    return rep;
}

ErgodicityReport validate_ergodic(const SparseChain& chain) {
    const std::size_t n = chain.n_states();
    ErgodicityReport rep;
    if (n == 0) return rep;

    // transpose adjacency
    std::vector<std::size_t> in_ptr(n + 1, 0);
    for (const Arc& a : chain.arcs()) ++in_ptr[a.target + 1];
    std::partial_sum(in_ptr.begin(), in_ptr.end(), in_ptr.begin());
    std::vector<state_t> in_src(chain.n_arcs());
    {
        std::vector<std::size_t> fill(in_ptr.begin(), in_ptr.end() - 1);
        for (std::size_t s = 0; s < n; ++s)
            for (const Arc& a : chain.row(s)) in_src[fill[a.target]++] = static_cast<state_t>(s);
    }

    auto fwd = reach(n, 0, [&](std::size_t s, const std::function<void(std::size_t)>& visit) {
        for (const Arc& a : chain.row(s)) visit(a.target);
    });
    auto bwd = reach(n, 0, [&](std::size_t s, const std::function<void(std::size_t)>& visit) {
        for (std::size_t k = in_ptr[s]; k < in_ptr[s + 1]; ++k) visit(in_src[k]);
    });

    std::vector<std::uint8_t> in_class(n);
    bool all = true;
    for (std::size_t s = 0; s < n; ++s) {
        in_class[s] = fwd[s] && bwd[s];
        all = all && in_class[s];
    }
    rep.irreducible = all;

    // period of the class of state 0: gcd of level[u] + 1 - level[v] over class arcs
    std::vector<std::int64_t> level(n, -1);
    std::vector<std::size_t> queue{0};
    level[0] = 0;
    std::int64_t g = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t u = queue[head];
        for (const Arc& a : chain.row(u)) {
            const std::size_t v = a.target;
            if (!in_class[v]) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
            }
        }
    }
    rep.period = static_cast<std::size_t>(g);
    rep.aperiodic = g == 1;
    return rep;
}

ReleaseClassification classify_release_states(const SparseChain& chain,
                                              const PartitionLayout& layout) {
    if (chain.n_states() != layout.n_states())
        throw ValidationError("chain and layout sizes differ");
    ReleaseClassification out;
    out.release.resize(layout.n_partitions());
    out.non_release.resize(layout.n_partitions());
    for (std::size_t r = 0; r < layout.n_partitions(); ++r) {
        for (std::size_t s = layout.begin(r); s < layout.end(r); ++s) {
            bool intra = false, to_root = false, any = false;
            for (const Arc& a : chain.row(s)) {
                if (a.target == s) continue;
                any = true;
                if (layout.is_root(a.target))
                    to_root = true;
                else if (layout.partition_of(a.target) == r)
                    intra = true;
            }
            if (!any)
                throw ValidationError("state " + std::to_string(s) +
                                      " has no outgoing arcs besides a self-loop");
            (!intra && to_root ? out.release : out.non_release)[r].push_back(static_cast<state_t>(s));
        }
    }
    return out;
}

bool Reordering::is_identity() const {
    for (std::size_t i = 0; i < permutation.size(); ++i)
        if (permutation[i] != i) return false;
    return true;
}

SparseChain permute_chain(const SparseChain& chain, const std::vector<state_t>& permutation) {
    const std::size_t n = chain.n_states();
    if (permutation.size() != n) throw ValidationError("permutation size mismatch");
    std::vector<state_t> inverse(n);
    for (std::size_t i = 0; i < n; ++i) inverse[permutation[i]] = static_cast<state_t>(i);
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<Arc> arcs;
    arcs.reserve(chain.n_arcs());
    std::vector<double> rewards(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Arc& a : chain.row(permutation[i])) arcs.push_back({inverse[a.target], a.prob});
        row_ptr[i + 1] = arcs.size();
        rewards[i] = chain.reward(permutation[i]);
    }
    return SparseChain::from_csr(std::move(row_ptr), std::move(arcs), std::move(rewards), false);
}

std::vector<double> unpermute(const std::vector<double>& values, const std::vector<state_t>& permutation) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[permutation[i]] = values[i];
    return out;
}

Reordering canonical_reorder(const SparseChain& chain, const PartitionLayout& layout) {
    if (chain.n_states() != layout.n_states())
        throw ValidationError("chain and layout sizes differ");
    const std::size_t n = chain.n_states();
    std::vector<state_t> perm;
    perm.reserve(n);
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t s = 0; s < n; ++s)
        if (!layout.is_root(s))
            for (const Arc& a : chain.row(s))
                if (intra_non_root_arc(layout, s, a.target)) ++indegree[a.target];

    for (std::size_t r = 0; r < layout.n_partitions(); ++r) {
        perm.push_back(static_cast<state_t>(layout.root(r)));
        std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
        for (std::size_t s = layout.begin(r) + 1; s < layout.end(r); ++s)
            if (indegree[s] == 0) ready.push(s);
        std::size_t placed = 0;
        while (!ready.empty()) {
            const std::size_t s = ready.top();
            ready.pop();
            perm.push_back(static_cast<state_t>(s));
            ++placed;
            for (const Arc& a : chain.row(s))
                if (intra_non_root_arc(layout, s, a.target) && --indegree[a.target] == 0)
                    ready.push(a.target);
        }
        if (placed + 1 != layout.size(r))
            throw ValidationError("partition " + std::to_string(r) +
                                  " has a cycle that avoids its root; no canonical order exists");
    }
    return Reordering{perm, permute_chain(chain, perm), layout};
}

} // namespace sisdmdp
