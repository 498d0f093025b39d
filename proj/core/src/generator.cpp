#include "sisdmdp/generator.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sisdmdp {

std::uint64_t Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u > cdf && k < 10000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

void GeneratorConfig::validate() const {
    if (n_states == 0 || n_partitions == 0 || n_actions == 0)
        throw ValidationError("generator: states, partitions and actions must be positive");
    if (n_states % n_partitions != 0)
        throw ValidationError("generator: the number of states must be divisible by the number of partitions");
    if (forward_arc_rate < 0 || cross_arc_rate < 0 || superstate_extra_rate < 0)
        throw ValidationError("generator: arc rates must be non-negative");
    if (backward_to_root_prob < 0 || backward_to_root_prob > 1 || self_loop_prob < 0 || self_loop_prob >= 1)
        throw ValidationError("generator: probabilities out of range");
    if (!(perturb_magnitude >= 0 && perturb_magnitude < 1))
        throw ValidationError("generator: perturbation magnitude must lie in [0, 1)");
    if (!(reward_low <= reward_high)) throw ValidationError("generator: empty reward range");
}

namespace {

SparseChain normalise_rows(std::vector<std::vector<state_t>>& targets, Rng& rng, std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<Arc> arcs;
    for (std::size_t s = 0; s < n; ++s) {
        auto& t = targets[s];
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        const std::size_t first = arcs.size();
        double total = 0.0;
        for (state_t target : t) {
            const double w = rng.uniform(0.05, 1.0);
            arcs.push_back({target, w});
            total += w;
        }
        for (std::size_t k = first; k < arcs.size(); ++k) arcs[k].prob /= total;
        row_ptr[s + 1] = arcs.size();
    }
    return SparseChain::from_csr(std::move(row_ptr), std::move(arcs), std::vector<double>(n, 0.0));
}

SparseChain with_rewards(const SparseChain& c, std::vector<double> rewards) {
    return SparseChain::from_csr({c.row_ptr().begin(), c.row_ptr().end()}, {c.arcs().begin(), c.arcs().end()},
                                 std::move(rewards));
}

} // namespace

MdpModel generate_sisdmdp(const GeneratorConfig& config) {
    config.validate();
    const std::size_t n = config.n_states, k = config.n_partitions;
    PartitionLayout layout = PartitionLayout::uniform(n, k);
    Rng rng(config.seed);
    std::vector<std::vector<state_t>> out(n);
    auto foreign = [&](std::size_t r) {
        std::size_t q = rng.below(k - 1);
        return q >= r ? q + 1 : q;
    };

    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t lo = layout.begin(r), hi = layout.end(r);
        for (std::size_t j = lo + 1; j < hi; ++j) out[lo + rng.below(j - lo)].push_back(static_cast<state_t>(j));
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t first = std::max(s + 1, lo + 1);
            if (first >= hi) continue;
            const std::uint64_t extra = rng.poisson(std::max(config.forward_arc_rate - 1.0, 0.0));
            for (std::uint64_t e = 0; e < extra; ++e)
                out[s].push_back(static_cast<state_t>(first + rng.below(hi - first)));
        }
        for (std::size_t s = lo + 1; s < hi; ++s) {
            const bool forward = std::any_of(out[s].begin(), out[s].end(), [s](state_t t) { return t > s; });
            const bool back = rng.bernoulli(config.backward_to_root_prob);
            if (!forward || back) out[s].push_back(static_cast<state_t>(lo));
        }
        for (std::size_t s = lo; s < hi; ++s)
            if (rng.bernoulli(config.self_loop_prob)) out[s].push_back(static_cast<state_t>(s));
        if (k > 1) {
            const std::uint64_t cross = rng.poisson(config.cross_arc_rate);
            for (std::uint64_t c = 0; c < cross; ++c) {
                const std::size_t src = hi - lo > 1 ? lo + 1 + rng.below(hi - lo - 1) : lo;
                out[src].push_back(static_cast<state_t>(layout.root(foreign(r))));
            }
        }
    }
    if (k > 1) {
        for (std::size_t r = 0; r < k; ++r)
            out[layout.root(r)].push_back(static_cast<state_t>(layout.root((r + 1) % k)));
        for (std::size_t r = 0; r < k; ++r) {
            const std::uint64_t extra = rng.poisson(config.superstate_extra_rate);
            for (std::uint64_t e = 0; e < extra; ++e)
                out[layout.root(r)].push_back(static_cast<state_t>(layout.root(foreign(r))));
        }
    }
    for (std::size_t s = 0; s < n; ++s)
        if (out[s].empty()) out[s].push_back(static_cast<state_t>(layout.root(layout.partition_of(s))));

    const SparseChain base = normalise_rows(out, rng, n);

    std::vector<std::vector<double>> rewards(config.n_actions, std::vector<double>(n));
    for (auto& ra : rewards)
        for (double& x : ra) x = rng.uniform(config.reward_low, config.reward_high);

    std::vector<SparseChain> actions;
    actions.reserve(config.n_actions);
    for (std::size_t a = 0; a < config.n_actions; ++a) {
        const SparseChain p = a == 0 ? base
                                     : perturb_transition_matrix(base, derive_seed(config.seed, a),
                                                                 config.perturb_magnitude);
        actions.push_back(with_rewards(p, std::move(rewards[a])));
    }
    return MdpModel(std::move(actions), std::move(layout));
}

SparseChain perturb_transition_matrix(const SparseChain& base, std::uint64_t seed, double magnitude) {
    if (!(magnitude >= 0.0 && magnitude < 1.0))
        throw ValidationError("perturbation magnitude must lie in [0, 1)");
    if (magnitude == 0.0) return base;
    Rng rng(seed);
    std::vector<Arc> arcs(base.arcs().begin(), base.arcs().end());
    const auto ptr = base.row_ptr();
    for (std::size_t s = 0; s < base.n_states(); ++s) {
        double total = 0.0;
        for (std::size_t k = ptr[s]; k < ptr[s + 1]; ++k) {
            arcs[k].prob *= 1.0 + rng.uniform(-magnitude, magnitude);
            total += arcs[k].prob;
        }
        for (std::size_t k = ptr[s]; k < ptr[s + 1]; ++k) arcs[k].prob /= total;
    }
    return SparseChain::from_csr({ptr.begin(), ptr.end()}, std::move(arcs),
                                 {base.rewards().begin(), base.rewards().end()});
}

InstanceStats instance_stats(const MdpModel& model) {
    const PartitionLayout& layout = model.layout();
    InstanceStats st;
    st.intra_arcs.assign(layout.n_partitions(), 0);
    const SparseChain& p = model.transitions(0);
    for (std::size_t s = 0; s < p.n_states(); ++s)
        for (const Arc& a : p.row(s)) {
            if (layout.partition_of(a.target) == layout.partition_of(s))
                ++st.intra_arcs[layout.partition_of(s)];
            else
                ++st.cross_arcs;
        }
    for (std::size_t m : st.intra_arcs) st.total_intra_arcs += m;
    for (const auto& c : model.actions()) st.arcs_per_action.push_back(c.n_arcs());
    const double n = static_cast<double>(model.n_states());
    st.density = static_cast<double>(p.n_arcs()) / (n * n);
    return st;
}

MdpModel fixture_f1() {
    SparseChain p({{{1, 0.5}, {2, 0.5}}, {{0, 0.6}, {2, 0.4}}, {{3, 1.0}}, {{0, 0.7}, {2, 0.3}}},
                  {1.0, 0.0, 2.0, 0.0});
    return MdpModel({std::move(p)}, PartitionLayout({0, 2, 4}));
}

} // namespace sisdmdp
