#pragma once

#include "sisdmdp/model.hpp"

#include <cstdint>
#include <vector>

namespace sisdmdp {

struct GeneratorConfig {
    std::size_t n_states = 100;
    std::size_t n_partitions = 10;
    std::size_t n_actions = 1;
    std::uint64_t seed = 1;

    double forward_arc_rate = 3.0;       ///< mean intra forward arcs per state
    double backward_to_root_prob = 0.5;  ///< chance of a return arc to the root
    double cross_arc_rate = 2.0;         ///< mean arcs per partition to foreign roots
    double superstate_extra_rate = 1.0;  ///< mean extra root -> foreign root arcs per root
    double self_loop_prob = 0.1;         ///< chance of a self-loop on any state
    double perturb_magnitude = 0.2;      ///< relative weight perturbation for actions >= 1
    double reward_low = 0.0;
    double reward_high = 10.0;

    /// Throws ValidationError on an inconsistent configuration.
    void validate() const;
};

/// Random model in which every action has the single-input, single-cycle
/// partition structure in canonical order and is irreducible.
///
/// Per partition, each non-root state receives one tree arc from a uniformly
/// chosen lower state (so the root reaches everything), extra forward arcs
/// go to higher non-root states, and return arcs lead back to the root
/// (forced when a state has no forward arc). The roots form a directed cycle;
/// further arcs from partitions and roots only land on foreign roots. Row
/// weights are drawn in [0.05, 1) and normalised. Actions >= 1 perturb the
/// base weights on the same support, so every policy keeps the structure.
MdpModel generate_sisdmdp(const GeneratorConfig& config);

/// Multiplies each probability by (1 + u), u uniform in [-magnitude, magnitude],
/// and renormalises each row. The support is unchanged; magnitude 0 returns
/// the input unchanged.
SparseChain perturb_transition_matrix(const SparseChain& base, std::uint64_t seed, double magnitude);

struct InstanceStats {
    std::vector<std::size_t> intra_arcs; ///< m_r per partition (action 0)
    std::size_t total_intra_arcs = 0;
    std::size_t cross_arcs = 0;          ///< arcs whose target lies in another partition (action 0)
    std::vector<std::size_t> arcs_per_action;
    double density = 0.0;                ///< nnz / N^2 of action 0
};

/// An arc is intra iff its target lies in the source's partition (self-loops included).
InstanceStats instance_stats(const MdpModel& model);

/// Four-state, two-partition, single-action hand-checkable instance:
/// partitions {0,1}, {2,3}; arcs 0->1 .5, 0->2 .5, 1->0 .6, 1->2 .4, 2->3 1,
/// 3->0 .7, 3->2 .3; rewards (1, 0, 2, 0).
MdpModel fixture_f1();

} // namespace sisdmdp
