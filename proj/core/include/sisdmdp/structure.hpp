#pragma once

#include "sisdmdp/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sisdmdp {

struct ArcRef {
    state_t source;
    state_t target;
    friend bool operator==(const ArcRef&, const ArcRef&) = default;
};

/// Outcome of the structural checks. Violations are collected, never thrown.
struct StructureReport {
    bool stochastic_ok = true;
    double worst_row_deficit = 0.0;

    /// Arcs entering a partition at a state other than its root.
    std::vector<ArcRef> single_input_violations;
    /// Cycles among the non-root states of a partition (each given as its arc list).
    std::vector<std::vector<ArcRef>> single_cycle_violations;

    bool irreducible = false;
    bool aperiodic = false;

    /// Every intra-partition arc s -> s' with s' not the root has s <= s'.
    bool canonical_order_ok = true;
    std::vector<ArcRef> canonical_order_violations;

    bool single_input_ok() const { return single_input_violations.empty(); }
    bool single_cycle_ok() const { return single_cycle_violations.empty(); }

    /// Stochastic, single-input, single-cycle and irreducible. Aperiodicity
    /// and ordering are reported separately.
    bool structure_ok() const {
        return stochastic_ok && single_input_ok() && single_cycle_ok() && irreducible;
    }

    std::string summary() const;
};

struct ErgodicityReport {
    bool irreducible = false;
    bool aperiodic = false;
    /// Period of the communicating class of state 0.
    std::size_t period = 0;
};

StructureReport validate_structure(const SparseChain& chain, const PartitionLayout& layout);

ErgodicityReport validate_ergodic(const SparseChain& chain);

/// Release states of each partition: no arc to a non-root state of the same
/// partition (self-loops ignored) and at least one arc to some root.
struct ReleaseClassification {
    std::vector<std::vector<state_t>> release;
    std::vector<std::vector<state_t>> non_release;
};

ReleaseClassification classify_release_states(const SparseChain& chain,
                                              const PartitionLayout& layout);

struct Reordering {
    /// permutation[new_index] = old_index
    std::vector<state_t> permutation;
    SparseChain chain;
    PartitionLayout layout;

    bool is_identity() const;
};

/// Relabels the non-root states of every partition in a topological order of
/// the intra-partition non-root subgraph (ties broken by original index), so
/// that the result satisfies canonical_order_ok. Throws ValidationError if
/// that subgraph has a cycle.
Reordering canonical_reorder(const SparseChain& chain, const PartitionLayout& layout);

/// Applies `permutation` (new -> old) to a chain.
SparseChain permute_chain(const SparseChain& chain, const std::vector<state_t>& permutation);

/// Maps a per-state vector computed on the permuted chain back to original labels.
std::vector<double> unpermute(const std::vector<double>& values, const std::vector<state_t>& permutation);

} // namespace sisdmdp
