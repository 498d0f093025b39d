#pragma once

#include "sisdmdp/dense.hpp"
#include "sisdmdp/model.hpp"
#include "sisdmdp/timing.hpp"

#include <vector>

namespace sisdmdp {

/// Local stochastic matrix of one partition in local indices (0 = root).
/// External mass and mass towards the root are folded into column 0.
using IntraMatrix = SparseChain;

/// Steady state of a single-cycle (Rob-B) chain whose cycles all pass
/// through local state 0.
///
/// Requires canonical order: every arc between non-root states goes from a
/// lower to a higher (or equal) index. One forward sweep accumulates the
/// unnormalised weights, so the cost is linear in the number of arcs; `ops`
/// receives the number of floating-point operations performed.
std::vector<double> robb_steady_state(const IntraMatrix& a, OpCounter* ops = nullptr);

IntraMatrix build_intra_matrix(const SparseChain& chain, const PartitionLayout& layout, std::size_t r);

/// K x K chain between superstates, weighting each partition's exit arcs by
/// its local steady state `phis[r]`.
DenseMatrix build_inter_matrix(const SparseChain& chain, const PartitionLayout& layout,
                               const std::vector<std::vector<double>>& phis);

enum class IntraSolver { robb, gth };

struct ChiuResult {
    std::vector<double> pi;  ///< global steady state over N states
    double rho = 0.0;        ///< average reward
    std::vector<double> psi; ///< superstate weights
};

/// Two-level aggregation/disaggregation steady state of a chain with the
/// single-input, single-cycle partition structure: per-partition local steady
/// states, a dense K x K superstate chain solved with GTH, and the product
/// of both. The average reward is the dot product with the chain's rewards.
ChiuResult chiu_average_reward(const SparseChain& chain, const PartitionLayout& layout,
                               IntraSolver intra_solver = IntraSolver::robb,
                               const Deadline& deadline = {});

/// Dense copy of a sparse chain (for the GTH and Gauss-Jordan baselines).
DenseMatrix to_dense(const SparseChain& chain);

} // namespace sisdmdp
