#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sisdmdp {

using state_t = std::uint32_t;
using action_t = std::uint32_t;

/// Row sums of a stochastic matrix must equal 1 within this tolerance.
inline constexpr double kStochasticTolerance = 1e-12;

struct Arc {
    state_t target;
    double prob;

    friend bool operator==(const Arc&, const Arc&) = default;
};

/// Row-compressed transition matrix with one reward per state.
///
/// Rows are stored sorted by target index. Every stored arc has a strictly
/// positive probability; an absent arc is a structural zero. The checked
/// constructor additionally enforces row-stochasticity, while `unchecked`
/// only verifies indices so that validators can inspect defective input.
class SparseChain {
public:
    SparseChain() = default;

    /// Builds a row-stochastic chain. Throws ValidationError on any invariant violation.
    SparseChain(const std::vector<std::vector<Arc>>& rows, std::vector<double> rewards);

    /// Builds from CSR buffers; rows are sorted in place. Checks indices and
    /// positivity, and stochasticity only when `require_stochastic` is set.
    static SparseChain from_csr(std::vector<std::size_t> row_ptr, std::vector<Arc> arcs,
                                std::vector<double> rewards, bool require_stochastic = true);

    /// Same as the row constructor but without the stochasticity check.
    static SparseChain unchecked(const std::vector<std::vector<Arc>>& rows,
                                 std::vector<double> rewards);

    std::size_t n_states() const { return rewards_.size(); }
    std::size_t n_arcs() const { return arcs_.size(); }

    std::span<const Arc> row(std::size_t s) const {
        return {arcs_.data() + row_ptr_[s], row_ptr_[s + 1] - row_ptr_[s]};
    }
    double reward(std::size_t s) const { return rewards_[s]; }
    std::span<const double> rewards() const { return rewards_; }
    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const Arc> arcs() const { return arcs_; }

    /// P(s, t), zero if the arc is absent. O(log deg).
    double prob(std::size_t s, std::size_t t) const;
    double self_loop(std::size_t s) const { return prob(s, s); }
    double row_sum(std::size_t s) const;

    /// max_s |sum_t P(s,t) - 1|
    double max_row_deficit() const;

    /// Copy with every probability multiplied by `factor` (result is substochastic).
    SparseChain scaled(double factor) const;

    /// y = P x
    void multiply(std::span<const double> x, std::span<double> y) const;

    friend bool operator==(const SparseChain&, const SparseChain&) = default;

private:
    void finalize(bool require_stochastic);

    std::vector<std::size_t> row_ptr_{0};
    std::vector<Arc> arcs_;
    std::vector<double> rewards_;
};

/// K contiguous blocks over 0..N-1; the first state of each block is its
/// superstate (root).
class PartitionLayout {
public:
    PartitionLayout() = default;
    explicit PartitionLayout(std::vector<std::size_t> boundaries);

    /// K blocks of equal size N/K.
    static PartitionLayout uniform(std::size_t n_states, std::size_t n_partitions);

    std::size_t n_partitions() const { return boundaries_.empty() ? 0 : boundaries_.size() - 1; }
    std::size_t n_states() const { return boundaries_.empty() ? 0 : boundaries_.back(); }
    std::size_t begin(std::size_t r) const { return boundaries_[r]; }
    std::size_t end(std::size_t r) const { return boundaries_[r + 1]; }
    std::size_t size(std::size_t r) const { return end(r) - begin(r); }
    std::size_t root(std::size_t r) const { return boundaries_[r]; }
    std::size_t partition_of(std::size_t s) const { return owner_[s]; }
    bool is_root(std::size_t s) const { return boundaries_[owner_[s]] == s; }
    const std::vector<std::size_t>& boundaries() const { return boundaries_; }

    friend bool operator==(const PartitionLayout& a, const PartitionLayout& b) {
        return a.boundaries_ == b.boundaries_;
    }

private:
    std::vector<std::size_t> boundaries_;
    std::vector<std::uint32_t> owner_;
};

using Policy = std::vector<action_t>;

/// Per-action transition matrices over a shared partition layout. The
/// rewards of action a's chain hold r(., a).
class MdpModel {
public:
    MdpModel() = default;
    MdpModel(std::vector<SparseChain> actions, PartitionLayout layout);

    std::size_t n_states() const { return layout_.n_states(); }
    std::size_t n_actions() const { return actions_.size(); }
    const SparseChain& transitions(std::size_t a) const { return actions_[a]; }
    const std::vector<SparseChain>& actions() const { return actions_; }
    double reward(std::size_t s, std::size_t a) const { return actions_[a].reward(s); }
    const PartitionLayout& layout() const { return layout_; }

    friend bool operator==(const MdpModel&, const MdpModel&) = default;

private:
    std::vector<SparseChain> actions_;
    PartitionLayout layout_;
};

/// Chain induced by a policy: row s of P^(policy[s]) and reward r(s, policy[s]).
SparseChain induce_chain(const MdpModel& model, const Policy& policy);

} // namespace sisdmdp
