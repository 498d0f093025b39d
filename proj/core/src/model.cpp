#include "sisdmdp/model.hpp"

#include "sisdmdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sisdmdp {

namespace {

std::vector<std::size_t> row_pointers(const std::vector<std::vector<Arc>>& rows,
                                      std::vector<Arc>& arcs) {
    std::vector<std::size_t> row_ptr;
    row_ptr.reserve(rows.size() + 1);
    row_ptr.push_back(0);
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    arcs.reserve(total);
    for (const auto& r : rows) {
        arcs.insert(arcs.end(), r.begin(), r.end());
        row_ptr.push_back(arcs.size());
    }
    return row_ptr;
}

} // namespace

SparseChain::SparseChain(const std::vector<std::vector<Arc>>& rows, std::vector<double> rewards) {
    if (rows.size() != rewards.size())
        throw ValidationError("row count and reward count differ");
    row_ptr_ = row_pointers(rows, arcs_);
    rewards_ = std::move(rewards);
    finalize(true);
}

SparseChain SparseChain::unchecked(const std::vector<std::vector<Arc>>& rows,
                                   std::vector<double> rewards) {
    if (rows.size() != rewards.size())
        throw ValidationError("row count and reward count differ");
    SparseChain c;
    c.row_ptr_ = row_pointers(rows, c.arcs_);
    c.rewards_ = std::move(rewards);
    c.finalize(false);
    return c;
}

SparseChain SparseChain::from_csr(std::vector<std::size_t> row_ptr, std::vector<Arc> arcs,
                                  std::vector<double> rewards, bool require_stochastic) {
    if (row_ptr.size() != rewards.size() + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != arcs.size())
        throw ValidationError("malformed CSR buffers");
    SparseChain c;
    c.row_ptr_ = std::move(row_ptr);
    c.arcs_ = std::move(arcs);
    c.rewards_ = std::move(rewards);
    c.finalize(require_stochastic);
    return c;
}

void SparseChain::finalize(bool require_stochastic) {
    const std::size_t n = rewards_.size();
    for (std::size_t s = 0; s < n; ++s) {
        if (row_ptr_[s + 1] < row_ptr_[s]) throw ValidationError("malformed CSR buffers");
        auto first = arcs_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[s]);
        auto last = arcs_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[s + 1]);
        std::sort(first, last, [](const Arc& a, const Arc& b) { return a.target < b.target; });
        for (auto it = first; it != last; ++it) {
            if (it->target >= n)
                throw ValidationError("state " + std::to_string(s) + " has arc to out-of-range target " +
                                      std::to_string(it->target));
            if (!(it->prob > 0.0) || !std::isfinite(it->prob))
                throw ValidationError("state " + std::to_string(s) +
                                      " has a non-positive or non-finite arc probability");
            if (it != first && std::prev(it)->target == it->target)
                throw ValidationError("state " + std::to_string(s) + " has duplicate target " +
                                      std::to_string(it->target));
        }
        if (require_stochastic && std::abs(row_sum(s) - 1.0) > kStochasticTolerance)
            throw ValidationError("row " + std::to_string(s) + " does not sum to 1");
    }
}

double SparseChain::prob(std::size_t s, std::size_t t) const {
    auto r = row(s);
    auto it = std::lower_bound(r.begin(), r.end(), t,
                               [](const Arc& a, std::size_t v) { return a.target < v; });
    return (it != r.end() && it->target == t) ? it->prob : 0.0;
}

double SparseChain::row_sum(std::size_t s) const {
    double sum = 0.0;
    for (const Arc& a : row(s)) sum += a.prob;
    return sum;
}

double SparseChain::max_row_deficit() const {
    double worst = 0.0;
    for (std::size_t s = 0; s < n_states(); ++s) worst = std::max(worst, std::abs(row_sum(s) - 1.0));
    return worst;
}

SparseChain SparseChain::scaled(double factor) const {
    SparseChain c = *this;
    for (Arc& a : c.arcs_) a.prob *= factor;
    return c;
}

void SparseChain::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t s = 0; s < n_states(); ++s) {
        double acc = 0.0;
        for (const Arc& a : row(s)) acc += a.prob * x[a.target];
        y[s] = acc;
    }
}

PartitionLayout::PartitionLayout(std::vector<std::size_t> boundaries)
    : boundaries_(std::move(boundaries)) {
    if (boundaries_.size() < 2) throw ValidationError("layout needs at least one partition");
    if (boundaries_.front() != 0) throw ValidationError("layout must start at state 0");
    for (std::size_t r = 0; r + 1 < boundaries_.size(); ++r)
        if (boundaries_[r + 1] <= boundaries_[r])
            throw ValidationError("partition " + std::to_string(r) + " is empty or out of order");
    owner_.resize(boundaries_.back());
    for (std::size_t r = 0; r + 1 < boundaries_.size(); ++r)
        std::fill(owner_.begin() + static_cast<std::ptrdiff_t>(boundaries_[r]),
                  owner_.begin() + static_cast<std::ptrdiff_t>(boundaries_[r + 1]),
                  static_cast<std::uint32_t>(r));
}

PartitionLayout PartitionLayout::uniform(std::size_t n_states, std::size_t n_partitions) {
    if (n_partitions == 0 || n_states % n_partitions != 0)
        throw ValidationError("number of states must be a positive multiple of the partition count");
    std::vector<std::size_t> b(n_partitions + 1);
    const std::size_t width = n_states / n_partitions;
    for (std::size_t r = 0; r <= n_partitions; ++r) b[r] = r * width;
    return PartitionLayout(std::move(b));
}

MdpModel::MdpModel(std::vector<SparseChain> actions, PartitionLayout layout)
    : actions_(std::move(actions)), layout_(std::move(layout)) {
    if (actions_.empty()) throw ValidationError("model needs at least one action");
    for (std::size_t a = 0; a < actions_.size(); ++a) {
        if (actions_[a].n_states() != layout_.n_states())
            throw ValidationError("action " + std::to_string(a) + " does not match the layout size");
        if (actions_[a].max_row_deficit() > kStochasticTolerance)
            throw ValidationError("action " + std::to_string(a) + " is not row-stochastic");
    }
}

SparseChain induce_chain(const MdpModel& model, const Policy& policy) {
    const std::size_t n = model.n_states();
    if (policy.size() != n)
        throw ValidationError("policy length " + std::to_string(policy.size()) +
                              " does not match " + std::to_string(n) + " states");
    std::vector<std::size_t> row_ptr(n + 1, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (policy[s] >= model.n_actions())
            throw ValidationError("invalid action " + std::to_string(policy[s]) + " at state " +
                                  std::to_string(s));
        row_ptr[s + 1] = row_ptr[s] + model.transitions(policy[s]).row(s).size();
    }
    std::vector<Arc> arcs;
    arcs.reserve(row_ptr[n]);
    std::vector<double> rewards(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& chain = model.transitions(policy[s]);
        auto r = chain.row(s);
        arcs.insert(arcs.end(), r.begin(), r.end());
        rewards[s] = chain.reward(s);
    }
    return SparseChain::from_csr(std::move(row_ptr), std::move(arcs), std::move(rewards), false);
}

} // namespace sisdmdp
