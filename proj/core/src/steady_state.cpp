#include "sisdmdp/steady_state.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/parallel.hpp"

#include <cmath>
#include <string>

namespace sisdmdp {

namespace {

// Below this many states the thread start-up cost outweighs the per-partition work.
constexpr std::size_t kParallelThreshold = 8192;

} // namespace

std::vector<double> robb_steady_state(const IntraMatrix& a, OpCounter* ops) {
    const std::size_t n = a.n_states();
    if (n == 0) throw SolverError("robb_steady_state: empty matrix");
    std::uint64_t count = 0;
    std::vector<double> alpha(n, 0.0);
    alpha[0] = 1.0;
    for (std::size_t s = 0; s < n; ++s) {
        if (s > 0) {
            const double d = 1.0 - a.self_loop(s);
            if (d <= 1e-12)
                throw SolverError("robb_steady_state: state " + std::to_string(s) +
                                  " is (nearly) absorbing");
            alpha[s] /= d;
            count += 2;
        }
        const double w = alpha[s];
        for (const Arc& arc : a.row(s)) {
            const std::size_t t = arc.target;
            if (t == 0 || t == s) continue;
            if (t < s)
                throw SolverError("robb_steady_state: arc " + std::to_string(s) + " -> " +
                                  std::to_string(t) + " breaks canonical order");
            alpha[t] += w * arc.prob;
            count += 2;
        }
    }
    double total = 0.0;
    for (double v : alpha) total += v;
    const double root = 1.0 / total;
    for (double& v : alpha) v *= root;
    count += 2 * n + 1;
    if (ops) ops->add(count);
    return alpha;
}

IntraMatrix build_intra_matrix(const SparseChain& chain, const PartitionLayout& layout, std::size_t r) {
    const std::size_t lo = layout.begin(r), hi = layout.end(r), n = hi - lo;
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < n; ++i) {
        double kept = 0.0;
        const std::size_t first = arcs.size();
        arcs.push_back({0, 0.0});
        for (const Arc& a : chain.row(lo + i)) {
            if (a.target > lo && a.target < hi) {
                arcs.push_back({static_cast<state_t>(a.target - lo), a.prob});
                kept += a.prob;
            }
        }
        const double redirected = 1.0 - kept;
        if (redirected < -kStochasticTolerance)
            throw ValidationError("state " + std::to_string(lo + i) +
                                  " has negative redirected mass (row is not stochastic)");
        if (redirected > 0.0)
            arcs[first].prob = redirected;
        else
            arcs.erase(arcs.begin() + static_cast<std::ptrdiff_t>(first));
        row_ptr[i + 1] = arcs.size();
    }
    return SparseChain::from_csr(std::move(row_ptr), std::move(arcs), std::vector<double>(n, 0.0), false);
}

DenseMatrix build_inter_matrix(const SparseChain& chain, const PartitionLayout& layout,
                               const std::vector<std::vector<double>>& phis) {
    const std::size_t k = layout.n_partitions();
    if (phis.size() != k) throw SolverError("build_inter_matrix: need one local vector per partition");
    DenseMatrix b(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t lo = layout.begin(r);
        if (phis[r].size() != layout.size(r))
            throw SolverError("build_inter_matrix: local vector size mismatch in partition " + std::to_string(r));
        for (std::size_t s = lo; s < layout.end(r); ++s) {
            const double w = phis[r][s - lo];
            for (const Arc& a : chain.row(s)) {
                const std::size_t q = layout.partition_of(a.target);
                if (q != r && layout.is_root(a.target)) b(r, q) += w * a.prob;
            }
        }
        double off = 0.0;
        for (std::size_t q = 0; q < k; ++q)
            if (q != r) off += b(r, q);
        if (off > 1.0 + kStochasticTolerance)
            throw SolverError("build_inter_matrix: off-diagonal mass " + std::to_string(off) +
                              " exceeds 1 in row " + std::to_string(r));
        b(r, r) = 1.0 - off;
    }
    return b;
}

DenseMatrix to_dense(const SparseChain& chain) {
    const std::size_t n = chain.n_states();
    DenseMatrix m(n, n);
    for (std::size_t s = 0; s < n; ++s)
        for (const Arc& a : chain.row(s)) m(s, a.target) = a.prob;
    return m;
}

ChiuResult chiu_average_reward(const SparseChain& chain, const PartitionLayout& layout,
                               IntraSolver intra_solver, const Deadline& deadline) {
    if (chain.n_states() != layout.n_states())
        throw ValidationError("chain and layout sizes differ");
    const std::size_t k = layout.n_partitions();
    std::vector<std::vector<double>> phis(k);

    parallel_for(
        k,
        [&](std::size_t r) {
            deadline.check();
            if (layout.size(r) == 1) {
                phis[r] = {1.0};
                return;
            }
            IntraMatrix a = build_intra_matrix(chain, layout, r);
            phis[r] = intra_solver == IntraSolver::robb ? robb_steady_state(a)
                                                        : gth_steady_state(to_dense(a), deadline);
        },
        chain.n_states() >= kParallelThreshold);

    deadline.check();
    ChiuResult out;
    out.psi = gth_steady_state(build_inter_matrix(chain, layout, phis));
    out.pi.resize(chain.n_states());
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t i = 0; i < layout.size(r); ++i) {
            const double v = out.psi[r] * phis[r][i];
            out.pi[layout.begin(r) + i] = v;
            total += v;
        }
    double rho = 0.0;
    for (std::size_t s = 0; s < out.pi.size(); ++s) {
        out.pi[s] /= total;
        rho += out.pi[s] * chain.reward(s);
    }
    out.rho = rho;
    return out;
}

} // namespace sisdmdp
