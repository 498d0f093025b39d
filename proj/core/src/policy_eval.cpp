#include "sisdmdp/policy_eval.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sisdmdp {

namespace {

constexpr std::size_t kParallelThreshold = 8192;
constexpr double kConsistencyTolerance = 1e-8;

} // namespace

Criterion Criterion::discounted(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("discount factor must lie in [0, 1)");
    return Criterion(Kind::discounted, gamma);
}

std::string_view to_string(StopReason r) {
    switch (r) {
    case StopReason::none: return "none";
    case StopReason::policy_fixed: return "policy_fixed";
    case StopReason::span: return "span";
    case StopReason::linf: return "linf";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stagnation: return "stagnation";
    case StopReason::budget: return "budget";
    }
    return "none";
}

StopReason stop_reason_from_string(std::string_view s) {
    for (auto r : {StopReason::none, StopReason::policy_fixed, StopReason::span, StopReason::linf,
                   StopReason::max_iter, StopReason::stagnation, StopReason::budget})
        if (to_string(r) == s) return r;
    throw ParseError("unknown stop reason '" + std::string(s) + "'");
}

bool StagnationMonitor::update(double metric) {
    if (window_ == 0) return false;
    best_.push_back(best_.empty() ? metric : std::min(best_.back(), metric));
    if (best_.size() <= window_) return false;
    return best_[best_.size() - 1 - window_] - best_.back() < threshold_;
}

LocalSystem build_local_system(const SparseChain& chain, const PartitionLayout& layout, std::size_t r,
                               const Criterion& criterion, std::optional<double> rho, OpCounter* ops) {
    if (criterion.is_average() != rho.has_value())
        throw ValidationError("build_local_system: rho must be given exactly for the average criterion");
    const std::size_t lo = layout.begin(r), n = layout.size(r), k = layout.n_partitions();
    const double offset = rho.value_or(0.0);
    LocalSystem sys;
    sys.partition = r;
    sys.n_rows = n;
    sys.n_superstates = k;
    sys.m.assign(n * k, 0.0);
    sys.b.assign(n, 0.0);
    std::uint64_t count = 0;

    for (std::size_t i = n; i-- > 0;) {
        const std::size_t s = lo + i;
        const double d = 1.0 - chain.self_loop(s);
        if (d <= 1e-12 && i == 0 && chain.row(s).size() == 1) {
            // absorbing root (single-state partition): its equation is V_sup[r] = V_sup[r]
            sys.m[r] = 1.0;
            sys.b[0] = 0.0;
            continue;
        }
        if (d <= 1e-12)
            throw SolverError("state " + std::to_string(s) + " is (nearly) absorbing: d(s) = " + std::to_string(d));
        double* mi = sys.m.data() + i * k;
        double bi = chain.reward(s) - offset;
        for (const Arc& a : chain.row(s)) {
            const std::size_t t = a.target;
            if (t == s) continue;
            if (layout.is_root(t)) {
                mi[layout.partition_of(t)] += a.prob;
                ++count;
                continue;
            }
            if (layout.partition_of(t) != r)
                throw ValidationError("arc " + std::to_string(s) + " -> " + std::to_string(t) +
                                      " enters another partition at a non-root state");
            const std::size_t j = t - lo;
            if (j <= i)
                throw ValidationError("arc " + std::to_string(s) + " -> " + std::to_string(t) +
                                      " breaks canonical order");
            const double* mj = sys.m.data() + j * k;
            for (std::size_t q = 0; q < k; ++q) mi[q] += a.prob * mj[q];
            bi += a.prob * sys.b[j];
            count += 2 * k + 2;
        }
        const double inv = 1.0 / d;
        for (std::size_t q = 0; q < k; ++q) mi[q] *= inv;
        sys.b[i] = bi * inv;
        count += k + 3;
    }
    if (ops) ops->add(count);
    return sys;
}

SuperstateSystem extract_global_system(std::span<const LocalSystem> locals) {
    const std::size_t k = locals.size();
    SuperstateSystem sys{DenseMatrix(k, k), std::vector<double>(k)};
    for (std::size_t r = 0; r < k; ++r) {
        if (locals[r].partition != r || locals[r].n_superstates != k || locals[r].n_rows == 0)
            throw ValidationError("extract_global_system: missing or misordered local system for partition " +
                                  std::to_string(r));
        auto row = locals[r].row(0);
        std::copy(row.begin(), row.end(), sys.m.row(r).begin());
        sys.b[r] = locals[r].b[0];
    }
    return sys;
}

std::vector<double> solve_superstate_system(const SuperstateSystem& sys, const Criterion& criterion) {
    const std::size_t k = sys.b.size();
    DenseMatrix a(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - sys.m(i, j);
    std::vector<double> rhs = sys.b;
    if (!criterion.is_average()) return gauss_jordan_solve(std::move(a), std::move(rhs));

    std::vector<double> dropped(a.row(0).begin(), a.row(0).end());
    const double dropped_rhs = rhs[0];
    for (std::size_t j = 0; j < k; ++j) a(0, j) = j == 0 ? 1.0 : 0.0;
    rhs[0] = 0.0;
    std::vector<double> v = gauss_jordan_solve(std::move(a), std::move(rhs));
    double lhs = 0.0;
    for (std::size_t j = 0; j < k; ++j) lhs += dropped[j] * v[j];
    const double residual = std::abs(lhs - dropped_rhs);
    if (residual > kConsistencyTolerance)
        throw SolverError("superstate system is inconsistent (residual " + std::to_string(residual) +
                          "); the average reward does not match the value equations");
    return v;
}

std::vector<double> inject_values(std::span<const LocalSystem> locals, std::span<const double> v_sup) {
    std::size_t n = 0;
    for (const auto& l : locals) n += l.n_rows;
    std::vector<double> v(n);
    std::size_t offset = 0;
    for (std::size_t r = 0; r < locals.size(); ++r) {
        const LocalSystem& l = locals[r];
        v[offset] = v_sup[r];
        for (std::size_t i = 1; i < l.n_rows; ++i) {
            auto row = l.row(i);
            double acc = l.b[i];
            for (std::size_t q = 0; q < row.size(); ++q) acc += row[q] * v_sup[q];
            v[offset + i] = acc;
        }
        offset += l.n_rows;
    }
    return v;
}

double bellman_residual(const SparseChain& chain, const Criterion& criterion, std::span<const double> v,
                        std::optional<double> rho) {
    const double lambda = criterion.lambda();
    const double offset = rho.value_or(0.0);
    double worst = 0.0;
    for (std::size_t s = 0; s < chain.n_states(); ++s) {
        double acc = 0.0;
        for (const Arc& a : chain.row(s)) acc += a.prob * v[a.target];
        worst = std::max(worst, std::abs(v[s] - (chain.reward(s) - offset + lambda * acc)));
    }
    return worst;
}

EvalResult evaluate_policy_structured(const SparseChain& chain, const PartitionLayout& layout,
                                      const Criterion& criterion, const StructuredOptions& options) {
    if (chain.n_states() != layout.n_states())
        throw ValidationError("chain and layout sizes differ");
    options.deadline.check();
    EvalResult out;
    const bool parallel = chain.n_states() >= kParallelThreshold;
    const std::size_t k = layout.n_partitions();
    std::vector<LocalSystem> locals(k);

    if (criterion.is_average()) {
        out.rho = chiu_average_reward(chain, layout, options.intra_solver, options.deadline).rho;
        options.deadline.check();
        parallel_for(
            k, [&](std::size_t r) { locals[r] = build_local_system(chain, layout, r, criterion, out.rho); },
            parallel);
    } else {
        const SparseChain scaled = chain.scaled(criterion.gamma());
        parallel_for(
            k, [&](std::size_t r) { locals[r] = build_local_system(scaled, layout, r, criterion, std::nullopt); },
            parallel);
    }
    options.deadline.check();
    const std::vector<double> v_sup = solve_superstate_system(extract_global_system(locals), criterion);
    out.v = inject_values(locals, v_sup);
    out.residual = bellman_residual(chain, criterion, out.v, out.rho);
    out.iterations = 1;
    return out;
}

namespace {

EvalResult direct_solve(const SparseChain& chain, const Criterion& criterion, const Deadline& deadline) {
    const std::size_t n = chain.n_states();
    DenseMatrix a(n, n);
    std::vector<double> rhs(chain.rewards().begin(), chain.rewards().end());
    EvalResult out;
    if (criterion.is_average()) {
        // unknowns: x[0] = rho, x[s] = V(s) for s >= 1, with V(0) = 0
        for (std::size_t s = 0; s < n; ++s) {
            a(s, 0) = 1.0;
            if (s > 0) a(s, s) += 1.0;
            for (const Arc& arc : chain.row(s))
                if (arc.target != 0) a(s, arc.target) -= arc.prob;
        }
        std::vector<double> x = gauss_jordan_solve(std::move(a), std::move(rhs), deadline);
        out.rho = x[0];
        x[0] = 0.0;
        out.v = std::move(x);
    } else {
        const double g = criterion.gamma();
        for (std::size_t s = 0; s < n; ++s) {
            a(s, s) = 1.0;
            for (const Arc& arc : chain.row(s)) a(s, arc.target) -= g * arc.prob;
        }
        out.v = gauss_jordan_solve(std::move(a), std::move(rhs), deadline);
    }
    out.iterations = 1;
    return out;
}

EvalResult fixed_point(const SparseChain& chain, const PartitionLayout& layout, const Criterion& criterion,
                       const BaselineMethod& method, const Deadline& deadline) {
    const std::size_t n = chain.n_states();
    EvalResult out;
    double offset = 0.0;
    if (criterion.is_average()) {
        out.rho = chiu_average_reward(chain, layout, IntraSolver::robb, deadline).rho;
        offset = *out.rho;
    }
    const double lambda = criterion.lambda();
    std::vector<double> v(n, 0.0), w(n);
    StagnationMonitor monitor(method.stagnation_window, method.stagnation_threshold);
    out.converged = false;
    out.stop_reason = StopReason::max_iter;
    for (std::size_t it = 1; it <= method.max_iter; ++it) {
        deadline.check();
        chain.multiply(v, w);
        for (std::size_t s = 0; s < n; ++s) w[s] = chain.reward(s) - offset + lambda * w[s];
        double metric;
        if (criterion.is_average()) {
            const double anchor = w[0];
            double lo = 0.0, hi = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                w[s] -= anchor;
                const double d = w[s] - v[s];
                lo = s == 0 ? d : std::min(lo, d);
                hi = s == 0 ? d : std::max(hi, d);
            }
            metric = hi - lo;
        } else {
            metric = 0.0;
            for (std::size_t s = 0; s < n; ++s) metric = std::max(metric, std::abs(w[s] - v[s]));
        }
        std::swap(v, w);
        out.iterations = it;
        if (metric < method.epsilon) {
            out.converged = true;
            out.stop_reason = criterion.is_average() ? StopReason::span : StopReason::linf;
            break;
        }
        if (monitor.update(metric)) {
            out.converged = true;
            out.stop_reason = StopReason::stagnation;
            break;
        }
    }
    out.v = std::move(v);
    return out;
}

} // namespace

EvalResult evaluate_policy_baseline(const SparseChain& chain, const PartitionLayout& layout,
                                    const Criterion& criterion, const BaselineMethod& method,
                                    const Deadline& deadline) {
    EvalResult out = method.kind == BaselineMethod::Kind::direct
                         ? direct_solve(chain, criterion, deadline)
                         : fixed_point(chain, layout, criterion, method, deadline);
    out.residual = bellman_residual(chain, criterion, out.v, out.rho);
    return out;
}

} // namespace sisdmdp
