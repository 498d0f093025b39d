#include "sisdmdp/dp.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sisdmdp {

namespace {

double q_entry(const MdpModel& model, std::size_t s, std::size_t a, std::span<const double> v, double lambda) {
    const SparseChain& p = model.transitions(a);
    double acc = 0.0;
    for (const Arc& arc : p.row(s)) acc += arc.prob * v[arc.target];
    return p.reward(s) + lambda * acc;
}

template <class QFn>
action_t choose_action(std::size_t n_actions, action_t current, QFn&& q) {
    double best = -std::numeric_limits<double>::infinity();
    thread_local std::vector<double> values;
    values.resize(n_actions);
    for (std::size_t a = 0; a < n_actions; ++a) {
        values[a] = q(a);
        best = std::max(best, values[a]);
    }
    if (current < n_actions && values[current] >= best - kTieTolerance) return current;
    for (std::size_t a = 0; a < n_actions; ++a)
        if (values[a] >= best - kTieTolerance) return static_cast<action_t>(a);
    return 0;
}

bool canonical(const SparseChain& chain, const PartitionLayout& layout) {
    for (std::size_t s = 0; s < chain.n_states(); ++s)
        for (const Arc& a : chain.row(s))
            if (a.target < s && !layout.is_root(a.target) &&
                layout.partition_of(a.target) == layout.partition_of(s))
                return false;
    return true;
}

} // namespace

QTable q_values(const MdpModel& model, std::span<const double> v, double lambda) {
    if (v.size() != model.n_states()) throw ValidationError("q_values: value vector has the wrong length");
    QTable q(model.n_states(), model.n_actions());
    for (std::size_t s = 0; s < model.n_states(); ++s)
        for (std::size_t a = 0; a < model.n_actions(); ++a) q(s, a) = q_entry(model, s, a, v, lambda);
    return q;
}

Policy improve_policy(const QTable& q, const Policy& current) {
    if (current.size() != q.n_states()) throw ValidationError("improve_policy: policy has the wrong length");
    Policy next(q.n_states());
    for (std::size_t s = 0; s < q.n_states(); ++s)
        next[s] = choose_action(q.n_actions(), current[s], [&](std::size_t a) { return q(s, a); });
    return next;
}

Policy greedy_policy(const MdpModel& model, std::span<const double> v, double lambda, const Policy& current) {
    if (current.size() != model.n_states()) throw ValidationError("greedy_policy: policy has the wrong length");
    Policy next(model.n_states());
    for (std::size_t s = 0; s < model.n_states(); ++s)
        next[s] = choose_action(model.n_actions(), current[s],
                                [&](std::size_t a) { return q_entry(model, s, a, v, lambda); });
    return next;
}

EvalResult evaluate_policy(const MdpModel& model, const Policy& policy, const Criterion& criterion,
                           const Evaluator& evaluator, const Deadline& deadline) {
    const SparseChain chain = induce_chain(model, policy);
    const PartitionLayout& layout = model.layout();
    if (evaluator.kind == Evaluator::Kind::direct)
        return evaluate_policy_baseline(chain, layout, criterion, BaselineMethod::direct(), deadline);

    // the structured path and the fixed-point rho both sweep in canonical order
    auto run = [&](const SparseChain& c, const PartitionLayout& l) {
        if (evaluator.kind == Evaluator::Kind::structured)
            return evaluate_policy_structured(c, l, criterion, StructuredOptions{evaluator.intra_solver, deadline});
        return evaluate_policy_baseline(c, l, criterion, evaluator.fixed_point_method, deadline);
    };
    if (canonical(chain, layout)) return run(chain, layout);
    const Reordering re = canonical_reorder(chain, layout);
    EvalResult out = run(re.chain, re.layout);
    out.v = unpermute(out.v, re.permutation);
    return out;
}

PolicyIterationResult policy_iteration(const MdpModel& model, const Criterion& criterion,
                                       const Evaluator& evaluator, const PolicyIterationOptions& options) {
    Stopwatch wall;
    PolicyIterationResult out;
    Policy policy = options.initial.empty() ? Policy(model.n_states(), 0) : options.initial;
    if (policy.size() != model.n_states()) throw ValidationError("initial policy has the wrong length");

    out.stats.stop_reason = StopReason::max_iter;
    for (std::size_t k = 1; k <= options.max_iterations; ++k) {
        options.deadline.check();
        Stopwatch phase;
        out.evaluation = evaluate_policy(model, policy, criterion, evaluator, options.deadline);
        out.stats.eval_time_s += phase.seconds();
        out.policy = policy;
        if (options.record_trace) out.trace.push_back(policy);
        out.stats.iterations = k;

        options.deadline.check();
        phase.restart();
        Policy next = greedy_policy(model, out.evaluation.v, criterion.lambda(), policy);
        out.stats.improve_time_s += phase.seconds();
        if (next == policy) {
            out.stats.converged = true;
            out.stats.stop_reason = StopReason::policy_fixed;
            break;
        }
        policy = std::move(next);
    }
    out.stats.wall_time_s = wall.seconds();
    return out;
}

ValueIterationResult value_iteration(const MdpModel& model, double gamma, const IterationOptions& options) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("discount factor must lie in [0, 1)");
    Stopwatch wall;
    const std::size_t n = model.n_states();
    std::vector<double> v(n, 0.0), w(n);
    StagnationMonitor monitor(options.stagnation_window, options.stagnation_threshold);
    ValueIterationResult out;
    out.stats.stop_reason = StopReason::max_iter;
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        options.deadline.check();
        double diff = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < model.n_actions(); ++a) best = std::max(best, q_entry(model, s, a, v, gamma));
            w[s] = best;
            diff = std::max(diff, std::abs(best - v[s]));
        }
        std::swap(v, w);
        out.stats.iterations = it;
        if (diff < options.epsilon) {
            out.stats.converged = true;
            out.stats.stop_reason = StopReason::linf;
            break;
        }
        if (monitor.update(diff)) {
            out.stats.converged = true;
            out.stats.stop_reason = StopReason::stagnation;
            break;
        }
    }
    out.stats.eval_time_s = wall.seconds();
    Stopwatch phase;
    out.policy = greedy_policy(model, v, gamma, Policy(n, 0));
    out.stats.improve_time_s = phase.seconds();
    out.v = std::move(v);
    out.stats.wall_time_s = wall.seconds();
    return out;
}

ValueIterationResult relative_value_iteration(const MdpModel& model, const IterationOptions& options) {
    Stopwatch wall;
    const std::size_t n = model.n_states();
    std::vector<double> v(n, 0.0), w(n);
    StagnationMonitor monitor(options.stagnation_window, options.stagnation_threshold);
    ValueIterationResult out;
    out.stats.stop_reason = StopReason::max_iter;
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        options.deadline.check();
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < model.n_actions(); ++a) best = std::max(best, q_entry(model, s, a, v, 1.0));
            w[s] = best;
            lo = std::min(lo, best - v[s]);
            hi = std::max(hi, best - v[s]);
        }
        const double anchor = w[0];
        for (double& x : w) x -= anchor;
        std::swap(v, w);
        out.rho = 0.5 * (lo + hi);
        out.stats.iterations = it;
        // span(V_{k+1} - V_k) equals span(T V_k - V_k): the anchor shift is uniform
        const double span = hi - lo;
        if (span < options.epsilon) {
            out.stats.converged = true;
            out.stats.stop_reason = StopReason::span;
            break;
        }
        if (monitor.update(span)) {
            out.stats.converged = true;
            out.stats.stop_reason = StopReason::stagnation;
            break;
        }
    }
    out.stats.eval_time_s = wall.seconds();
    Stopwatch phase;
    out.policy = greedy_policy(model, v, 1.0, Policy(n, 0));
    out.stats.improve_time_s = phase.seconds();
    out.v = std::move(v);
    out.stats.wall_time_s = wall.seconds();
    return out;
}

} // namespace sisdmdp
