#pragma once

#include "sisdmdp/model.hpp"
#include "sisdmdp/policy_eval.hpp"
#include "sisdmdp/timing.hpp"

#include <vector>

namespace sisdmdp {

/// Q(s, a), states major.
class QTable {
public:
    QTable(std::size_t n_states, std::size_t n_actions)
        : n_states_(n_states), n_actions_(n_actions), q_(n_states * n_actions, 0.0) {}

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }
    double& operator()(std::size_t s, std::size_t a) { return q_[s * n_actions_ + a]; }
    double operator()(std::size_t s, std::size_t a) const { return q_[s * n_actions_ + a]; }
    std::span<const double> row(std::size_t s) const { return {q_.data() + s * n_actions_, n_actions_}; }

private:
    std::size_t n_states_, n_actions_;
    std::vector<double> q_;
};

/// Ties within this distance of the maximum count as maximal.
inline constexpr double kTieTolerance = 1e-12;

/// Q(s,a) = r(s,a) + lambda * sum_t P^a(s,t) V(t)
QTable q_values(const MdpModel& model, std::span<const double> v, double lambda);

/// Greedy policy. The incumbent action is kept whenever it is within the tie
/// tolerance of the maximum; otherwise the lowest-index maximiser wins.
Policy improve_policy(const QTable& q, const Policy& current);

/// improve_policy(q_values(model, v, lambda), current) without materialising Q.
Policy greedy_policy(const MdpModel& model, std::span<const double> v, double lambda, const Policy& current);

struct RunStats {
    std::size_t iterations = 0;
    double wall_time_s = 0.0;
    double eval_time_s = 0.0;
    double improve_time_s = 0.0;
    bool converged = false;
    StopReason stop_reason = StopReason::none;
};

struct Evaluator {
    enum class Kind { structured, direct, fixed_point };
    Kind kind = Kind::structured;
    IntraSolver intra_solver = IntraSolver::robb; ///< structured only
    BaselineMethod fixed_point_method = BaselineMethod::fixed_point(1e-15);

    static Evaluator structured(IntraSolver s = IntraSolver::robb) { return {Kind::structured, s, {}}; }
    static Evaluator direct() { return {Kind::direct, IntraSolver::robb, {}}; }
    static Evaluator fixed_point(double eps, std::size_t max_iter = 100000) {
        return {Kind::fixed_point, IntraSolver::robb, BaselineMethod::fixed_point(eps, max_iter)};
    }
};

/// Evaluates one policy of `model` with the chosen evaluator. The structured
/// evaluator relabels the induced chain into canonical order when needed.
EvalResult evaluate_policy(const MdpModel& model, const Policy& policy, const Criterion& criterion,
                           const Evaluator& evaluator, const Deadline& deadline = {});

struct PolicyIterationOptions {
    std::size_t max_iterations = 10000;
    Policy initial; ///< empty = action 0 everywhere
    bool record_trace = false;
    Deadline deadline;
};

struct PolicyIterationResult {
    Policy policy;
    EvalResult evaluation;
    RunStats stats;
    std::vector<Policy> trace; ///< evaluated policies in order (when recorded)
};

/// Policy iteration: evaluate, improve greedily, stop when the policy repeats.
PolicyIterationResult policy_iteration(const MdpModel& model, const Criterion& criterion,
                                       const Evaluator& evaluator, const PolicyIterationOptions& options = {});

struct IterationOptions {
    double epsilon = 1e-15;
    std::size_t max_iter = 100000;
    std::size_t stagnation_window = 100;
    double stagnation_threshold = 1e-13;
    Deadline deadline;
};

struct ValueIterationResult {
    Policy policy;
    std::vector<double> v;
    double rho = 0.0; ///< relative value iteration only
    RunStats stats;
};

/// V <- max_a [r + gamma P^a V] until ||V_{k+1} - V_k||_inf < epsilon.
ValueIterationResult value_iteration(const MdpModel& model, double gamma, const IterationOptions& options = {});

/// Relative value iteration anchored at state 0, stopped on the span of
/// successive differences. The reported average reward is the midpoint of
/// min_s and max_s of (T V - V) at the last sweep, which stays correct when
/// the span oscillates on periodic chains.
ValueIterationResult relative_value_iteration(const MdpModel& model, const IterationOptions& options = {});

} // namespace sisdmdp
