#include "support.hpp"

#include "sisdmdp/dp.hpp"
#include "sisdmdp/error.hpp"
#include "sisdmdp/generator.hpp"

#include <doctest.h>

#include <limits>

using namespace sisdmdp;
using namespace testing;

namespace {

MdpModel one_state_two_actions() {
    std::vector<SparseChain> a{make_chain(1, {{0, 0, 1}}, {1}), make_chain(1, {{0, 0, 1}}, {5})};
    return MdpModel(a, PartitionLayout({0, 1}));
}

// F1 plus a second action that swaps the rewards of the second partition.
MdpModel f1_two_actions() {
    std::vector<SparseChain> a{f1_chain(), make_chain(4,
                                                      {{0, 1, .5}, {0, 2, .5}, {1, 0, .6}, {1, 2, .4}, {2, 3, 1.0},
                                                       {3, 0, .7}, {3, 2, .3}},
                                                      {1, 0, 0, 2})};
    return MdpModel(a, f1_layout());
}

MdpModel random_model(std::size_t n, std::size_t k, std::size_t actions, std::uint64_t seed, double perturb = 0.2) {
    GeneratorConfig cfg;
    cfg.n_states = n;
    cfg.n_partitions = k;
    cfg.n_actions = actions;
    cfg.seed = seed;
    cfg.perturb_magnitude = perturb;
    return generate_sisdmdp(cfg);
}

} // namespace

TEST_CASE("q_values") {
    const MdpModel m = f1_two_actions();
    const QTable zero = q_values(m, std::vector<double>(4, 0.0), 1.0);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 2; ++a) CHECK(zero(s, a) == m.reward(s, a));

    const MdpModel one = one_state_two_actions();
    const QTable q = q_values(one, std::vector<double>{3.0}, 0.9);
    CHECK(q(0, 0) == doctest::Approx(1 + 0.9 * 3));
    CHECK(q(0, 1) == doctest::Approx(5 + 0.9 * 3));

    // Bellman identity on F1: Q(s) = V(s) + rho
    const EvalResult e = evaluate_policy(fixture_f1(), {0, 0, 0, 0}, Criterion::average(), Evaluator::structured());
    const QTable qf = q_values(fixture_f1(), e.v, 1.0);
    for (std::size_t s = 0; s < 4; ++s) CHECK(std::abs(qf(s, 0) - (e.v[s] + *e.rho)) <= 1e-14);
}

TEST_CASE("improve_policy tie rule") {
    QTable q(3, 3);
    for (std::size_t a = 0; a < 3; ++a) q(0, a) = 2.0;
    q(1, 0) = 1, q(1, 1) = 3, q(1, 2) = 2;
    q(2, 0) = 1, q(2, 1) = 3, q(2, 2) = 3 - 1e-13;
    const Policy next = improve_policy(q, {2, 0, 2});
    CHECK(next[0] == 2); // all equal: incumbent kept
    CHECK(next[1] == 1); // strict maximum
    CHECK(next[2] == 2); // incumbent within tolerance

    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        QTable r(5, 3);
        Policy cur(5);
        for (std::size_t s = 0; s < 5; ++s) {
            cur[s] = static_cast<action_t>(rng.below(3));
            // a coarse grid makes exact ties common
            for (std::size_t a = 0; a < 3; ++a) r(s, a) = static_cast<double>(rng.below(3));
        }
        const Policy got = improve_policy(r, cur);
        for (std::size_t s = 0; s < 5; ++s) {
            std::vector<double> row(r.row(s).begin(), r.row(s).end());
            CHECK(got[s] == oracle_argmax(row, cur[s], kTieTolerance));
        }
        CHECK(greedy_policy(one_state_two_actions(), std::vector<double>{0.0}, 1.0, {0}) == Policy{1});
    }
}

TEST_CASE("policy iteration on one state") {
    const auto res = policy_iteration(one_state_two_actions(), Criterion::discounted(0.9), Evaluator::structured());
    CHECK(res.policy == Policy{1});
    CHECK(res.evaluation.v[0] == doctest::Approx(50.0).epsilon(1e-13));
    CHECK(res.stats.converged);
    CHECK(res.stats.stop_reason == StopReason::policy_fixed);
    CHECK(res.stats.eval_time_s + res.stats.improve_time_s <= res.stats.wall_time_s);
}

TEST_CASE("policy iteration matches exhaustive enumeration on F1 with two actions") {
    const MdpModel m = f1_two_actions();
    for (const Criterion crit : {Criterion::average(), Criterion::discounted(0.9)}) {
        double best_rho = -std::numeric_limits<double>::infinity();
        std::vector<double> best_v(4, -std::numeric_limits<double>::infinity());
        for_each_policy(4, 2, [&](const Policy& pi) {
            const OracleValues o = oracle_values(induce_chain(m, pi), crit);
            best_rho = std::max(best_rho, o.rho);
            for (std::size_t s = 0; s < 4; ++s) best_v[s] = std::max(best_v[s], o.v[s]);
        });
        const auto res = policy_iteration(m, crit, Evaluator::structured());
        if (crit.is_average())
            CHECK(std::abs(*res.evaluation.rho - best_rho) <= 1e-12);
        else
            CHECK(linf(res.evaluation.v, best_v) <= 1e-12);
    }
}

TEST_CASE("evaluators produce the same policy sequence") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const MdpModel m = random_model(60, 4, 3, seed, 0.5);
        for (const Criterion crit : {Criterion::average(), Criterion::discounted(0.9)}) {
            PolicyIterationOptions opts;
            opts.record_trace = true;
            const auto s = policy_iteration(m, crit, Evaluator::structured(), opts);
            const auto g = policy_iteration(m, crit, Evaluator::structured(IntraSolver::gth), opts);
            const auto d = policy_iteration(m, crit, Evaluator::direct(), opts);
            const auto f = policy_iteration(m, crit, Evaluator::fixed_point(1e-15), opts);
            CHECK(s.trace == d.trace);
            CHECK(s.trace == g.trace);
            CHECK(s.trace == f.trace);
            CHECK(s.stats.iterations == d.stats.iterations);
            CHECK(s.stats.iterations == s.trace.size());
        }
    }
}

TEST_CASE("discounted policy iteration improves monotonically") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const MdpModel m = random_model(80, 4, 4, seed, 0.6);
        PolicyIterationOptions opts;
        opts.record_trace = true;
        const auto crit = Criterion::discounted(0.95);
        const auto res = policy_iteration(m, crit, Evaluator::structured(), opts);
        std::vector<double> prev;
        for (const Policy& pi : res.trace) {
            const auto v = evaluate_policy(m, pi, crit, Evaluator::direct()).v;
            if (!prev.empty())
                for (std::size_t s = 0; s < v.size(); ++s) CHECK(v[s] >= prev[s] - 1e-9);
            prev = v;
        }
    }
}

TEST_CASE("policy iteration cap is flagged") {
    // starting from action 0 the first improvement switches to action 1
    PolicyIterationOptions opts;
    opts.max_iterations = 1;
    const auto res = policy_iteration(one_state_two_actions(), Criterion::discounted(0.9), Evaluator::structured(), opts);
    CHECK_FALSE(res.stats.converged);
    CHECK(res.stats.stop_reason == StopReason::max_iter);
    CHECK(res.stats.iterations == 1);
}

TEST_CASE("structured evaluator relabels non-canonical chains") {
    // one partition where the intra arc runs 2 -> 1
    const SparseChain c = make_chain(3, {{0, 2, 1}, {2, 1, .5}, {2, 0, .5}, {1, 0, 1}}, {3, 1, 2});
    const MdpModel m = single_action(c, PartitionLayout({0, 3}));
    for (const Criterion crit : {Criterion::average(), Criterion::discounted(0.8)}) {
        const EvalResult s = evaluate_policy(m, {0, 0, 0}, crit, Evaluator::structured());
        const OracleValues o = oracle_values(c, crit);
        CHECK(linf(s.v, o.v) <= 1e-14);
    }
}

TEST_CASE("value iteration") {
    IterationOptions opts;
    opts.epsilon = 1e-12;
    const auto one = value_iteration(one_state_two_actions(), 0.9, opts);
    CHECK(one.v[0] == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(one.policy == Policy{1});

    const MdpModel m = f1_two_actions();
    const auto myopic = value_iteration(m, 0.0, opts);
    CHECK(myopic.stats.iterations <= 2);
    for (std::size_t s = 0; s < 4; ++s) CHECK(myopic.v[s] == std::max(m.reward(s, 0), m.reward(s, 1)));

    const auto vi = value_iteration(m, 0.9, opts);
    const auto pi = policy_iteration(m, Criterion::discounted(0.9), Evaluator::direct());
    CHECK(linf(vi.v, pi.evaluation.v) <= opts.epsilon / (1 - 0.9) * 2);
    CHECK(vi.policy == pi.policy);

    CHECK_THROWS_AS(value_iteration(m, 1.0, opts), ValidationError);
}

TEST_CASE("relative value iteration") {
    const auto one = relative_value_iteration(one_state_two_actions());
    CHECK(one.rho == 5.0);
    CHECK(one.policy == Policy{1});

    const auto f1 = relative_value_iteration(fixture_f1());
    CHECK(std::abs(f1.rho - 6.0 / 7) <= 1e-12);
    CHECK(f1.policy == Policy{0, 0, 0, 0});

    const auto p2 = relative_value_iteration(period_two_model());
    CHECK(p2.stats.stop_reason == StopReason::stagnation);
    CHECK(std::abs(p2.rho - 1.0) <= 1e-9);

    IterationOptions capped;
    capped.max_iter = 10;
    capped.stagnation_window = 0;
    const auto c = relative_value_iteration(period_two_model(), capped);
    CHECK_FALSE(c.stats.converged);
    CHECK(c.stats.stop_reason == StopReason::max_iter);
}

TEST_CASE("deadlines abort the loops") {
    const MdpModel m = random_model(100, 5, 2, 1);
    PolicyIterationOptions pi;
    pi.deadline = Deadline::after(0.0);
    CHECK_THROWS_AS(policy_iteration(m, Criterion::average(), Evaluator::structured(), pi), BudgetExceeded);
    IterationOptions it;
    it.deadline = Deadline::after(0.0);
    CHECK_THROWS_AS(value_iteration(m, 0.9, it), BudgetExceeded);
    CHECK_THROWS_AS(relative_value_iteration(m, it), BudgetExceeded);
}
