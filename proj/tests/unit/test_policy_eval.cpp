#include "support.hpp"

#include "sisdmdp/error.hpp"
#include "sisdmdp/generator.hpp"
#include "sisdmdp/policy_eval.hpp"

#include <doctest.h>

using namespace sisdmdp;
using namespace testing;

namespace {

constexpr double kRho = 6.0 / 7;
const std::vector<double> kV{0, -34.0 / 49, 20.0 / 49, -36.0 / 49};

void check_row(const LocalSystem& l, std::size_t i, std::vector<double> m, double b) {
    auto row = l.row(i);
    for (std::size_t q = 0; q < m.size(); ++q) CHECK(row[q] == doctest::Approx(m[q]).epsilon(1e-15));
    CHECK(l.b[i] == doctest::Approx(b).epsilon(1e-14));
}

} // namespace

TEST_CASE("Criterion") {
    CHECK(Criterion::average().lambda() == 1.0);
    CHECK(Criterion::discounted(0.9).lambda() == 0.9);
    CHECK_THROWS_AS(Criterion::discounted(1.0), ValidationError);
    CHECK_THROWS_AS(Criterion::discounted(-0.1), ValidationError);
}

TEST_CASE("build_local_system on F1") {
    const auto avg = Criterion::average();
    const LocalSystem l0 = build_local_system(f1_chain(), f1_layout(), 0, avg, kRho);
    check_row(l0, 0, {.3, .7}, -2.0 / 7);
    check_row(l0, 1, {.6, .4}, -6.0 / 7);
    const LocalSystem l1 = build_local_system(f1_chain(), f1_layout(), 1, avg, kRho);
    check_row(l1, 0, {.7, .3}, 2.0 / 7);
    check_row(l1, 1, {.7, .3}, -6.0 / 7);

    CHECK_THROWS_AS(build_local_system(f1_chain(), f1_layout(), 0, avg, std::nullopt), ValidationError);
    CHECK_THROWS_AS(build_local_system(f1_chain(), f1_layout(), 0, Criterion::discounted(.5), kRho), ValidationError);
}

TEST_CASE("build_local_system routes arcs to the own root into M") {
    // release-only partition {root, x}: P(x, root) = 1
    const SparseChain c = make_chain(2, {{0, 1, 1}, {1, 0, 1}}, {0, 0});
    const LocalSystem l = build_local_system(c, PartitionLayout({0, 2}), 0, Criterion::average(), 0.0);
    check_row(l, 1, {1.0}, 0.0);
    // the root's own equation substitutes x: V(root) = V(root)
    check_row(l, 0, {1.0}, 0.0);
}

TEST_CASE("build_local_system guards") {
    const auto avg = Criterion::average();
    // non-root state with a pure self-loop
    const SparseChain absorbing = SparseChain::unchecked({{{1, 1}}, {{1, 1}}}, {0, 0});
    CHECK_THROWS_AS(build_local_system(absorbing, PartitionLayout({0, 2}), 0, avg, 0.0), SolverError);
    // arc into another partition at a non-root state
    const SparseChain cross = make_chain(4, {{0, 1, 1}, {1, 3, 1}, {2, 3, 1}, {3, 0, 1}}, {0, 0, 0, 0});
    CHECK_THROWS_AS(build_local_system(cross, f1_layout(), 0, avg, 0.0), ValidationError);
    // backward arc between non-root states
    const SparseChain back = make_chain(3, {{0, 2, 1}, {2, 1, 1}, {1, 0, 1}}, {0, 0, 0});
    CHECK_THROWS_AS(build_local_system(back, PartitionLayout({0, 3}), 0, avg, 0.0), ValidationError);
}

TEST_CASE("local rows are sub-stochastic") {
    GeneratorConfig cfg;
    cfg.n_states = 200;
    cfg.n_partitions = 8;
    const MdpModel m = generate_sisdmdp(cfg);
    const SparseChain& p = m.transitions(0);
    const double rho = chiu_average_reward(p, m.layout()).rho;
    const SparseChain scaled = p.scaled(0.9);
    for (std::size_t r = 0; r < 8; ++r) {
        const LocalSystem a = build_local_system(p, m.layout(), r, Criterion::average(), rho);
        const LocalSystem d = build_local_system(scaled, m.layout(), r, Criterion::discounted(0.9), std::nullopt);
        for (std::size_t i = 0; i < a.n_rows; ++i) {
            double sa = 0, sd = 0;
            for (double x : a.row(i)) {
                CHECK(x >= 0.0);
                sa += x;
            }
            for (double x : d.row(i)) {
                CHECK(x >= 0.0);
                sd += x;
            }
            CHECK(sa <= 1.0 + 1e-12);
            CHECK(sd <= 0.9 + 1e-12);
        }
    }
}

TEST_CASE("extract, solve and inject on F1") {
    const auto avg = Criterion::average();
    std::vector<LocalSystem> locals{build_local_system(f1_chain(), f1_layout(), 0, avg, kRho),
                                    build_local_system(f1_chain(), f1_layout(), 1, avg, kRho)};
    const SuperstateSystem sys = extract_global_system(locals);
    CHECK(sys.m(0, 0) == doctest::Approx(.3));
    CHECK(sys.m(0, 1) == doctest::Approx(.7));
    CHECK(sys.m(1, 0) == doctest::Approx(.7));
    CHECK(sys.m(1, 1) == doctest::Approx(.3));
    CHECK(sys.b[0] == doctest::Approx(-2.0 / 7));
    CHECK(sys.b[1] == doctest::Approx(2.0 / 7));
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t q = 0; q < 2; ++q) CHECK(sys.m(r, q) == locals[r].row(0)[q]);

    const auto v_sup = solve_superstate_system(sys, avg);
    CHECK(v_sup[0] == 0.0);
    CHECK(std::abs(v_sup[1] - 20.0 / 49) <= 1e-15);

    const auto v = inject_values(locals, v_sup);
    CHECK(linf(v, kV) <= 1e-15);
    CHECK(v[0] == v_sup[0]);
    CHECK(v[2] == v_sup[1]);

    // a wrong rho makes the dropped equation inconsistent
    std::vector<LocalSystem> wrong{build_local_system(f1_chain(), f1_layout(), 0, avg, 0.5),
                                   build_local_system(f1_chain(), f1_layout(), 1, avg, 0.5)};
    CHECK_THROWS_AS(solve_superstate_system(extract_global_system(wrong), avg), SolverError);

    std::vector<LocalSystem> swapped{locals[1], locals[0]};
    CHECK_THROWS_AS(extract_global_system(swapped), ValidationError);
}

TEST_CASE("superstate system corner cases") {
    SuperstateSystem one{DenseMatrix(1, 1, 1.0), {0.0}};
    CHECK(solve_superstate_system(one, Criterion::average()) == std::vector<double>{0.0});

    SuperstateSystem uncoupled{DenseMatrix(2, 2, 0.0), {1.5, -2.0}};
    CHECK(solve_superstate_system(uncoupled, Criterion::discounted(0.5)) == std::vector<double>{1.5, -2.0});

    LocalSystem a{0, 3, 2, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0)};
    LocalSystem b{1, 2, 2, std::vector<double>(4, 0.0), std::vector<double>(2, 0.0)};
    const auto v = inject_values(std::vector<LocalSystem>{a, b}, std::vector<double>{4.0, 7.0});
    CHECK(v == std::vector<double>{4, 0, 0, 7, 0});
}

TEST_CASE("evaluate_policy_structured worked examples") {
    const EvalResult f1 = evaluate_policy_structured(f1_chain(), f1_layout(), Criterion::average());
    REQUIRE(f1.rho);
    CHECK(std::abs(*f1.rho - kRho) <= 1e-15);
    CHECK(linf(f1.v, kV) <= 1e-15);
    CHECK(f1.residual <= 1e-15);

    const SparseChain pair = make_chain(2, {{0, 1, 1}, {1, 0, 1}}, {2, 0});
    const EvalResult d = evaluate_policy_structured(pair, PartitionLayout({0, 2}), Criterion::discounted(0.5));
    CHECK_FALSE(d.rho);
    CHECK(d.v[0] == doctest::Approx(8.0 / 3).epsilon(1e-15));
    CHECK(d.v[1] == doctest::Approx(4.0 / 3).epsilon(1e-15));

    const SparseChain loop = make_chain(1, {{0, 0, 1}}, {1});
    const EvalResult g = evaluate_policy_structured(loop, PartitionLayout({0, 1}), Criterion::discounted(0.9));
    CHECK(g.v[0] == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("baseline evaluators") {
    const EvalResult direct = evaluate_policy_baseline(f1_chain(), f1_layout(), Criterion::average(), BaselineMethod::direct());
    CHECK(std::abs(*direct.rho - kRho) <= 1e-9);
    CHECK(linf(direct.v, kV) <= 1e-9);

    const EvalResult fp = evaluate_policy_baseline(f1_chain(), f1_layout(), Criterion::average(),
                                                   BaselineMethod::fixed_point(1e-13));
    CHECK(fp.converged);
    CHECK(linf(fp.v, kV) <= 1e-10);

    const SparseChain loop = make_chain(1, {{0, 0, 1}}, {1});
    const EvalResult geo = evaluate_policy_baseline(loop, PartitionLayout({0, 1}), Criterion::discounted(0.9),
                                                    BaselineMethod::fixed_point(1e-12));
    CHECK(geo.v[0] == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(geo.stop_reason == StopReason::linf);

    const auto disc = Criterion::discounted(0.9);
    const EvalResult s = evaluate_policy_structured(f1_chain(), f1_layout(), disc);
    const EvalResult dd = evaluate_policy_baseline(f1_chain(), f1_layout(), disc, BaselineMethod::direct());
    CHECK(linf(s.v, dd.v) <= 1e-9);

    // iteration cap reached: flagged, best iterate returned
    const EvalResult capped = evaluate_policy_baseline(f1_chain(), f1_layout(), disc, BaselineMethod::fixed_point(1e-15, 5));
    CHECK_FALSE(capped.converged);
    CHECK(capped.stop_reason == StopReason::max_iter);
    CHECK(capped.iterations == 5);
}

TEST_CASE("structured equals direct and the oracle on generated chains") {
    GeneratorConfig cfg;
    Rng pick(17);
    for (int trial = 0; trial < 30; ++trial) {
        cfg.n_partitions = 2 + pick.below(9);
        cfg.n_states = cfg.n_partitions * (2 + pick.below(50));
        cfg.seed = 500 + trial;
        const MdpModel m = generate_sisdmdp(cfg);
        const SparseChain& p = m.transitions(0);
        for (const Criterion crit : {Criterion::average(), Criterion::discounted(0.9)}) {
            const EvalResult s = evaluate_policy_structured(p, m.layout(), crit);
            const EvalResult d = evaluate_policy_baseline(p, m.layout(), crit, BaselineMethod::direct());
            const OracleValues o = oracle_values(p, crit);
            CHECK(linf(s.v, d.v) <= 1e-8);
            CHECK(linf(s.v, o.v) <= 1e-8);
            CHECK(s.residual <= 1e-9);
            CHECK(d.residual <= 1e-9);
            if (crit.is_average()) {
                CHECK(s.v[0] == 0.0);
                CHECK(std::abs(*s.rho - o.rho) <= 1e-10);
            }
        }
    }
}

TEST_CASE("local rows reproduce the direct solution") {
    GeneratorConfig cfg;
    cfg.n_states = 120;
    cfg.n_partitions = 6;
    const MdpModel m = generate_sisdmdp(cfg);
    const SparseChain& p = m.transitions(0);
    const OracleValues o = oracle_values(p, Criterion::average());
    std::vector<double> v_sup;
    for (std::size_t r = 0; r < 6; ++r) v_sup.push_back(o.v[m.layout().root(r)]);
    for (std::size_t r = 0; r < 6; ++r) {
        const LocalSystem l = build_local_system(p, m.layout(), r, Criterion::average(), o.rho);
        for (std::size_t i = 1; i < l.n_rows; ++i) {
            double acc = l.b[i];
            for (std::size_t q = 0; q < 6; ++q) acc += l.row(i)[q] * v_sup[q];
            CHECK(std::abs(acc - o.v[m.layout().begin(r) + i]) <= 1e-8);
        }
    }
}

TEST_CASE("build_local_system op count is O((n_r + m_r) K)") {
    GeneratorConfig cfg;
    cfg.n_partitions = 10;
    for (std::size_t n : {200, 2000, 20000}) {
        cfg.n_states = n;
        const MdpModel m = generate_sisdmdp(cfg);
        const SparseChain& p = m.transitions(0);
        const double rho = chiu_average_reward(p, m.layout()).rho;
        for (std::size_t r = 0; r < 10; ++r) {
            OpCounter ops;
            build_local_system(p, m.layout(), r, Criterion::average(), rho, &ops);
            std::size_t arcs = 0;
            for (std::size_t s = m.layout().begin(r); s < m.layout().end(r); ++s) arcs += p.row(s).size();
            CHECK(ops.ops <= 4 * (m.layout().size(r) + arcs) * 10);
        }
    }
}

TEST_CASE("StagnationMonitor") {
    StagnationMonitor off(0, 1.0);
    for (int i = 0; i < 10; ++i) CHECK_FALSE(off.update(1.0));

    StagnationMonitor m(3, 1e-3);
    CHECK_FALSE(m.update(1.0));
    CHECK_FALSE(m.update(0.5));
    CHECK_FALSE(m.update(0.25));
    CHECK_FALSE(m.update(0.125));
    CHECK_FALSE(m.update(2.0)); // oscillation does not reset the best value
    CHECK(m.best() == 0.125);
    CHECK_FALSE(m.update(2.0));
    CHECK(m.update(2.0));
}
