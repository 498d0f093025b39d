// sisdmdp: generate, validate, solve, benchmark and cross-check SISDMDP models.
//
// Exit codes: 0 success, 1 validation or input failure, 2 solver failure.

#include "sisdmdp/bench.hpp"
#include "sisdmdp/dp.hpp"
#include "sisdmdp/error.hpp"
#include "sisdmdp/generator.hpp"
#include "sisdmdp/model_io.hpp"
#include "sisdmdp/structure.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

using namespace sisdmdp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

struct CommonOptions {
    std::string criterion = "average";
    double gamma = 0.9;
    double epsilon = 1e-15;
    std::size_t max_iter = 100000;
    double budget_s = 600.0;
    std::string out = "-";
    std::string format;

    Criterion make_criterion() const {
        if (criterion == "average") return Criterion::average();
        if (criterion == "discounted") return Criterion::discounted(gamma);
        throw ValidationError("unknown criterion '" + criterion + "'");
    }
};

std::string read_input(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw ValidationError("cannot write '" + path + "'");
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names, Criterion::Kind kind) {
    if (names.empty()) return algorithms_for(kind);
    std::vector<Algorithm> out;
    for (const auto& n : names) out.push_back(algorithm_from_string(n));
    return out;
}

void add_criterion_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--criterion", o.criterion, "average or discounted")
        ->check(CLI::IsMember({"average", "discounted"}))
        ->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "discount factor in [0, 1)")->capture_default_str();
    cmd->add_option("--epsilon", o.epsilon, "stopping threshold for iterative methods")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "iteration cap for iterative methods")->capture_default_str();
    cmd->add_option("--budget-s", o.budget_s, "wall-clock budget per run in seconds")->capture_default_str();
}

bool print_structure(const MdpModel& model, std::ostream& os) {
    bool ok = true;
    for (std::size_t a = 0; a < model.n_actions(); ++a) {
        const StructureReport rep = validate_structure(model.transitions(a), model.layout());
        const ErgodicityReport erg = validate_ergodic(model.transitions(a));
        os << "action " << a << ": " << (rep.structure_ok() ? "ok" : "INVALID") << '\n' << rep.summary();
        os << "period: " << erg.period << '\n';
        ok = ok && rep.structure_ok();
    }
    return ok;
}

int cmd_generate(const GeneratorConfig& cfg, const CommonOptions& o) {
    write_output(o.out, serialize_model(generate_sisdmdp(cfg)));
    return 0;
}

int cmd_validate(const std::string& path) {
    const MdpModel model = parse_model(read_input(path));
    std::cout << "states " << model.n_states() << ", actions " << model.n_actions() << ", partitions "
              << model.layout().n_partitions() << '\n';
    return print_structure(model, std::cout) ? 0 : kExitValidation;
}

int cmd_solve(const std::string& path, const CommonOptions& o, const std::vector<std::string>& alg_names) {
    const MdpModel model = parse_model(read_input(path));
    std::ostringstream diag;
    if (!print_structure(model, diag)) {
        std::cerr << diag.str();
        return kExitValidation;
    }
    const Criterion criterion = o.make_criterion();
    std::vector<Algorithm> algs = parse_algorithms(alg_names, criterion.kind());
    if (alg_names.empty()) algs.resize(1);
    if (algs.size() != 1) throw ValidationError("solve takes exactly one algorithm");

    BenchSpec spec;
    spec.grid = {{model.n_actions(), model.n_states(), model.layout().n_partitions()}};
    spec.algorithms = algs;
    spec.criterion = criterion;
    spec.epsilon = o.epsilon;
    spec.max_iter = o.max_iter;
    spec.time_budget_s = o.budget_s;
    spec.validate();

    // run_algorithm only keeps summaries, so the full solution is recomputed here
    const Deadline deadline = Deadline::after(o.budget_s);
    Stopwatch clock;
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(algs[0]);
    j["criterion"] = criterion.name();
    if (!criterion.is_average()) j["gamma"] = criterion.gamma();
    std::vector<double> v;
    Policy policy;
    RunStats stats;
    std::optional<double> rho;
    if (algs[0] == Algorithm::rvi || algs[0] == Algorithm::vi) {
        IterationOptions it{o.epsilon, o.max_iter, 100, 1e-13, deadline};
        auto res = algs[0] == Algorithm::rvi ? relative_value_iteration(model, it)
                                             : value_iteration(model, criterion.gamma(), it);
        v = std::move(res.v);
        policy = std::move(res.policy);
        stats = res.stats;
        if (algs[0] == Algorithm::rvi) rho = res.rho;
    } else {
        Evaluator ev = Evaluator::structured();
        if (algs[0] == Algorithm::mrpi_chiu_gth) ev = Evaluator::structured(IntraSolver::gth);
        if (algs[0] == Algorithm::rpi_gj || algs[0] == Algorithm::pi_gj) ev = Evaluator::direct();
        if (algs[0] == Algorithm::rpi_fp || algs[0] == Algorithm::pi_fp) ev = Evaluator::fixed_point(o.epsilon, o.max_iter);
        PolicyIterationOptions pi;
        pi.deadline = deadline;
        auto res = policy_iteration(model, criterion, ev, pi);
        v = std::move(res.evaluation.v);
        policy = std::move(res.policy);
        stats = res.stats;
        rho = res.evaluation.rho;
    }
    j["iterations"] = stats.iterations;
    j["converged"] = stats.converged;
    j["stop_reason"] = to_string(stats.stop_reason);
    j["time_s"] = clock.seconds();
    if (rho) j["rho"] = *rho;
    j["policy"] = policy;
    j["v"] = v;
    write_output(o.out, j.dump(2) + '\n');
    return stats.converged ? 0 : kExitSolver;
}

int cmd_bench(const CommonOptions& o, const std::vector<std::size_t>& actions, const std::vector<std::size_t>& states,
              const std::vector<std::size_t>& partitions, const std::vector<std::uint64_t>& seeds,
              const std::vector<std::string>& alg_names) {
    BenchSpec spec;
    spec.criterion = o.make_criterion();
    for (std::size_t a : actions)
        for (std::size_t n : states)
            for (std::size_t k : partitions) spec.grid.push_back({a, n, k});
    spec.algorithms = parse_algorithms(alg_names, spec.criterion.kind());
    spec.epsilon = o.epsilon;
    spec.max_iter = o.max_iter;
    spec.seeds = seeds;
    spec.time_budget_s = o.budget_s;
    const ReportFormat fmt = report_format_from_string(o.format.empty() ? "markdown" : o.format);
    const auto records = run_bench(spec);
    write_output(o.out, emit_report(records, fmt));
    for (const auto& r : records)
        if (!r.error.empty()) return kExitSolver;
    return 0;
}

int cmd_compare(const std::string& path, const CommonOptions& o, double tolerance) {
    const MdpModel model = parse_model(read_input(path));
    const CompareReport rep = compare_solvers(model, o.make_criterion());
    write_output(o.out, rep.to_text());
    if (!rep.valid) return kExitValidation;
    const double residual = std::max(rep.residual_structured, rep.residual_direct);
    return rep.worst_gap() <= tolerance && residual <= tolerance ? 0 : kExitSolver;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy evaluation and iteration for single-input superstate decomposable MDPs"};
    app.require_subcommand(1);

    CommonOptions opts;
    GeneratorConfig gen;
    std::string model_path = "-";
    std::vector<std::string> alg_names;
    std::vector<std::size_t> grid_actions{2}, grid_states{100}, grid_partitions{10};
    std::vector<std::uint64_t> seeds{1};
    double tolerance = 1e-8;

    auto* generate = app.add_subcommand("generate", "write a random model document");
    generate->add_option("--states", gen.n_states)->capture_default_str();
    generate->add_option("--partitions", gen.n_partitions)->capture_default_str();
    generate->add_option("--actions", gen.n_actions)->capture_default_str();
    generate->add_option("--seed", gen.seed)->capture_default_str();
    generate->add_option("--forward-rate", gen.forward_arc_rate, "mean intra forward arcs per state")
        ->capture_default_str();
    generate->add_option("--cross-rate", gen.cross_arc_rate, "mean cross arcs per partition")->capture_default_str();
    generate->add_option("--self-loop-prob", gen.self_loop_prob)->capture_default_str();
    generate->add_option("--out", opts.out, "output file, - for stdout")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "check the partition structure of a model");
    validate->add_option("model", model_path, "model file, - for stdin")->capture_default_str();

    auto* solve = app.add_subcommand("solve", "run one algorithm and print policy and values as JSON");
    solve->add_option("model", model_path, "model file, - for stdin")->capture_default_str();
    add_criterion_flags(solve, opts);
    solve->add_option("--algorithms", alg_names, "one algorithm name (default: MRPI+Chiu+RB or MPI+Chiu+RB)");
    solve->add_option("--out", opts.out)->capture_default_str();

    auto* bench = app.add_subcommand("bench", "benchmark algorithms on generated instances");
    add_criterion_flags(bench, opts);
    bench->add_option("--states", grid_states, "state counts (grid axis)")->delimiter(',')->capture_default_str();
    bench->add_option("--partitions", grid_partitions, "partition counts (grid axis)")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--actions", grid_actions, "action counts (grid axis)")->delimiter(',')->capture_default_str();
    bench->add_option("--seed", seeds, "generator seeds")->delimiter(',')->capture_default_str();
    bench->add_option("--algorithms", alg_names, "algorithm names (default: all for the criterion)")->delimiter(',');
    bench->add_option("--format", opts.format, "csv, markdown or json-lines (default markdown)");
    bench->add_option("--out", opts.out)->capture_default_str();

    auto* compare = app.add_subcommand("compare", "cross-check structured solvers against dense oracles");
    compare->add_option("model", model_path, "model file, - for stdin")->capture_default_str();
    add_criterion_flags(compare, opts);
    compare->add_option("--tolerance", tolerance, "largest acceptable gap or residual")->capture_default_str();
    compare->add_option("--out", opts.out)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(gen, opts);
        if (*validate) return cmd_validate(model_path);
        if (*solve) return cmd_solve(model_path, opts, alg_names);
        if (*bench) return cmd_bench(opts, grid_actions, grid_states, grid_partitions, seeds, alg_names);
        if (*compare) return cmd_compare(model_path, opts, tolerance);
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
