#pragma once

#include "sisdmdp/generator.hpp"
#include "sisdmdp/model.hpp"
#include "sisdmdp/policy_eval.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sisdmdp {

enum class Algorithm {
    mrpi_chiu_rb,  ///< average: policy iteration, structured evaluation, Rob-B intra solver
    mrpi_chiu_gth, ///< average: same, GTH intra solver
    rpi_fp,        ///< average: relative policy iteration, fixed-point evaluation
    rpi_gj,        ///< average: relative policy iteration, Gauss-Jordan evaluation
    rvi,           ///< average: relative value iteration
    mpi_chiu_rb,   ///< discounted: policy iteration, structured evaluation
    pi_fp,         ///< discounted: policy iteration, fixed-point evaluation
    pi_gj,         ///< discounted: policy iteration, Gauss-Jordan evaluation
    vi,            ///< discounted: value iteration
};

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);
bool supports(Algorithm a, Criterion::Kind criterion);
std::vector<Algorithm> algorithms_for(Criterion::Kind criterion);

struct GridPoint {
    std::size_t actions;
    std::size_t states;
    std::size_t partitions;
};

struct BenchSpec {
    std::vector<GridPoint> grid;
    std::vector<Algorithm> algorithms;
    Criterion criterion = Criterion::average();
    double epsilon = 1e-15;
    std::size_t max_iter = 100000;
    std::vector<std::uint64_t> seeds{1};
    double time_budget_s = 600.0;
    /// Generator settings other than size, actions and seed.
    GeneratorConfig generator;

    /// Throws ValidationError on an empty grid or an algorithm that does not
    /// match the criterion.
    void validate() const;
};

struct BenchRecord {
    Algorithm algorithm = Algorithm::mrpi_chiu_rb;
    Criterion::Kind criterion = Criterion::Kind::average;
    std::size_t actions = 0, states = 0, partitions = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    double eval_time_s = 0.0;    ///< policy-iteration family: evaluation phase
    double improve_time_s = 0.0; ///< policy-iteration family: improvement phase
    std::size_t iterations = 0;
    std::optional<double> rho;               ///< average criterion
    double v_min = 0.0, v_max = 0.0, v_mean = 0.0; ///< discounted criterion
    bool converged = false;
    StopReason stop_reason = StopReason::none;
    std::size_t total_intra_arcs = 0;
    bool fastest = false;
    std::string error; ///< non-empty when the run failed for a reason other than the budget

    bool over_budget() const { return stop_reason == StopReason::budget; }
};

/// Generates one instance per grid point and seed, runs every algorithm on
/// it, and flags the fastest converged record per (grid point, seed). Records
/// are ordered by grid point, seed, then algorithm.
std::vector<BenchRecord> run_bench(const BenchSpec& spec);

/// Runs a single algorithm on a model.
BenchRecord run_algorithm(const MdpModel& model, Algorithm algorithm, const BenchSpec& spec);

enum class ReportFormat { csv, markdown, json_lines };

ReportFormat report_format_from_string(std::string_view token);

inline constexpr std::string_view kCsvHeader =
    "algorithm,criterion,actions,states,partitions,seed,time_s,iterations,rho,converged,stop_reason,total_intra_arcs";

/// CSV (fixed header), markdown (one table per (|A|, N) with a column per K),
/// or one JSON object per line.
std::string emit_report(const std::vector<BenchRecord>& records, ReportFormat format);

/// Inverse of the CSV emitter. The rho column holds the average reward, or
/// "min:max:mean" of the value function under the discounted criterion.
std::vector<BenchRecord> parse_csv_report(std::string_view text);

struct CompareReport {
    bool valid = false;
    std::string validation_message;
    double v_structured_vs_direct = 0.0; ///< ell-inf gap
    double pi_chiu_vs_gth = 0.0;         ///< average only
    double rho_gap = 0.0;                ///< average only
    double residual_structured = 0.0;
    double residual_direct = 0.0;

    double worst_gap() const;
    std::string to_text() const;
};

/// Cross-checks structured evaluation against the dense oracles on the policy
/// that picks action 0 everywhere (or `policy` when given). Intended for N <= 2000.
CompareReport compare_solvers(const MdpModel& model, const Criterion& criterion, const Policy& policy = {});

} // namespace sisdmdp
