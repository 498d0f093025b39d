#include "sisdmdp/bench.hpp"

#include "sisdmdp/dp.hpp"
#include "sisdmdp/error.hpp"
#include "sisdmdp/model_io.hpp"
#include "sisdmdp/steady_state.hpp"
#include "sisdmdp/structure.hpp"
#include "sisdmdp/timing.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace sisdmdp {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 9> kAlgorithmNames{{
    {Algorithm::mrpi_chiu_rb, "MRPI+Chiu+RB"},
    {Algorithm::mrpi_chiu_gth, "MRPI+Chiu+GTH"},
    {Algorithm::rpi_fp, "RPI+FP"},
    {Algorithm::rpi_gj, "RPI+GJ"},
    {Algorithm::rvi, "RVI"},
    {Algorithm::mpi_chiu_rb, "MPI+Chiu+RB"},
    {Algorithm::pi_fp, "PI+FP"},
    {Algorithm::pi_gj, "PI+GJ"},
    {Algorithm::vi, "VI"},
}};

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s) {
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ParseError("invalid number '" + tmp + "'");
    return v;
}

std::uint64_t parse_uint(std::string_view s) {
    const std::string tmp(s);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tmp.c_str(), &end, 10);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ParseError("invalid integer '" + tmp + "'");
    return v;
}

bool has_values(const BenchRecord& r) { return !r.over_budget() && r.error.empty(); }

std::string rho_cell(const BenchRecord& r) {
    if (!has_values(r)) return "";
    if (r.criterion == Criterion::Kind::average) return r.rho ? format_double(*r.rho) : "";
    return format_double(r.v_min) + ":" + format_double(r.v_max) + ":" + format_double(r.v_mean);
}

std::string short_time(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", seconds);
    return buf;
}

} // namespace

std::string_view to_string(Algorithm a) {
    for (const auto& [alg, name] : kAlgorithmNames)
        if (alg == a) return name;
    return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
    for (const auto& [alg, n] : kAlgorithmNames)
        if (n == name) return alg;
    throw ValidationError("unknown algorithm '" + std::string(name) + "'");
}

bool supports(Algorithm a, Criterion::Kind criterion) {
    switch (a) {
    case Algorithm::mrpi_chiu_rb:
    case Algorithm::mrpi_chiu_gth:
    case Algorithm::rpi_fp:
    case Algorithm::rpi_gj:
    case Algorithm::rvi: return criterion == Criterion::Kind::average;
    default: return criterion == Criterion::Kind::discounted;
    }
}

std::vector<Algorithm> algorithms_for(Criterion::Kind criterion) {
    std::vector<Algorithm> out;
    for (const auto& [alg, name] : kAlgorithmNames)
        if (supports(alg, criterion)) out.push_back(alg);
    return out;
}

void BenchSpec::validate() const {
    if (grid.empty()) throw ValidationError("bench: empty grid");
    if (algorithms.empty()) throw ValidationError("bench: no algorithms selected");
    if (seeds.empty()) throw ValidationError("bench: no seeds");
    for (Algorithm a : algorithms)
        if (!supports(a, criterion.kind()))
            throw ValidationError("bench: algorithm " + std::string(to_string(a)) + " is not available for the " +
                                  std::string(criterion.name()) + " criterion");
    for (const GridPoint& g : grid) {
        GeneratorConfig c = generator;
        c.n_states = g.states;
        c.n_partitions = g.partitions;
        c.n_actions = g.actions;
        c.validate();
    }
}

BenchRecord run_algorithm(const MdpModel& model, Algorithm algorithm, const BenchSpec& spec) {
    BenchRecord rec;
    rec.algorithm = algorithm;
    rec.criterion = spec.criterion.kind();
    rec.actions = model.n_actions();
    rec.states = model.n_states();
    rec.partitions = model.layout().n_partitions();

    const Deadline deadline = Deadline::after(spec.time_budget_s);
    IterationOptions iter{spec.epsilon, spec.max_iter, 100, 1e-13, deadline};
    PolicyIterationOptions pi_opts;
    pi_opts.deadline = deadline;

    std::vector<double> v;
    Stopwatch clock;
    try {
        switch (algorithm) {
        case Algorithm::rvi: {
            auto res = relative_value_iteration(model, iter);
            rec.iterations = res.stats.iterations;
            rec.converged = res.stats.converged;
            rec.stop_reason = res.stats.stop_reason;
            rec.rho = res.rho;
            break;
        }
        case Algorithm::vi: {
            auto res = value_iteration(model, spec.criterion.gamma(), iter);
            rec.iterations = res.stats.iterations;
            rec.converged = res.stats.converged;
            rec.stop_reason = res.stats.stop_reason;
            v = std::move(res.v);
            break;
        }
        default: {
            Evaluator ev;
            switch (algorithm) {
            case Algorithm::mrpi_chiu_gth: ev = Evaluator::structured(IntraSolver::gth); break;
            case Algorithm::rpi_fp:
            case Algorithm::pi_fp: ev = Evaluator::fixed_point(spec.epsilon, spec.max_iter); break;
            case Algorithm::rpi_gj:
            case Algorithm::pi_gj: ev = Evaluator::direct(); break;
            default: ev = Evaluator::structured(IntraSolver::robb); break;
            }
            auto res = policy_iteration(model, spec.criterion, ev, pi_opts);
            rec.eval_time_s = res.stats.eval_time_s;
            rec.improve_time_s = res.stats.improve_time_s;
            rec.iterations = res.stats.iterations;
            rec.converged = res.stats.converged;
            rec.stop_reason = res.stats.stop_reason;
            rec.rho = res.evaluation.rho;
            v = std::move(res.evaluation.v);
            break;
        }
        }
    } catch (const BudgetExceeded&) {
        rec.stop_reason = StopReason::budget;
        rec.converged = false;
    } catch (const Error& e) {
        rec.error = e.what();
        rec.converged = false;
    }
    rec.wall_time_s = clock.seconds();
    if (!spec.criterion.is_average()) rec.rho.reset();
    if (!v.empty() && !spec.criterion.is_average()) {
        rec.v_min = *std::min_element(v.begin(), v.end());
        rec.v_max = *std::max_element(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v) sum += x;
        rec.v_mean = sum / static_cast<double>(v.size());
    }
    return rec;
}

std::vector<BenchRecord> run_bench(const BenchSpec& spec) {
    spec.validate();
    std::vector<BenchRecord> out;
    for (const GridPoint& g : spec.grid) {
        for (std::uint64_t seed : spec.seeds) {
            GeneratorConfig cfg = spec.generator;
            cfg.n_states = g.states;
            cfg.n_partitions = g.partitions;
            cfg.n_actions = g.actions;
            cfg.seed = seed;
            const MdpModel model = generate_sisdmdp(cfg);
            const std::size_t intra = instance_stats(model).total_intra_arcs;
            const std::size_t first = out.size();
            for (Algorithm a : spec.algorithms) {
                BenchRecord rec = run_algorithm(model, a, spec);
                rec.seed = seed;
                rec.total_intra_arcs = intra;
                out.push_back(std::move(rec));
            }
            BenchRecord* best = nullptr;
            for (std::size_t i = first; i < out.size(); ++i)
                if (out[i].converged && (!best || out[i].wall_time_s < best->wall_time_s)) best = &out[i];
            if (best) best->fastest = true;
        }
    }
    return out;
}

ReportFormat report_format_from_string(std::string_view token) {
    if (token == "csv") return ReportFormat::csv;
    if (token == "markdown" || token == "md") return ReportFormat::markdown;
    if (token == "json-lines" || token == "jsonl") return ReportFormat::json_lines;
    throw ValidationError("unsupported report format '" + std::string(token) + "'");
}

namespace {

std::string emit_csv(const std::vector<BenchRecord>& records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const BenchRecord& r : records) {
        out += std::string(to_string(r.algorithm)) + ',' +
               (r.criterion == Criterion::Kind::average ? "average" : "discounted") + ',' +
               std::to_string(r.actions) + ',' + std::to_string(r.states) + ',' + std::to_string(r.partitions) + ',' +
               std::to_string(r.seed) + ',' + format_double(r.wall_time_s) + ',' + std::to_string(r.iterations) +
               ',' + rho_cell(r) + ',' + (r.converged ? "true" : "false") + ',' +
               std::string(to_string(r.stop_reason)) + ',' + std::to_string(r.total_intra_arcs) + '\n';
    }
    return out;
}

std::string emit_markdown(const std::vector<BenchRecord>& records) {
    struct Column {
        std::size_t partitions;
        std::uint64_t seed;
        bool operator==(const Column&) const = default;
    };
    std::vector<std::pair<std::size_t, std::size_t>> groups; // (|A|, N)
    std::vector<std::uint64_t> seeds;
    for (const auto& r : records) {
        const std::pair g{r.actions, r.states};
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
        if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
    }
    const bool show_seed = seeds.size() > 1;

    std::string out;
    for (const auto& [actions, states] : groups) {
        auto in_group = [&](const BenchRecord& r) { return r.actions == actions && r.states == states; };
        std::vector<Column> cols;
        std::vector<Algorithm> algs;
        std::string criterion;
        for (const auto& r : records) {
            if (!in_group(r)) continue;
            const Column c{r.partitions, r.seed};
            if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
            if (std::find(algs.begin(), algs.end(), r.algorithm) == algs.end()) algs.push_back(r.algorithm);
            criterion = r.criterion == Criterion::Kind::average ? "average reward" : "discounted reward";
        }
        if (!out.empty()) out += '\n';
        out += "### |A| = " + std::to_string(actions) + ", N = " + std::to_string(states) + " (" + criterion +
               ")\n\n| Algorithm |";
        for (const Column& c : cols) {
            out += " K=" + std::to_string(c.partitions);
            if (show_seed) out += ", seed=" + std::to_string(c.seed);
            out += " |";
        }
        out += "\n|---|";
        for (std::size_t i = 0; i < cols.size(); ++i) out += "---:|";
        out += '\n';
        for (Algorithm a : algs) {
            std::string time_row = "| " + std::string(to_string(a)) + " time (s) |";
            std::string iter_row = "| iterations |";
            for (const Column& c : cols) {
                auto it = std::find_if(records.begin(), records.end(), [&](const BenchRecord& r) {
                    return in_group(r) && r.algorithm == a && r.partitions == c.partitions && r.seed == c.seed;
                });
                std::string t, n;
                if (it == records.end()) {
                    // algorithm not run for this column
                } else if (it->over_budget()) {
                    t = ">budget";
                    n = "-";
                } else if (!it->error.empty()) {
                    t = "failed";
                    n = "-";
                } else {
                    t = short_time(it->wall_time_s);
                    n = std::to_string(it->iterations);
                    if (!it->converged) n += " (" + std::string(to_string(it->stop_reason)) + ")";
                    if (it->fastest) {
                        t = "**" + t + "**";
                        n = "**" + n + "**";
                    }
                }
                time_row += " " + t + " |";
                iter_row += " " + n + " |";
            }
            out += time_row + '\n' + iter_row + '\n';
        }
    }
    return out;
}

std::string emit_json_lines(const std::vector<BenchRecord>& records) {
    std::string out;
    for (const BenchRecord& r : records) {
        nlohmann::ordered_json j;
        j["algorithm"] = to_string(r.algorithm);
        j["criterion"] = r.criterion == Criterion::Kind::average ? "average" : "discounted";
        j["actions"] = r.actions;
        j["states"] = r.states;
        j["partitions"] = r.partitions;
        j["seed"] = r.seed;
        j["time_s"] = r.wall_time_s;
        j["eval_time_s"] = r.eval_time_s;
        j["improve_time_s"] = r.improve_time_s;
        j["iterations"] = r.iterations;
        if (r.criterion == Criterion::Kind::average) {
            j["rho"] = r.rho && has_values(r) ? nlohmann::ordered_json(*r.rho) : nlohmann::ordered_json(nullptr);
        } else if (has_values(r)) {
            j["v_min"] = r.v_min;
            j["v_max"] = r.v_max;
            j["v_mean"] = r.v_mean;
        }
        j["converged"] = r.converged;
        j["stop_reason"] = to_string(r.stop_reason);
        j["total_intra_arcs"] = r.total_intra_arcs;
        j["fastest"] = r.fastest;
        if (!r.error.empty()) j["error"] = r.error;
        out += j.dump() + '\n';
    }
    return out;
}

} // namespace

std::string emit_report(const std::vector<BenchRecord>& records, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return emit_csv(records);
    case ReportFormat::markdown: return emit_markdown(records);
    case ReportFormat::json_lines: return emit_json_lines(records);
    }
    throw ValidationError("unsupported report format");
}

std::vector<BenchRecord> parse_csv_report(std::string_view text) {
    std::vector<BenchRecord> out;
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0] != kCsvHeader) throw ParseError("CSV report: unexpected header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = split(lines[i], ',');
        if (f.size() != 12) throw ParseError("CSV report: line " + std::to_string(i + 1) + " has the wrong field count");
        BenchRecord r;
        r.algorithm = algorithm_from_string(f[0]);
        if (f[1] == "average")
            r.criterion = Criterion::Kind::average;
        else if (f[1] == "discounted")
            r.criterion = Criterion::Kind::discounted;
        else
            throw ParseError("CSV report: unknown criterion");
        r.actions = parse_uint(f[2]);
        r.states = parse_uint(f[3]);
        r.partitions = parse_uint(f[4]);
        r.seed = parse_uint(f[5]);
        r.wall_time_s = parse_double(f[6]);
        r.iterations = parse_uint(f[7]);
        if (!f[8].empty()) {
            if (r.criterion == Criterion::Kind::average) {
                r.rho = parse_double(f[8]);
            } else {
                auto parts = split(f[8], ':');
                if (parts.size() != 3) throw ParseError("CSV report: malformed value summary");
                r.v_min = parse_double(parts[0]);
                r.v_max = parse_double(parts[1]);
                r.v_mean = parse_double(parts[2]);
            }
        }
        if (f[9] != "true" && f[9] != "false") throw ParseError("CSV report: malformed converged flag");
        r.converged = f[9] == "true";
        r.stop_reason = stop_reason_from_string(f[10]);
        r.total_intra_arcs = parse_uint(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

double CompareReport::worst_gap() const { return std::max({v_structured_vs_direct, pi_chiu_vs_gth, rho_gap}); }

std::string CompareReport::to_text() const {
    std::ostringstream os;
    if (!valid) {
        os << "validation failed; solvers not run\n" << validation_message;
        return os.str();
    }
    os.precision(3);
    os << std::scientific;
    os << "V structured vs direct (linf): " << v_structured_vs_direct << '\n'
       << "Pi chiu vs gth (linf):         " << pi_chiu_vs_gth << '\n'
       << "rho gap:                       " << rho_gap << '\n'
       << "Bellman residual structured:   " << residual_structured << '\n'
       << "Bellman residual direct:       " << residual_direct << '\n';
    return os.str();
}

CompareReport compare_solvers(const MdpModel& model, const Criterion& criterion, const Policy& policy_in) {
    CompareReport rep;
    std::ostringstream msg;
    rep.valid = true;
    for (std::size_t a = 0; a < model.n_actions(); ++a) {
        const StructureReport s = validate_structure(model.transitions(a), model.layout());
        if (!s.structure_ok()) {
            rep.valid = false;
            msg << "action " << a << ":\n" << s.summary();
        }
    }
    rep.validation_message = msg.str();
    if (!rep.valid) return rep;

    const Policy policy = policy_in.empty() ? Policy(model.n_states(), 0) : policy_in;
    const EvalResult structured = evaluate_policy(model, policy, criterion, Evaluator::structured());
    const EvalResult direct = evaluate_policy(model, policy, criterion, Evaluator::direct());
    for (std::size_t s = 0; s < structured.v.size(); ++s)
        rep.v_structured_vs_direct = std::max(rep.v_structured_vs_direct, std::abs(structured.v[s] - direct.v[s]));
    rep.residual_structured = structured.residual;
    rep.residual_direct = direct.residual;

    if (criterion.is_average()) {
        rep.rho_gap = std::abs(*structured.rho - *direct.rho);
        const SparseChain chain = induce_chain(model, policy);
        const Reordering re = canonical_reorder(chain, model.layout());
        const std::vector<double> pi_chiu = unpermute(chiu_average_reward(re.chain, re.layout).pi, re.permutation);
        const std::vector<double> pi_gth = gth_steady_state(to_dense(chain));
        for (std::size_t s = 0; s < pi_gth.size(); ++s)
            rep.pi_chiu_vs_gth = std::max(rep.pi_chiu_vs_gth, std::abs(pi_chiu[s] - pi_gth[s]));
    }
    return rep;
}

} // namespace sisdmdp
