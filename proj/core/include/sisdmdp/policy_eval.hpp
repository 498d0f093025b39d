#pragma once

#include "sisdmdp/dense.hpp"
#include "sisdmdp/model.hpp"
#include "sisdmdp/steady_state.hpp"
#include "sisdmdp/timing.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sisdmdp {

/// Average reward, or discounted reward with factor gamma in [0, 1).
class Criterion {
public:
    enum class Kind { average, discounted };

    static Criterion average() { return Criterion(Kind::average, 1.0); }
    static Criterion discounted(double gamma);

    Kind kind() const { return kind_; }
    bool is_average() const { return kind_ == Kind::average; }
    double gamma() const { return gamma_; }
    /// Weight of the successor term in the Bellman operator: 1 or gamma.
    double lambda() const { return gamma_; }
    std::string_view name() const { return is_average() ? "average" : "discounted"; }

    friend bool operator==(const Criterion&, const Criterion&) = default;

private:
    Criterion(Kind k, double g) : kind_(k), gamma_(g) {}
    Kind kind_;
    double gamma_;
};

enum class StopReason { none, policy_fixed, span, linf, max_iter, stagnation, budget };

std::string_view to_string(StopReason r);
StopReason stop_reason_from_string(std::string_view s);

/// Each state's value written as an affine function of the K superstate
/// values: V(s_i) = M_i . V_sup + b_i. Row 0 belongs to the partition root.
struct LocalSystem {
    std::size_t partition = 0;
    std::size_t n_rows = 0;
    std::size_t n_superstates = 0;
    std::vector<double> m; ///< n_rows x n_superstates, row-major
    std::vector<double> b;

    std::span<const double> row(std::size_t i) const {
        return {m.data() + i * n_superstates, n_superstates};
    }
};

struct SuperstateSystem {
    DenseMatrix m;
    std::vector<double> b;
};

struct EvalResult {
    std::vector<double> v;
    std::optional<double> rho;
    /// max_s |V(s) - (r(s) - rho + lambda * sum_t P(s,t) V(t))|
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
    StopReason stop_reason = StopReason::none;
};

/// Bottom-up substitution over one partition.
///
/// States are processed from the highest local index down to the root, so
/// every intra-partition successor already has its row. Arcs to any root,
/// including the partition's own, go straight into M; arcs to other
/// non-root states of the partition are substituted; self-loops are divided
/// out through d(s) = 1 - P(s,s). For the discounted criterion `chain` must
/// already be scaled by gamma, and `rho` must be empty.
LocalSystem build_local_system(const SparseChain& chain, const PartitionLayout& layout, std::size_t r,
                               const Criterion& criterion, std::optional<double> rho,
                               OpCounter* ops = nullptr);

SuperstateSystem extract_global_system(std::span<const LocalSystem> locals);

/// Solves (I - M_sup) V_sup = b_sup. Under the average criterion the first
/// equation is replaced by V_sup[0] = 0 and, after solving, the dropped
/// equation's residual must stay within 1e-8; a larger residual means rho
/// and the value system disagree.
std::vector<double> solve_superstate_system(const SuperstateSystem& sys, const Criterion& criterion);

/// Rebuilds all N values from the superstate values. Roots take V_sup
/// directly; the other states use their local row.
std::vector<double> inject_values(std::span<const LocalSystem> locals, std::span<const double> v_sup);

struct StructuredOptions {
    IntraSolver intra_solver = IntraSolver::robb;
    Deadline deadline;
};

/// Exact evaluation through the partition structure. Requires canonical
/// order (see canonical_reorder).
EvalResult evaluate_policy_structured(const SparseChain& chain, const PartitionLayout& layout,
                                      const Criterion& criterion, const StructuredOptions& options = {});

struct BaselineMethod {
    enum class Kind { direct, fixed_point };
    Kind kind = Kind::direct;
    double epsilon = 1e-15;
    std::size_t max_iter = 100000;
    /// Stop when the best stopping metric has improved by less than
    /// `stagnation_threshold` over the last `stagnation_window` sweeps (0 disables).
    std::size_t stagnation_window = 100;
    double stagnation_threshold = 1e-13;

    static BaselineMethod direct() { return {}; }
    static BaselineMethod fixed_point(double eps, std::size_t max_iter = 100000) {
        BaselineMethod m;
        m.kind = Kind::fixed_point;
        m.epsilon = eps;
        m.max_iter = max_iter;
        return m;
    }
};

/// Classical evaluators over the full state space. The direct method solves
/// all N unknowns by Gauss-Jordan elimination (with rho replacing V(0) for
/// the average criterion). The fixed-point method iterates the Bellman
/// operator; its average variant takes rho from `chiu_average_reward` and
/// re-anchors V(0) = 0 after every sweep.
EvalResult evaluate_policy_baseline(const SparseChain& chain, const PartitionLayout& layout,
                                    const Criterion& criterion, const BaselineMethod& method,
                                    const Deadline& deadline = {});

double bellman_residual(const SparseChain& chain, const Criterion& criterion, std::span<const double> v,
                        std::optional<double> rho);

/// Tracks the best (smallest) value of a stopping metric and reports when it
/// has not improved by at least `threshold` over the last `window` updates.
class StagnationMonitor {
public:
    StagnationMonitor(std::size_t window, double threshold) : window_(window), threshold_(threshold) {}
    /// Returns true once stagnation is detected.
    bool update(double metric);
    double best() const { return best_.empty() ? 0.0 : best_.back(); }

private:
    std::size_t window_;
    double threshold_;
    std::vector<double> best_;
};

} // namespace sisdmdp
