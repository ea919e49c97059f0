#pragma once

// Finite metric spaces, MTS instances, predictor traces and exact cost
// accounting shared by the rest of the library.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mtsim/errors.hpp"

namespace mtsim {

using State = std::size_t;
using PredictorId = std::size_t;

/// Sentinel for a state that cannot serve a task. IEEE infinity gives the
/// required arithmetic: INFEASIBLE + x = INFEASIBLE, min(INFEASIBLE, x) = x.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Absolute tolerance for every equality between accumulated costs.
inline constexpr double kTolerance = 1e-9;

inline bool is_infeasible(double c) { return c == kInfeasible; }

using CostVector = std::vector<double>;

struct MetricViolation {
  enum class Kind { kNegative, kDiagonal, kSymmetry, kTriangle };
  Kind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;  // intermediate point, triangle violations only
  std::string description;
};

/// Checks a raw distance matrix. Throws StructuralError when it is not
/// square or does not match `point_count`.
std::vector<MetricViolation> validate_metric(
    const std::vector<std::vector<double>>& dist, std::size_t point_count);

class MetricSpace {
 public:
  MetricSpace() = default;
  /// Throws StructuralError if the matrix is malformed or violates a metric
  /// axiom beyond kTolerance.
  MetricSpace(std::vector<std::string> points,
              const std::vector<std::vector<double>>& dist);
  /// Points are named "0", "1", ...
  explicit MetricSpace(const std::vector<std::vector<double>>& dist);

  static MetricSpace uniform(std::size_t n);
  /// Points on the real line at the given coordinates.
  static MetricSpace line(std::span<const double> coordinates);

  std::size_t size() const noexcept { return names_.size(); }
  double operator()(State a, State b) const noexcept {
    return dist_[a * names_.size() + b];
  }
  double diameter() const noexcept { return diameter_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::vector<std::vector<double>> matrix() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> dist_;
  double diameter_ = 0.0;
};

struct MtsInstance {
  MetricSpace metric;
  State initial_state = 0;
  std::vector<CostVector> costs;

  std::size_t horizon() const noexcept { return costs.size(); }
};

/// Enforces the instance invariants: T >= 1, valid initial state, cost
/// vectors of the right length with non-negative entries and at least one
/// finite entry each. Throws StructuralError.
void validate_instance(const MtsInstance& inst);

struct PredictorTrace {
  std::vector<State> states;  // states[t] is the suggestion for step t+1
};

/// Throws StructuralError if the trace has the wrong length or an invalid
/// state. Traces on INFEASIBLE states are accepted.
void validate_trace(const MtsInstance& inst, const PredictorTrace& trace);

struct StepCost {
  double movement = 0.0;
  double service = 0.0;
  double total() const noexcept { return movement + service; }
};

/// A realized run. `states[t]` is where step t was served; `end_states[t]`
/// is where the algorithm rests afterwards (they differ only for detours,
/// whose return leg is included in `steps[t].movement`).
struct Trajectory {
  std::vector<State> states;
  std::vector<State> end_states;
  std::vector<StepCost> steps;
  double total = 0.0;
};

/// Exact cost of a state sequence starting from the instance's initial
/// state. Throws InfeasibleTrajectoryError at the first INFEASIBLE visit.
Trajectory trajectory_cost(const MtsInstance& inst, std::span<const State> states);

/// f_t(P_i) for 0-based step t: movement from the previous suggestion
/// (the initial state at t = 0) plus service at the current one.
/// Throws InfeasiblePredictorError when the suggestion is INFEASIBLE.
double predictor_step_cost(const MtsInstance& inst, const PredictorTrace& trace,
                           std::size_t t);

/// As predictor_step_cost but returns kInfeasible instead of throwing.
double predictor_step_cost_or_infeasible(const MtsInstance& inst,
                                         const PredictorTrace& trace,
                                         std::size_t t);

/// Sum of predictor_step_cost over all steps (kInfeasible if any is).
double predictor_total_cost(const MtsInstance& inst, const PredictorTrace& trace);

struct NormalizedInstance {
  MtsInstance instance;
  std::vector<double> offsets;
  double total_offset() const;
};

/// Subtracts the minimum finite entry of every cost vector.
NormalizedInstance normalize_costs(const MtsInstance& inst);

struct CappedCostTable {
  std::vector<std::vector<double>> values;  // [t][i] = min(f_t(i), 2D)
  std::vector<std::vector<bool>> capped;    // [t][i] = cap fired
  double cap = 0.0;

  std::size_t capped_count() const;
};

CappedCostTable cap_predictor_costs(const MtsInstance& inst,
                                    std::span<const PredictorTrace> traces);

/// Caps an arbitrary [t][i] table at `cap`; cap_predictor_costs is this
/// applied to the raw f table with cap = 2D.
CappedCostTable cap_cost_table(std::vector<std::vector<double>> raw, double cap);

/// Earth mover's distance on the uniform metric (total variation).
double earth_movers_uniform(std::span<const double> p, std::span<const double> q);

}  // namespace mtsim
