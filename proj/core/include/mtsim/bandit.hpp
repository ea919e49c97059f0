#pragma once

// Bandit-access predictor combination. Each step reveals the state and
// (capped) cost of a single queried predictor; exploration steps query a
// uniformly random predictor and feed an importance-scaled loss to Share.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtsim/core.hpp"
#include "mtsim/rng.hpp"
#include "mtsim/unfair.hpp"

namespace mtsim::bandit {

struct BanditConfig {
  double gamma = 1.0 / 6.0;  // exploration rate, 0 < gamma < 1/4
  double epsilon = 1.0;
  double r = 0.0;  // Share unfairness factor; 0 derives it from epsilon
  std::uint64_t seed = 0;
  /// false permits any gamma in [0, 1] (diagnostic runs with gamma = 0 or 1).
  bool strict_gamma = true;

  /// gamma = min(1, eps) / 6 and the matching Share rate.
  static BanditConfig for_epsilon(double eps, std::size_t ell);
  double resolved_r(std::size_t ell) const;
};

/// Validates 0 < gamma < 1/4 (or [0, 1] when `strict_gamma` is off).
void validate(const BanditConfig& cfg);

enum class StepType { kExploration, kExploitation };

struct Observation {
  PredictorId predictor = 0;
  State state = 0;
  double cost = 0.0;  // capped f_t(predictor)
};

struct QueryRecord {
  std::size_t t = 0;
  StepType type = StepType::kExploitation;
  std::vector<Observation> observations;
};

using QueryLog = std::vector<QueryRecord>;

/// One JSON object per line: t, type, queried, states, costs.
std::string query_log_to_jsonl(const QueryLog& log);

/// Answers (state, capped cost) queries and enforces a per-step budget.
class PredictorOracle {
 public:
  /// `inst` must be normalized; the capped table is built here.
  PredictorOracle(const MtsInstance& inst, std::vector<PredictorTrace> traces);

  std::size_t size() const noexcept { return traces_.size(); }
  std::size_t horizon() const noexcept { return capped_.values.size(); }

  /// Opens step t allowing `budget` queries.
  void begin_step(std::size_t t, std::size_t budget);
  /// Throws ContractViolation when the step's budget is exhausted.
  Observation query(PredictorId i);
  std::size_t queries_this_step() const noexcept { return used_; }

  const CappedCostTable& capped() const noexcept { return capped_; }

 private:
  std::vector<PredictorTrace> traces_;
  CappedCostTable capped_;
  std::size_t t_ = 0;
  std::size_t budget_ = 0;
  std::size_t used_ = 0;
};

/// argmin_x d(b, x) + c(x), lowest index on ties.
State greedy_state(const MetricSpace& metric, std::span<const double> c, State b);

/// fhat(i) = f / (2D), zero elsewhere. f must be in [0, 2D].
CostVector estimate_loss(PredictorId i, double f_observed, double diameter,
                         std::size_t ell);

struct BanditRun {
  Trajectory trajectory;
  QueryLog log;
  std::vector<bool> exploration;     // t in X
  std::vector<PredictorId> anchors;  // a_t, the subroutine's realized state
  std::size_t anchor_switches = 0;
  std::size_t detours = 0;  // exploitation steps served via a zero-cost state
};

/// BanditCombine with Share as the subroutine. `inst` must be normalized.
BanditRun bandit_combine_run(const MtsInstance& inst, PredictorOracle& oracle,
                             const BanditConfig& cfg, Rng& rng);

/// Variant that also queries a_t on exploration steps and moves to its
/// state instead of taking the greedy detour.
BanditRun bandit_combine_prime_run(const MtsInstance& inst, PredictorOracle& oracle,
                                   const BanditConfig& cfg, Rng& rng);

/// Normalizes the instance, runs BanditCombine (or the primed variant) on it
/// and returns the run with costs restated on the original instance.
BanditRun run_on_original(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                          const BanditConfig& cfg, Rng& rng, bool primed);

}  // namespace mtsim::bandit
