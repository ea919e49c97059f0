#pragma once

// Exact offline benchmarks by dynamic programming, plus an exhaustive
// enumeration oracle for small instances.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtsim/core.hpp"

namespace mtsim::benchmarks {

/// Predictor indices followed per step (0-based) and the number of index
/// changes between consecutive steps.
struct Schedule {
  std::vector<PredictorId> sigma;
  std::size_t switches = 0;
};

std::size_t count_switches(std::span<const PredictorId> sigma);

struct ScheduleResult {
  double value = 0.0;
  Schedule schedule;
};

struct OptResult {
  double value = 0.0;
  std::vector<State> states;
};

/// Best schedule that sits on some predicted state at every step, with
/// movement measured between consecutive chosen states.
/// Throws InfeasibleBenchmarkError if no schedule has finite cost.
ScheduleResult dyn(const MtsInstance& inst, std::span<const PredictorTrace> traces);

/// dyn restricted to at most m index changes.
ScheduleResult dyn_limited(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                           std::size_t m);

/// Staying on P_i costs f_t(P_i); a switch step costs rho + c_t(phi_it), or
/// rho + f_t(P_i) with `charge_full`.
ScheduleResult dyn_rho(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                       double rho, bool charge_full = false);

/// Unrestricted offline optimum over all states.
OptResult offline_opt(const MtsInstance& inst);

struct CouponStrategyResult {
  double cost = 0.0;
  Schedule schedule;
  std::vector<std::size_t> switch_steps;  // 0-based steps where the index changed
};

/// Belady-style strategy on a coupon instance (predictor i fixed at point i):
/// when the followed point is hit, move to the point hit furthest in the
/// future, until m switches are spent.
CouponStrategyResult coupon_offline_strategy(const MtsInstance& inst,
                                             std::span<const std::size_t> sigma,
                                             std::size_t m);

enum class Variant { kDyn, kDynLimited, kDynRho, kOpt };

struct OracleParams {
  std::size_t m = 0;
  double rho = 0.0;
  bool charge_full = false;
};

inline constexpr double kEnumerationLimit = 1e6;

/// Exhaustive enumeration of schedules (state sequences for kOpt).
/// Throws SizeError beyond kEnumerationLimit candidates. Returns kInfeasible
/// when nothing is feasible.
double brute_force_oracle(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                          Variant variant, const OracleParams& params = {});

struct BenchmarkReport {
  ScheduleResult dyn;
  std::vector<std::pair<std::size_t, ScheduleResult>> dyn_m;
  std::vector<std::pair<double, ScheduleResult>> dyn_rho;
  OptResult opt;
  std::optional<double> dyn_tilde;

  std::string to_json(const std::string& instance_id) const;
  /// Rows of instance_id,benchmark,param,value,argmin_switches; header first.
  std::string to_csv(const std::string& instance_id) const;
};

BenchmarkReport compute_report(const MtsInstance& inst,
                               std::span<const PredictorTrace> traces,
                               std::span<const std::size_t> ms,
                               std::span<const double> rhos);

}  // namespace mtsim::benchmarks
