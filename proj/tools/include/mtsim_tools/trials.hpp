#pragma once

// Repeated seeded runs of one algorithm over a set of instances, with the
// offline benchmarks each run is compared against, and their CSV form.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtsim/io.hpp"
#include "mtsim/unfair.hpp"

namespace mtsim::tools {

enum class AlgoKind { kCombine, kBandit, kBanditPrime };

const char* to_string(AlgoKind a);
AlgoKind algo_from_string(const std::string& name);

struct AlgoSpec {
  AlgoKind algo = AlgoKind::kCombine;
  unfair::Algorithm subroutine = unfair::Algorithm::kOddExponent;
  double epsilon = 1.0;
  std::optional<double> gamma;  // bandit only; default min(1, eps) / 6

  /// Unfairness factor used for ell predictors.
  double rate(std::size_t ell) const;
  /// "key=value" pairs joined by ';' (no commas, safe in a CSV cell).
  std::string params_string() const;
};

struct BenchSpec {
  std::optional<std::size_t> m;  // default: switch_budget(eps, D, ell, dyn)
  std::optional<double> rho;     // default: 2 D r
};

struct InstanceBenchmarks {
  double dyn = 0.0;
  double dyn_m = 0.0;
  std::size_t m = 0;
  double dyn_rho = 0.0;
  double rho = 0.0;
  double opt = 0.0;
};

InstanceBenchmarks compute_benchmarks(const InstanceBundle& bundle, const AlgoSpec& spec,
                                      const BenchSpec& bench);

struct RunOutcome {
  double cost = 0.0;
  std::size_t switches = 0;
};

/// One seeded run. INFEASIBLE entries are replaced by the finite penalty
/// before the algorithm sees the instance.
RunOutcome run_once(const InstanceBundle& bundle, const AlgoSpec& spec, std::uint64_t seed);

struct NamedInstance {
  std::string id;
  InstanceBundle bundle;
};

struct TrialRecord {
  std::string instance_id;
  std::string algo;
  std::string params;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  RunOutcome outcome;
  InstanceBenchmarks bench;
};

/// Rows sorted by (instance_id, trial) whatever the thread count.
std::vector<TrialRecord> run_trials(const std::vector<NamedInstance>& instances,
                                    const AlgoSpec& spec, const BenchSpec& bench,
                                    std::size_t trials, std::uint64_t master_seed,
                                    std::size_t threads = 1);

inline constexpr const char* kCsvVersionLine = "# mtsim-trials v1";

/// Version comment, header row and one row per record. Numbers carry 12
/// significant digits; a ratio is empty when its denominator is 0.
std::string trials_to_csv(const std::vector<TrialRecord>& records);

}  // namespace mtsim::tools
