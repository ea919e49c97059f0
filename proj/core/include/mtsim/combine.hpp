#pragma once

// Full-access predictor combination: the predictors' per-step costs define
// a uniform-metric MTS on ell states, an unfair-MTS algorithm runs on it,
// and its realized state says which predictor to follow.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mtsim/core.hpp"
#include "mtsim/rng.hpp"
#include "mtsim/unfair.hpp"

namespace mtsim::combine {

enum class Wiring {
  kLookahead,  // subroutine sees c_t^U before i_t is drawn
  kNoLookahead  // i_t is drawn from the distribution before c_t^U
};

struct CombineConfig {
  double epsilon = 1.0;
  unfair::Algorithm subroutine = unfair::Algorithm::kOddExponent;
  /// Unfairness factor handed to the subroutine; 0 derives it from epsilon.
  double r = 0.0;
  /// Unset: lookahead for OddExponent, no lookahead for Share.
  std::optional<Wiring> wiring;
  std::uint64_t seed = 0;

  double resolved_r(std::size_t ell) const;
  Wiring resolved_wiring() const;
};

/// c_t^U(i) = f_t(P_i) / D. Throws InfeasiblePredictorError.
std::vector<CostVector> build_uniform_costs(const MtsInstance& inst,
                                            std::span<const PredictorTrace> traces);

std::unique_ptr<unfair::Runner> make_subroutine(unfair::Algorithm alg,
                                                std::size_t ell, double r);

struct CombineRun {
  Trajectory trajectory;
  std::vector<PredictorId> follow;  // i_t per step
  std::size_t switches = 0;         // steps with i_t != i_{t-1}
  double r = 0.0;
  double subroutine_expected_cost = 0.0;  // in units of D
  std::size_t truncated_pieces = 0;
  std::size_t dropped_pieces = 0;
  std::vector<std::uint64_t> state_digests;  // one per step, for golden tests
};

/// Online run. At step t the subroutine has been fed c_1^U..c_t^U (lookahead
/// wiring) or c_1^U..c_{t-1}^U, and i_t is drawn by coupled sampling from
/// its previous realized state.
CombineRun combine_run(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                       const CombineConfig& cfg, Rng& rng);

/// floor(eps^2 * dyn / (4 D e ln ell))
std::size_t switch_budget(double eps, double diameter, std::size_t ell,
                          double dyn_value);

/// Combines two full state sequences (e.g. a Combine output and a classical
/// online algorithm) with ell = 2.
CombineRun robustify(const MtsInstance& inst, const PredictorTrace& trace_a,
                     const PredictorTrace& trace_b, const CombineConfig& cfg,
                     Rng& rng);

std::size_t count_switches(std::span<const PredictorId> follow);

}  // namespace mtsim::combine
