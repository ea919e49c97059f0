#pragma once

// Unfair MTS on the ell-point uniform metric: the work-function based
// OddExponent algorithm, the Share expert-tracking algorithm, the unfair
// offline optimum and coupled sampling of realized states.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mtsim/core.hpp"
#include "mtsim/rng.hpp"

namespace mtsim::unfair {

using Distribution = std::vector<double>;

/// Uniform-metric instance whose optimum pays `r` per move.
struct UnfairUniformInstance {
  std::size_t ell = 2;
  double r = 1.0;
  std::vector<CostVector> costs;
  State initial_state = 0;
};

void validate(const UnfairUniformInstance& inst);

/// Throws ContractViolation unless entries are in [0,1] and sum to 1.
void validate_distribution(std::span<const double> p);

enum class Algorithm { kOddExponent, kShare };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Work functions

/// v(x): cheapest r-unfair cost of serving the prefix and ending at x.
/// w(i) = min_x v(x) + [i != x]: the same with an unscaled trailing move.
class WorkFunctionState {
 public:
  /// v = r * [x != start]
  static WorkFunctionState starting_at(std::size_t ell, double r, State start);
  /// v = 0 everywhere; the initial position is free.
  static WorkFunctionState free_start(std::size_t ell, double r);
  /// Uses `v` as given. It must be r-Lipschitz for updates to be exact.
  static WorkFunctionState from_values(std::vector<double> v, double r);

  std::size_t size() const noexcept { return v_.size(); }
  double r() const noexcept { return r_; }
  std::span<const double> v() const noexcept { return v_; }
  std::span<const double> w() const noexcept { return w_; }

  /// v'(x) = c(x) + min_y (v(y) + r [y != x]), then w is recomputed.
  void apply(std::span<const double> c);
  /// Same as apply() for a cost supported on one coordinate.
  void apply_single(State i, double amount);

 private:
  WorkFunctionState(std::vector<double> v, double r);
  void refresh_w();

  std::vector<double> v_;
  std::vector<double> w_;
  double r_ = 1.0;
};

WorkFunctionState work_function_update(const WorkFunctionState& s,
                                       std::span<const double> c);

// ---------------------------------------------------------------------------
// OddExponent

/// Nearest odd integer to ln(ell), at least 1.
int odd_exponent_for(std::size_t ell);

struct OddExponentState {
  WorkFunctionState wf;
  int a = 1;
  std::vector<bool> saturated;  // states holding zero probability mass
};

OddExponentState make_odd_exponent_state(std::size_t ell, double r,
                                         std::optional<State> start,
                                         std::optional<int> exponent = {});
/// Wraps an explicit work function; saturation is derived from the masses.
OddExponentState make_odd_exponent_state(WorkFunctionState wf, int a);

/// Unclamped 1/ell + 1/ell * sum_i (w(i) - w(j))^a for every j.
std::vector<double> odd_exponent_raw_masses(const WorkFunctionState& wf, int a);

/// Throws ContractViolation if a mass is below -1e-9.
Distribution odd_exponent_distribution(const OddExponentState& state);

struct ElementaryCost {
  State index = 0;
  double value = 0.0;
  CostVector as_vector(std::size_t ell) const;
};

struct SplitResult {
  std::vector<ElementaryCost> pieces;
  OddExponentState state;          // after applying every piece
  std::vector<State> truncated;    // coordinates cut short at zero mass
  std::vector<State> dropped;      // coordinates whose cost hit a saturated state
};

/// Decomposes `c` into single-coordinate costs in increasing index order
/// and applies them. Costs on saturated states are dropped; a cost that
/// would empty its state is truncated at the point where the mass reaches 0.
SplitResult split_elementary(const OddExponentState& state,
                             std::span<const double> c);

// ---------------------------------------------------------------------------
// Share

struct ShareState {
  std::vector<double> weights;
  double alpha = 0.0;
  double beta = 0.5;

  Distribution distribution() const;
};

ShareState make_share_state(std::size_t ell, double alpha, double beta);

/// w'(i) = w(i) beta^c(i) + alpha Delta / ell. Entries of c must be in [0,1].
ShareState share_update(const ShareState& state, std::span<const double> c);

struct ShareParams {
  double alpha = 0.0;
  double beta = 0.5;
  double gamma = 0.0;
};

ShareParams share_params(double r, std::size_t ell);

// ---------------------------------------------------------------------------
// Guarantees and parameter choice

/// 1 + 2e ln(ell) / r
double odd_exponent_ratio(std::size_t ell, double r);
/// 1 + 8/r (ln ell + ln(2r + 1))
double share_ratio(std::size_t ell, double r);

/// Smallest r whose unfair ratio is at most 1 + eps.
double unfair_rate_for_epsilon(double eps, std::size_t ell, Algorithm alg);

// ---------------------------------------------------------------------------
// Offline optimum

struct UnfairOptResult {
  double value = 0.0;
  std::vector<State> sequence;
  std::vector<double> prefix_values;  // optimum of the first t+1 steps
};

UnfairOptResult unfair_opt(const UnfairUniformInstance& inst);

// ---------------------------------------------------------------------------
// Realization

/// Total-variation coupling: keeps `current` with probability
/// min(prev, next)/prev at `current`, else draws from (next - prev)_+.
State sample_coupled_state(std::span<const double> prev, std::span<const double> next,
                           State current, Rng& rng);

/// Draws a state from `p`.
State sample_state(std::span<const double> p, Rng& rng);

// ---------------------------------------------------------------------------
// Runners with expected-cost accounting

/// A fractional uniform-MTS algorithm driven one cost vector at a time.
class Runner {
 public:
  virtual ~Runner() = default;

  virtual std::size_t size() const = 0;
  virtual const Distribution& distribution() const = 0;
  /// Processes one step's cost vector (splitting it as needed).
  virtual void feed(std::span<const double> c) = 0;
  /// Whether the distribution after feed() reacts to the cost just fed.
  virtual bool uses_lookahead() const = 0;
  virtual Algorithm kind() const = 0;

  double service_cost() const noexcept { return service_; }
  double movement_cost() const noexcept { return movement_; }
  double expected_cost() const noexcept { return service_ + movement_; }

 protected:
  double service_ = 0.0;
  double movement_ = 0.0;
};

class OddExponent final : public Runner {
 public:
  /// With `start` the algorithm begins at that state (and pays to spread
  /// its initial mass); without it the initial work function is flat.
  OddExponent(std::size_t ell, double r, std::optional<State> start = {},
              std::optional<int> exponent = {});

  std::size_t size() const override { return dist_.size(); }
  const Distribution& distribution() const override { return dist_; }
  void feed(std::span<const double> c) override;
  bool uses_lookahead() const override { return true; }
  Algorithm kind() const override { return Algorithm::kOddExponent; }

  const OddExponentState& state() const noexcept { return state_; }
  std::size_t truncated_count() const noexcept { return truncated_; }
  std::size_t dropped_count() const noexcept { return dropped_; }

 private:
  OddExponentState state_;
  Distribution dist_;
  std::size_t truncated_ = 0;
  std::size_t dropped_ = 0;
};

class Share final : public Runner {
 public:
  Share(std::size_t ell, double alpha, double beta, std::optional<State> start = {});
  static Share for_rate(std::size_t ell, double r, std::optional<State> start = {});

  std::size_t size() const override { return dist_.size(); }
  const Distribution& distribution() const override { return dist_; }
  /// Vectors with entries above 1 are cut into ceil(max) proportional slices.
  void feed(std::span<const double> c) override;
  bool uses_lookahead() const override { return false; }
  Algorithm kind() const override { return Algorithm::kShare; }

  const ShareState& state() const noexcept { return state_; }
  std::size_t slices_fed() const noexcept { return slices_; }

 private:
  ShareState state_;
  Distribution dist_;
  std::size_t slices_ = 0;
};

/// Expected cost of running the algorithm on an unfair instance, with the
/// running total after every step.
struct UnfairRunResult {
  double total = 0.0;
  std::vector<double> prefix_totals;
};

UnfairRunResult run_expected(Runner& runner, const UnfairUniformInstance& inst);

}  // namespace mtsim::unfair
