#include "mtsim/unfair.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mtsim::unfair {

namespace {

// Masses at or below this are treated as zero.
constexpr double kMassEps = 1e-12;
constexpr double kNegativeMassTolerance = 1e-9;

double ipow(double x, int a) {
  double r = 1.0;
  for (int k = 0; k < a; ++k) r *= x;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<bool> saturation_from(const std::vector<double>& masses) {
  std::vector<bool> sat(masses.size());
  for (std::size_t j = 0; j < masses.size(); ++j) sat[j] = masses[j] <= kMassEps;
  return sat;
}

void normalize_in_place(std::vector<double>& p) {
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
}

}  // namespace

void validate(const UnfairUniformInstance& inst) {
  if (inst.ell < 2) throw StructuralError("unfair instance needs ell >= 2");
  if (!(inst.r > 0.0)) throw StructuralError("unfairness factor must be positive");
  if (inst.initial_state >= inst.ell) {
    throw StructuralError("initial state out of range");
  }
  for (const auto& c : inst.costs) {
    if (c.size() != inst.ell) throw StructuralError("cost vector length != ell");
    for (double x : c) {
      if (!std::isfinite(x) || x < 0.0) {
        throw StructuralError("unfair instance costs must be finite and >= 0");
      }
    }
  }
}

void validate_distribution(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (x < -kTolerance || x > 1.0 + kTolerance) {
      throw ContractViolation("probability " + std::to_string(x) +
                              " outside [0,1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw ContractViolation("distribution sums to " + std::to_string(sum));
  }
}

const char* to_string(Algorithm a) {
  return a == Algorithm::kOddExponent ? "oddexponent" : "share";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "oddexponent") return Algorithm::kOddExponent;
  if (name == "share") return Algorithm::kShare;
  throw StructuralError("unknown unfair algorithm \"" + name + "\"");
}

// ---------------------------------------------------------------------------

WorkFunctionState::WorkFunctionState(std::vector<double> v, double r)
    : v_(std::move(v)), w_(v_.size()), r_(r) {
  refresh_w();
}

WorkFunctionState WorkFunctionState::starting_at(std::size_t ell, double r,
                                                 State start) {
  if (start >= ell) throw StructuralError("start state out of range");
  std::vector<double> v(ell, r);
  v[start] = 0.0;
  return WorkFunctionState(std::move(v), r);
}

WorkFunctionState WorkFunctionState::free_start(std::size_t ell, double r) {
  return WorkFunctionState(std::vector<double>(ell, 0.0), r);
}

WorkFunctionState WorkFunctionState::from_values(std::vector<double> v, double r) {
  return WorkFunctionState(std::move(v), r);
}

void WorkFunctionState::refresh_w() {
  const double m = *std::min_element(v_.begin(), v_.end());
  for (std::size_t i = 0; i < v_.size(); ++i) w_[i] = std::min(v_[i], m + 1.0);
}

void WorkFunctionState::apply(std::span<const double> c) {
  const double m = *std::min_element(v_.begin(), v_.end());
  for (std::size_t x = 0; x < v_.size(); ++x) {
    v_[x] = c[x] + std::min(v_[x], m + r_);
  }
  refresh_w();
}

void WorkFunctionState::apply_single(State i, double amount) {
  const double m = *std::min_element(v_.begin(), v_.end());
  for (std::size_t x = 0; x < v_.size(); ++x) v_[x] = std::min(v_[x], m + r_);
  v_[i] += amount;
  refresh_w();
}

WorkFunctionState work_function_update(const WorkFunctionState& s,
                                       std::span<const double> c) {
  if (c.size() != s.size()) throw StructuralError("cost vector length != ell");
  WorkFunctionState out = s;
  out.apply(c);
  return out;
}

// ---------------------------------------------------------------------------

int odd_exponent_for(std::size_t ell) {
  const double x = std::log(static_cast<double>(ell));
  const int a = 2 * static_cast<int>(std::lround((x - 1.0) / 2.0)) + 1;
  return std::max(a, 1);
}

OddExponentState make_odd_exponent_state(WorkFunctionState wf, int a) {
  if (a < 1 || a % 2 == 0) throw StructuralError("exponent must be odd and >= 1");
  auto masses = odd_exponent_raw_masses(wf, a);
  return OddExponentState{std::move(wf), a, saturation_from(masses)};
}

OddExponentState make_odd_exponent_state(std::size_t ell, double r,
                                         std::optional<State> start,
                                         std::optional<int> exponent) {
  auto wf = start ? WorkFunctionState::starting_at(ell, r, *start)
                  : WorkFunctionState::free_start(ell, r);
  return make_odd_exponent_state(std::move(wf), exponent.value_or(odd_exponent_for(ell)));
}

std::vector<double> odd_exponent_raw_masses(const WorkFunctionState& wf, int a) {
  // sum_i (g_i - g_j)^a expanded through the power sums of the gaps
  // g = w - min(w), which stay in [0, 1].
  const std::size_t ell = wf.size();
  const auto w = wf.w();
  const double lo = *std::min_element(w.begin(), w.end());
  std::vector<double> power_sums(static_cast<std::size_t>(a) + 1, 0.0);
  for (double wi : w) {
    const double g = wi - lo;
    double pk = 1.0;
    for (int k = 0; k <= a; ++k) {
      power_sums[static_cast<std::size_t>(k)] += pk;
      pk *= g;
    }
  }
  const double inv = 1.0 / static_cast<double>(ell);
  std::vector<double> out(ell);
  for (std::size_t j = 0; j < ell; ++j) {
    const double neg = -(w[j] - lo);
    double acc = 0.0;
    for (int k = 0; k <= a; ++k) {
      acc += binomial(a, k) * power_sums[static_cast<std::size_t>(k)] * ipow(neg, a - k);
    }
    out[j] = inv + inv * acc;
  }
  return out;
}

Distribution odd_exponent_distribution(const OddExponentState& state) {
  auto p = odd_exponent_raw_masses(state.wf, state.a);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < -kNegativeMassTolerance) {
      throw ContractViolation("OddExponent mass of state " + std::to_string(j) +
                              " is " + std::to_string(p[j]) +
                              "; cost splitting precondition broken");
    }
    if (state.saturated[j] || p[j] < 0.0) p[j] = 0.0;
  }
  normalize_in_place(p);
  return p;
}

CostVector ElementaryCost::as_vector(std::size_t ell) const {
  CostVector c(ell, 0.0);
  c[index] = value;
  return c;
}

namespace {

enum class PieceOutcome { kNone, kApplied, kTruncated, kDropped };

struct Piece {
  PieceOutcome outcome = PieceOutcome::kNone;
  double emitted = 0.0;
};

double mass_after(const OddExponentState& state, State i, double amount) {
  WorkFunctionState trial = state.wf;
  trial.apply_single(i, amount);
  return odd_exponent_raw_masses(trial, state.a)[i];
}

// Applies `amount` on coordinate i, honoring saturation.
Piece apply_coordinate(OddExponentState& state, State i, double amount) {
  if (!(amount > 0.0)) return {};
  if (state.saturated[i]) return {PieceOutcome::kDropped, 0.0};

  Piece piece{PieceOutcome::kApplied, amount};
  if (mass_after(state, i, amount) <= kMassEps) {
    // Smallest amount that empties state i. The mass of i is
    // non-increasing in the amount charged to it.
    double lo = 0.0;
    double hi = amount;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mass_after(state, i, mid) <= kMassEps) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    piece = {PieceOutcome::kTruncated, hi};
  }
  state.wf.apply_single(i, piece.emitted);
  state.saturated = saturation_from(odd_exponent_raw_masses(state.wf, state.a));
  if (piece.outcome == PieceOutcome::kTruncated) state.saturated[i] = true;
  return piece;
}

}  // namespace

SplitResult split_elementary(const OddExponentState& state,
                             std::span<const double> c) {
  if (c.size() != state.wf.size()) throw StructuralError("cost vector length != ell");
  SplitResult out{{}, state, {}, {}};
  for (State i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || c[i] < 0.0) {
      throw ContractViolation("split_elementary needs finite non-negative costs");
    }
    const Piece piece = apply_coordinate(out.state, i, c[i]);
    switch (piece.outcome) {
      case PieceOutcome::kNone:
        break;
      case PieceOutcome::kDropped:
        out.dropped.push_back(i);
        break;
      case PieceOutcome::kTruncated:
        out.truncated.push_back(i);
        [[fallthrough]];
      case PieceOutcome::kApplied:
        if (piece.emitted > 0.0) out.pieces.push_back({i, piece.emitted});
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Distribution ShareState::distribution() const {
  Distribution p = weights;
  normalize_in_place(p);
  return p;
}

ShareState make_share_state(std::size_t ell, double alpha, double beta) {
  if (ell < 1) throw StructuralError("Share needs at least one state");
  if (alpha < 0.0 || alpha > 0.5) throw StructuralError("alpha must be in [0, 1/2]");
  if (beta < 0.0 || beta > 1.0) throw StructuralError("beta must be in [0, 1]");
  return ShareState{std::vector<double>(ell, 1.0), alpha, beta};
}

ShareState share_update(const ShareState& state, std::span<const double> c) {
  const std::size_t ell = state.weights.size();
  if (c.size() != ell) throw StructuralError("cost vector length != ell");
  for (double x : c) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ContractViolation("Share cost entry " + std::to_string(x) +
                              " outside [0,1]; split the cost first");
    }
  }
  ShareState out = state;
  double delta = 0.0;
  for (std::size_t i = 0; i < ell; ++i) {
    const double kept = state.weights[i] * std::pow(state.beta, c[i]);
    delta += state.weights[i] - kept;
    out.weights[i] = kept;
  }
  const double shared = state.alpha * delta / static_cast<double>(ell);
  for (double& w : out.weights) w += shared;
  return out;
}

ShareParams share_params(double r, std::size_t ell) {
  if (!(r > 0.0) || ell < 2) throw StructuralError("share_params needs r > 0, ell >= 2");
  ShareParams p;
  p.alpha = 1.0 / (2.0 * r + 1.0);
  p.gamma = std::log(static_cast<double>(ell) / p.alpha) / r;
  p.beta = std::max(0.5, 1.0 - p.gamma);
  return p;
}

// ---------------------------------------------------------------------------

double odd_exponent_ratio(std::size_t ell, double r) {
  return 1.0 + 2.0 * std::numbers::e * std::log(static_cast<double>(ell)) / r;
}

double share_ratio(std::size_t ell, double r) {
  return 1.0 + 8.0 / r * (std::log(static_cast<double>(ell)) + std::log(2.0 * r + 1.0));
}

double unfair_rate_for_epsilon(double eps, std::size_t ell, Algorithm alg) {
  if (!(eps > 0.0) || ell < 2) {
    throw StructuralError("unfair_rate_for_epsilon needs eps > 0, ell >= 2");
  }
  if (alg == Algorithm::kOddExponent) {
    return 2.0 * std::numbers::e * std::log(static_cast<double>(ell)) / eps;
  }
  // share_ratio(ell, r) - 1 is decreasing in r.
  auto excess = [&](double r) { return share_ratio(ell, r) - 1.0; };
  double hi = 1.0;
  while (excess(hi) > eps) hi *= 2.0;
  double lo = hi / 2.0;
  while (excess(lo) <= eps && lo > 1e-300) lo /= 2.0;
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) <= eps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------

UnfairOptResult unfair_opt(const UnfairUniformInstance& inst) {
  validate(inst);
  const std::size_t ell = inst.ell;
  const std::size_t horizon = inst.costs.size();
  UnfairOptResult out;
  if (horizon == 0) return out;

  std::vector<double> value(ell, kInfeasible);
  value[inst.initial_state] = 0.0;
  std::vector<std::vector<State>> parent(horizon, std::vector<State>(ell));
  std::vector<double> next(ell);
  out.prefix_values.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (State y = 0; y < ell; ++y) {
      double best = kInfeasible;
      State arg = 0;
      for (State z = 0; z < ell; ++z) {
        const double cand = value[z] + (z == y ? 0.0 : inst.r);
        if (cand < best) {
          best = cand;
          arg = z;
        }
      }
      next[y] = inst.costs[t][y] + best;
      parent[t][y] = arg;
    }
    value.swap(next);
    out.prefix_values.push_back(*std::min_element(value.begin(), value.end()));
  }
  State end = static_cast<State>(
      std::min_element(value.begin(), value.end()) - value.begin());
  out.value = value[end];
  out.sequence.assign(horizon, 0);
  for (std::size_t t = horizon; t-- > 0;) {
    out.sequence[t] = end;
    end = parent[t][end];
  }
  return out;
}

// ---------------------------------------------------------------------------

State sample_state(std::span<const double> p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  State last_positive = 0;
  for (State i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last_positive;
}

State sample_coupled_state(std::span<const double> prev, std::span<const double> next,
                           State current, Rng& rng) {
  if (prev.size() != next.size() || current >= prev.size()) {
    throw StructuralError("coupled sampling: size mismatch");
  }
  if (!(prev[current] > 0.0)) {
    throw ContractViolation("coupled sampling: current state has zero probability");
  }
  const double stay = std::min(next[current], prev[current]) / prev[current];
  if (uniform01(rng) < stay) return current;

  double total = 0.0;
  for (State i = 0; i < prev.size(); ++i) total += std::max(0.0, next[i] - prev[i]);
  if (!(total > 0.0)) return current;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  State last_positive = current;
  for (State i = 0; i < prev.size(); ++i) {
    const double gain = std::max(0.0, next[i] - prev[i]);
    if (gain <= 0.0) continue;
    last_positive = i;
    acc += gain;
    if (u < acc) return i;
  }
  return last_positive;
}

// ---------------------------------------------------------------------------

OddExponent::OddExponent(std::size_t ell, double r, std::optional<State> start,
                         std::optional<int> exponent)
    : state_(make_odd_exponent_state(ell, r, start, exponent)),
      dist_(odd_exponent_distribution(state_)) {
  if (start) movement_ = 1.0 - dist_[*start];
}

void OddExponent::feed(std::span<const double> c) {
  if (c.size() != dist_.size()) throw StructuralError("cost vector length != ell");
  for (State i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || c[i] < 0.0) {
      throw ContractViolation("OddExponent needs finite non-negative costs");
    }
    const Piece piece = apply_coordinate(state_, i, c[i]);
    if (piece.outcome == PieceOutcome::kDropped) ++dropped_;
    if (piece.outcome == PieceOutcome::kTruncated) ++truncated_;
    if (piece.outcome == PieceOutcome::kApplied ||
        piece.outcome == PieceOutcome::kTruncated) {
      Distribution next = odd_exponent_distribution(state_);
      movement_ += earth_movers_uniform(dist_, next);
      service_ += next[i] * piece.emitted;
      dist_ = std::move(next);
    }
  }
}

Share::Share(std::size_t ell, double alpha, double beta, std::optional<State> start)
    : state_(make_share_state(ell, alpha, beta)), dist_(state_.distribution()) {
  if (start) movement_ = 1.0 - dist_[*start];
}

Share Share::for_rate(std::size_t ell, double r, std::optional<State> start) {
  const ShareParams p = share_params(r, ell);
  return Share(ell, p.alpha, p.beta, start);
}

void Share::feed(std::span<const double> c) {
  if (c.size() != dist_.size()) throw StructuralError("cost vector length != ell");
  double peak = 0.0;
  for (double x : c) {
    if (!std::isfinite(x) || x < 0.0) {
      throw ContractViolation("Share needs finite non-negative costs");
    }
    peak = std::max(peak, x);
  }
  if (peak <= 0.0) return;
  const auto slices = static_cast<std::size_t>(std::max(1.0, std::ceil(peak - 1e-12)));
  CostVector slice(c.begin(), c.end());
  for (double& x : slice) x = std::min(1.0, x / static_cast<double>(slices));
  for (std::size_t s = 0; s < slices; ++s) {
    for (std::size_t i = 0; i < slice.size(); ++i) service_ += dist_[i] * slice[i];
    state_ = share_update(state_, slice);
    // The update is homogeneous in the weights; rescaling avoids underflow.
    double sum = 0.0;
    for (double w : state_.weights) sum += w;
    for (double& w : state_.weights) w /= sum;
    Distribution next = state_.distribution();
    movement_ += earth_movers_uniform(dist_, next);
    dist_ = std::move(next);
    ++slices_;
  }
}

UnfairRunResult run_expected(Runner& runner, const UnfairUniformInstance& inst) {
  validate(inst);
  if (runner.size() != inst.ell) throw StructuralError("runner size != ell");
  UnfairRunResult out;
  out.prefix_totals.reserve(inst.costs.size());
  for (const auto& c : inst.costs) {
    runner.feed(c);
    out.prefix_totals.push_back(runner.expected_cost());
  }
  out.total = runner.expected_cost();
  return out;
}

}  // namespace mtsim::unfair
