#include "mtsim/combine.hpp"

#include <cmath>
#include <numbers>

namespace mtsim::combine {

namespace {

std::uint64_t digest(std::span<const double> p) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (double x : p) {
    // Rounded so that last-bit noise does not change golden digests.
    const auto q = static_cast<std::int64_t>(std::llround(x * 1e9));
    h = splitmix64(h ^ static_cast<std::uint64_t>(q));
  }
  return h;
}

}  // namespace

double CombineConfig::resolved_r(std::size_t ell) const {
  if (r > 0.0) return r;
  if (ell < 2) return 1.0;
  return unfair::unfair_rate_for_epsilon(epsilon, ell, subroutine);
}

Wiring CombineConfig::resolved_wiring() const {
  if (wiring) return *wiring;
  return subroutine == unfair::Algorithm::kOddExponent ? Wiring::kLookahead
                                                       : Wiring::kNoLookahead;
}

std::vector<CostVector> build_uniform_costs(const MtsInstance& inst,
                                            std::span<const PredictorTrace> traces) {
  const double diameter = inst.metric.diameter();
  if (traces.empty()) throw StructuralError("need at least one predictor");
  if (!(diameter > 0.0)) throw StructuralError("metric diameter must be positive");
  std::vector<CostVector> out(inst.horizon(), CostVector(traces.size()));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    validate_trace(inst, traces[i]);
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      const double f = predictor_step_cost_or_infeasible(inst, traces[i], t);
      if (is_infeasible(f)) {
        throw InfeasiblePredictorError(
            i, t, "predictor " + std::to_string(i) + " is on an INFEASIBLE state at step " +
                      std::to_string(t));
      }
      out[t][i] = f / diameter;
    }
  }
  return out;
}

std::unique_ptr<unfair::Runner> make_subroutine(unfair::Algorithm alg,
                                                std::size_t ell, double r) {
  if (alg == unfair::Algorithm::kOddExponent) {
    return std::make_unique<unfair::OddExponent>(ell, r);
  }
  return std::make_unique<unfair::Share>(unfair::Share::for_rate(ell, r));
}

std::size_t count_switches(std::span<const PredictorId> follow) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < follow.size(); ++t) n += follow[t] != follow[t - 1];
  return n;
}

CombineRun combine_run(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                       const CombineConfig& cfg, Rng& rng) {
  const auto uniform_costs = build_uniform_costs(inst, traces);
  const std::size_t ell = traces.size();
  const std::size_t horizon = inst.horizon();

  CombineRun out;
  out.r = cfg.resolved_r(ell);
  out.follow.reserve(horizon);
  std::vector<State> states;
  states.reserve(horizon);

  if (ell == 1) {
    out.follow.assign(horizon, 0);
    out.trajectory = trajectory_cost(inst, traces[0].states);
    return out;
  }

  const Wiring wiring = cfg.resolved_wiring();
  auto sub = make_subroutine(cfg.subroutine, ell, out.r);
  unfair::Distribution prev = sub->distribution();
  PredictorId current = unfair::sample_state(prev, rng);

  for (std::size_t t = 0; t < horizon; ++t) {
    if (wiring == Wiring::kLookahead) sub->feed(uniform_costs[t]);
    const unfair::Distribution& next = sub->distribution();
    current = unfair::sample_coupled_state(prev, next, current, rng);
    prev = next;
    if (wiring == Wiring::kNoLookahead) sub->feed(uniform_costs[t]);

    out.follow.push_back(current);
    out.state_digests.push_back(digest(sub->distribution()));
    states.push_back(traces[current].states[t]);
  }

  out.switches = count_switches(out.follow);
  out.subroutine_expected_cost = sub->expected_cost();
  if (auto* odd = dynamic_cast<unfair::OddExponent*>(sub.get())) {
    out.truncated_pieces = odd->truncated_count();
    out.dropped_pieces = odd->dropped_count();
  }
  out.trajectory = trajectory_cost(inst, states);
  return out;
}

std::size_t switch_budget(double eps, double diameter, std::size_t ell,
                          double dyn_value) {
  if (!(eps > 0.0) || !(diameter > 0.0) || ell < 2 || dyn_value < 0.0) {
    throw StructuralError("switch_budget needs eps, D > 0, ell >= 2, dyn >= 0");
  }
  const double m = eps * eps * dyn_value /
                   (4.0 * diameter * std::numbers::e * std::log(static_cast<double>(ell)));
  // Absorb rounding when the budget is an exact integer.
  return static_cast<std::size_t>(std::floor(m + 1e-9));
}

CombineRun robustify(const MtsInstance& inst, const PredictorTrace& trace_a,
                     const PredictorTrace& trace_b, const CombineConfig& cfg,
                     Rng& rng) {
  const PredictorTrace pair[2] = {trace_a, trace_b};
  return combine_run(inst, pair, cfg, rng);
}

}  // namespace mtsim::combine
