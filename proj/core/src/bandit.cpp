#include "mtsim/bandit.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mtsim::bandit {

BanditConfig BanditConfig::for_epsilon(double eps, std::size_t ell) {
  BanditConfig cfg;
  cfg.epsilon = eps;
  cfg.gamma = std::min(1.0, eps) / 6.0;
  cfg.r = ell >= 2 ? unfair::unfair_rate_for_epsilon(eps, ell, unfair::Algorithm::kShare)
                   : 1.0;
  return cfg;
}

double BanditConfig::resolved_r(std::size_t ell) const {
  if (r > 0.0) return r;
  if (ell < 2) return 1.0;
  return unfair::unfair_rate_for_epsilon(epsilon, ell, unfair::Algorithm::kShare);
}

void validate(const BanditConfig& cfg) {
  if (!cfg.strict_gamma) {
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) {
      throw StructuralError("exploration rate must be in [0, 1]");
    }
    return;
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma < 0.25)) {
    throw StructuralError("exploration rate gamma must satisfy 0 < gamma < 1/4");
  }
}

std::string query_log_to_jsonl(const QueryLog& log) {
  std::string out;
  for (const auto& rec : log) {
    nlohmann::json line;
    line["t"] = rec.t;
    line["type"] = rec.type == StepType::kExploration ? "exploration" : "exploitation";
    auto& queried = line["queried"] = nlohmann::json::array();
    auto& states = line["states"] = nlohmann::json::array();
    auto& costs = line["costs"] = nlohmann::json::array();
    for (const auto& obs : rec.observations) {
      queried.push_back(obs.predictor);
      states.push_back(obs.state);
      costs.push_back(obs.cost);
    }
    out += line.dump();
    out += '\n';
  }
  return out;
}

PredictorOracle::PredictorOracle(const MtsInstance& inst,
                                 std::vector<PredictorTrace> traces)
    : traces_(std::move(traces)), capped_(cap_predictor_costs(inst, traces_)) {
  if (traces_.empty()) throw StructuralError("oracle needs at least one predictor");
}

void PredictorOracle::begin_step(std::size_t t, std::size_t budget) {
  if (t >= horizon()) throw StructuralError("oracle step out of range");
  t_ = t;
  budget_ = budget;
  used_ = 0;
}

Observation PredictorOracle::query(PredictorId i) {
  if (i >= traces_.size()) throw StructuralError("predictor index out of range");
  if (used_ >= budget_) {
    throw ContractViolation("predictor oracle: more than " + std::to_string(budget_) +
                            " queries at step " + std::to_string(t_));
  }
  ++used_;
  return {i, traces_[i].states[t_], capped_.values[t_][i]};
}

State greedy_state(const MetricSpace& metric, std::span<const double> c, State b) {
  State best = 0;
  double best_value = kInfeasible;
  for (State x = 0; x < c.size(); ++x) {
    const double v = metric(b, x) + c[x];
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }
  if (is_infeasible(best_value)) {
    throw ContractViolation("greedy step: cost vector has no finite entry");
  }
  return best;
}

CostVector estimate_loss(PredictorId i, double f_observed, double diameter,
                         std::size_t ell) {
  if (i >= ell) throw StructuralError("predictor index out of range");
  if (!(f_observed >= 0.0) || f_observed > 2.0 * diameter * (1.0 + 1e-12)) {
    throw ContractViolation("observed cost " + std::to_string(f_observed) +
                            " outside [0, 2D]; capping was bypassed");
  }
  CostVector fhat(ell, 0.0);
  fhat[i] = std::min(1.0, f_observed / (2.0 * diameter));
  return fhat;
}

namespace {

struct Walker {
  const MtsInstance& inst;
  Trajectory traj;
  State at;
  double cap;
  std::size_t detours = 0;

  void record(State served, State end, double movement, double service) {
    traj.states.push_back(served);
    traj.end_states.push_back(end);
    traj.steps.push_back({movement, service});
    traj.total += movement + service;
    at = end;
  }

  // Moves to `target` and serves there, detouring through a zero-cost state
  // when the direct step would cost more than 2D.
  void follow(std::size_t t, State target) {
    const auto& c = inst.costs[t];
    const double direct = inst.metric(at, target) + c[target];
    if (direct <= cap + kTolerance) {
      record(target, target, inst.metric(at, target), c[target]);
      return;
    }
    const auto zero = static_cast<State>(std::min_element(c.begin(), c.end()) - c.begin());
    ++detours;
    record(zero, target, inst.metric(at, zero) + inst.metric(zero, target), c[zero]);
  }

  void greedy_round_trip(std::size_t t) {
    const auto& c = inst.costs[t];
    const State g = greedy_state(inst.metric, c, at);
    record(g, at, 2.0 * inst.metric(at, g), c[g]);
  }
};

BanditRun run(const MtsInstance& inst, PredictorOracle& oracle, const BanditConfig& cfg,
              Rng& rng, bool primed) {
  validate(cfg);
  if (oracle.horizon() != inst.horizon()) {
    throw StructuralError("oracle and instance horizons differ");
  }
  const std::size_t ell = oracle.size();
  const std::size_t horizon = inst.horizon();
  const double diameter = inst.metric.diameter();
  if (!(diameter > 0.0)) throw StructuralError("metric diameter must be positive");

  BanditRun out;
  out.exploration.resize(horizon);
  std::vector<PredictorId> picks(horizon, 0);
  for (std::size_t t = 0; t < horizon; ++t) {
    out.exploration[t] = bernoulli(rng, cfg.gamma);
    if (out.exploration[t]) picks[t] = uniform_index(rng, ell);
  }

  unfair::Share share = ell >= 2 ? unfair::Share::for_rate(ell, cfg.resolved_r(ell))
                                 : unfair::Share(1, 0.0, 0.5);
  unfair::Distribution prev = share.distribution();
  PredictorId anchor = unfair::sample_state(prev, rng);

  Walker walk{inst, {}, inst.initial_state, 2.0 * diameter};
  out.anchors.reserve(horizon);
  out.log.reserve(horizon);

  for (std::size_t t = 0; t < horizon; ++t) {
    // Share has no lookahead: its distribution only reflects steps < t.
    const unfair::Distribution& next = share.distribution();
    anchor = unfair::sample_coupled_state(prev, next, anchor, rng);
    prev = next;
    out.anchors.push_back(anchor);

    QueryRecord rec;
    rec.t = t;
    if (out.exploration[t]) {
      rec.type = StepType::kExploration;
      oracle.begin_step(t, primed ? 2 : 1);
      const Observation obs = oracle.query(picks[t]);
      rec.observations.push_back(obs);
      const CostVector fhat = estimate_loss(obs.predictor, obs.cost, diameter, ell);
      for (double x : fhat) {
        if (x < 0.0 || x > 1.0) {
          throw ContractViolation("estimated loss outside [0,1]");
        }
      }
      share.feed(fhat);
      if (primed) {
        const Observation own = oracle.query(anchor);
        rec.observations.push_back(own);
        walk.follow(t, own.state);
      } else {
        walk.greedy_round_trip(t);
      }
    } else {
      rec.type = StepType::kExploitation;
      oracle.begin_step(t, 1);
      // Feeding the zero vector leaves Share unchanged.
      const Observation obs = oracle.query(anchor);
      rec.observations.push_back(obs);
      walk.follow(t, obs.state);
    }
    out.log.push_back(std::move(rec));
  }

  for (std::size_t t = 1; t < horizon; ++t) {
    out.anchor_switches += out.anchors[t] != out.anchors[t - 1];
  }
  out.detours = walk.detours;
  out.trajectory = std::move(walk.traj);
  return out;
}

}  // namespace

BanditRun bandit_combine_run(const MtsInstance& inst, PredictorOracle& oracle,
                             const BanditConfig& cfg, Rng& rng) {
  return run(inst, oracle, cfg, rng, /*primed=*/false);
}

BanditRun bandit_combine_prime_run(const MtsInstance& inst, PredictorOracle& oracle,
                                   const BanditConfig& cfg, Rng& rng) {
  return run(inst, oracle, cfg, rng, /*primed=*/true);
}

BanditRun run_on_original(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                          const BanditConfig& cfg, Rng& rng, bool primed) {
  const NormalizedInstance norm = normalize_costs(inst);
  PredictorOracle oracle(norm.instance,
                         std::vector<PredictorTrace>(traces.begin(), traces.end()));
  BanditRun out = primed ? bandit_combine_prime_run(norm.instance, oracle, cfg, rng)
                         : bandit_combine_run(norm.instance, oracle, cfg, rng);
  for (std::size_t t = 0; t < out.trajectory.steps.size(); ++t) {
    out.trajectory.steps[t].service += norm.offsets[t];
  }
  out.trajectory.total += norm.total_offset();
  return out;
}

}  // namespace mtsim::bandit
