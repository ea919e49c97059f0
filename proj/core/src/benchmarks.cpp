#include "mtsim/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "mtsim/io.hpp"

namespace mtsim::benchmarks {

namespace {

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

void check_inputs(const MtsInstance& inst, std::span<const PredictorTrace> traces) {
  validate_instance(inst);
  if (traces.empty()) throw StructuralError("benchmark needs at least one predictor");
  for (const auto& tr : traces) validate_trace(inst, tr);
}

// Service cost of predictor i at step t, kInfeasible included.
double service(const MtsInstance& inst, const PredictorTrace& tr, std::size_t t) {
  return inst.costs[t][tr.states[t]];
}

[[noreturn]] void throw_infeasible(std::size_t t) {
  throw InfeasibleBenchmarkError("no feasible schedule survives step " + std::to_string(t));
}

Schedule make_schedule(std::vector<PredictorId> sigma) {
  Schedule s;
  s.switches = count_switches(sigma);
  s.sigma = std::move(sigma);
  return s;
}

// Guards enumerations of base^length candidates.
void enumeration_guard(std::size_t base, std::size_t length) {
  const double n = std::pow(static_cast<double>(base), static_cast<double>(length));
  if (n > kEnumerationLimit) {
    throw SizeError("enumeration of " + std::to_string(base) + "^" + std::to_string(length) +
                    " candidates exceeds the guard");
  }
}

// Advances an odometer over [0, base)^n; false after the last combination.
bool next_combination(std::vector<std::size_t>& digits, std::size_t base) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < base) return true;
    digits[k] = 0;
  }
  return false;
}

}  // namespace

std::size_t count_switches(std::span<const PredictorId> sigma) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < sigma.size(); ++t) n += sigma[t] != sigma[t - 1];
  return n;
}

ScheduleResult dyn(const MtsInstance& inst, std::span<const PredictorTrace> traces) {
  check_inputs(inst, traces);
  const std::size_t ell = traces.size();
  const std::size_t horizon = inst.horizon();
  const auto& d = inst.metric;

  std::vector<double> v(ell), next(ell);
  std::vector<std::vector<std::uint32_t>> parent(horizon,
                                                 std::vector<std::uint32_t>(ell, kNoParent));
  for (std::size_t j = 0; j < ell; ++j) {
    v[j] = d(inst.initial_state, traces[j].states[0]) + service(inst, traces[j], 0);
  }
  if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(0);

  for (std::size_t t = 1; t < horizon; ++t) {
    for (std::size_t j = 0; j < ell; ++j) {
      const State to = traces[j].states[t];
      double best = kInfeasible;
      std::uint32_t arg = kNoParent;
      for (std::size_t i = 0; i < ell; ++i) {
        const double cand = v[i] + d(traces[i].states[t - 1], to);
        if (cand < best) {
          best = cand;
          arg = static_cast<std::uint32_t>(i);
        }
      }
      next[j] = best + service(inst, traces[j], t);
      parent[t][j] = arg;
    }
    v.swap(next);
    if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(t);
  }

  const auto end = static_cast<std::size_t>(std::ranges::min_element(v) - v.begin());
  std::vector<PredictorId> sigma(horizon);
  sigma[horizon - 1] = end;
  for (std::size_t t = horizon - 1; t > 0; --t) sigma[t - 1] = parent[t][sigma[t]];
  return {v[end], make_schedule(std::move(sigma))};
}

ScheduleResult dyn_limited(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                           std::size_t m) {
  check_inputs(inst, traces);
  const std::size_t ell = traces.size();
  const std::size_t horizon = inst.horizon();
  const std::size_t layers = std::min(m, horizon - 1) + 1;
  const auto& d = inst.metric;

  // v[k * ell + j]: best cost ending on predictor j after exactly k switches.
  std::vector<double> v(layers * ell, kInfeasible), next(layers * ell);
  std::vector<std::vector<std::uint32_t>> parent(
      horizon, std::vector<std::uint32_t>(layers * ell, kNoParent));
  for (std::size_t j = 0; j < ell; ++j) {
    v[j] = d(inst.initial_state, traces[j].states[0]) + service(inst, traces[j], 0);
  }
  if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(0);

  for (std::size_t t = 1; t < horizon; ++t) {
    for (std::size_t k = 0; k < layers; ++k) {
      for (std::size_t j = 0; j < ell; ++j) {
        const State to = traces[j].states[t];
        double best = v[k * ell + j] + d(traces[j].states[t - 1], to);
        std::uint32_t arg = static_cast<std::uint32_t>(j);
        if (k > 0) {
          for (std::size_t i = 0; i < ell; ++i) {
            if (i == j) continue;
            const double cand = v[(k - 1) * ell + i] + d(traces[i].states[t - 1], to);
            if (cand < best) {
              best = cand;
              arg = static_cast<std::uint32_t>(i);
            }
          }
        }
        next[k * ell + j] = best + service(inst, traces[j], t);
        parent[t][k * ell + j] = is_infeasible(best) ? kNoParent : arg;
      }
    }
    v.swap(next);
    if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(t);
  }

  std::size_t end_k = 0, end_j = 0;
  double best = kInfeasible;
  for (std::size_t j = 0; j < ell; ++j) {
    for (std::size_t k = 0; k < layers; ++k) {
      if (v[k * ell + j] < best) {
        best = v[k * ell + j];
        end_k = k;
        end_j = j;
      }
    }
  }
  std::vector<PredictorId> sigma(horizon);
  sigma[horizon - 1] = end_j;
  for (std::size_t t = horizon - 1; t > 0; --t) {
    const std::uint32_t i = parent[t][end_k * ell + sigma[t]];
    if (i != sigma[t]) --end_k;
    sigma[t - 1] = i;
  }
  return {best, make_schedule(std::move(sigma))};
}

ScheduleResult dyn_rho(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                       double rho, bool charge_full) {
  check_inputs(inst, traces);
  if (!(rho >= 0.0)) throw StructuralError("rho must be non-negative");
  const std::size_t ell = traces.size();
  const std::size_t horizon = inst.horizon();

  std::vector<double> v(ell), next(ell);
  std::vector<std::vector<std::uint32_t>> parent(horizon,
                                                 std::vector<std::uint32_t>(ell, kNoParent));
  for (std::size_t j = 0; j < ell; ++j) {
    v[j] = predictor_step_cost_or_infeasible(inst, traces[j], 0);
  }
  if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(0);

  for (std::size_t t = 1; t < horizon; ++t) {
    for (std::size_t j = 0; j < ell; ++j) {
      const double f = predictor_step_cost_or_infeasible(inst, traces[j], t);
      const double on_switch = rho + (charge_full ? f : service(inst, traces[j], t));
      double best = v[j] + f;
      std::uint32_t arg = static_cast<std::uint32_t>(j);
      for (std::size_t i = 0; i < ell; ++i) {
        if (i == j) continue;
        const double cand = v[i] + on_switch;
        if (cand < best) {
          best = cand;
          arg = static_cast<std::uint32_t>(i);
        }
      }
      next[j] = best;
      parent[t][j] = arg;
    }
    v.swap(next);
    if (std::ranges::all_of(v, is_infeasible)) throw_infeasible(t);
  }

  const auto end = static_cast<std::size_t>(std::ranges::min_element(v) - v.begin());
  std::vector<PredictorId> sigma(horizon);
  sigma[horizon - 1] = end;
  for (std::size_t t = horizon - 1; t > 0; --t) sigma[t - 1] = parent[t][sigma[t]];
  return {v[end], make_schedule(std::move(sigma))};
}

OptResult offline_opt(const MtsInstance& inst) {
  validate_instance(inst);
  const std::size_t n = inst.metric.size();
  const std::size_t horizon = inst.horizon();
  const auto& d = inst.metric;

  std::vector<double> v(n), next(n);
  std::vector<std::vector<std::uint32_t>> parent(horizon, std::vector<std::uint32_t>(n, 0));
  for (State x = 0; x < n; ++x) v[x] = d(inst.initial_state, x) + inst.costs[0][x];
  for (std::size_t t = 1; t < horizon; ++t) {
    for (State x = 0; x < n; ++x) {
      double best = kInfeasible;
      std::uint32_t arg = 0;
      for (State y = 0; y < n; ++y) {
        const double cand = v[y] + d(y, x);
        if (cand < best) {
          best = cand;
          arg = static_cast<std::uint32_t>(y);
        }
      }
      next[x] = best + inst.costs[t][x];
      parent[t][x] = arg;
    }
    v.swap(next);
  }
  const auto end = static_cast<std::size_t>(std::ranges::min_element(v) - v.begin());
  std::vector<State> states(horizon);
  states[horizon - 1] = end;
  for (std::size_t t = horizon - 1; t > 0; --t) states[t - 1] = parent[t][states[t]];
  return {v[end], std::move(states)};
}

CouponStrategyResult coupon_offline_strategy(const MtsInstance& inst,
                                             std::span<const std::size_t> sigma,
                                             std::size_t m) {
  validate_instance(inst);
  const std::size_t ell = inst.metric.size();
  const std::size_t horizon = inst.horizon();
  if (sigma.size() != horizon) {
    throw StructuralError("hit sequence length differs from the horizon");
  }
  std::vector<std::vector<std::size_t>> hits(ell);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t s = sigma[t];
    if (s >= ell) throw StructuralError("hit index out of range at step " + std::to_string(t));
    const auto& c = inst.costs[t];
    for (std::size_t x = 0; x < ell; ++x) {
      const bool ok = x == s ? c[x] == 1.0 : c[x] == c[(s + 1) % ell] && c[x] < 1.0;
      if (!ok) {
        throw StructuralError("cost vector at step " + std::to_string(t) +
                              " does not match the hit sequence");
      }
    }
    hits[s].push_back(t);
  }

  constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cursor(ell, 0);
  auto next_hit = [&](std::size_t j) {
    return cursor[j] < hits[j].size() ? hits[j][cursor[j]] : kNever;
  };
  // Lowest index among those whose next hit is furthest away.
  auto furthest = [&](std::size_t skip) {
    std::size_t best = ell;
    for (std::size_t j = 0; j < ell; ++j) {
      if (j == skip) continue;
      if (best == ell || next_hit(j) > next_hit(best)) best = j;
    }
    return best;
  };

  CouponStrategyResult out;
  std::size_t current = furthest(ell);
  std::vector<PredictorId> followed(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (sigma[t] == current && out.switch_steps.size() < m) {
      ++cursor[sigma[t]];
      current = furthest(current);
      out.switch_steps.push_back(t);
    } else {
      ++cursor[sigma[t]];
    }
    followed[t] = current;
  }
  out.cost = trajectory_cost(inst, followed).total;
  out.schedule = make_schedule(std::move(followed));
  return out;
}

double brute_force_oracle(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                          Variant variant, const OracleParams& params) {
  validate_instance(inst);
  const std::size_t horizon = inst.horizon();
  const auto& d = inst.metric;

  if (variant == Variant::kOpt) {
    const std::size_t n = d.size();
    enumeration_guard(n, horizon);
    std::vector<std::size_t> seq(horizon, 0);
    double best = kInfeasible;
    do {
      double cost = 0.0;
      State at = inst.initial_state;
      for (std::size_t t = 0; t < horizon; ++t) {
        cost += d(at, seq[t]) + inst.costs[t][seq[t]];
        at = seq[t];
      }
      best = std::min(best, cost);
    } while (next_combination(seq, n));
    return best;
  }

  if (traces.empty()) throw StructuralError("benchmark needs at least one predictor");
  for (const auto& tr : traces) validate_trace(inst, tr);
  const std::size_t ell = traces.size();
  enumeration_guard(ell, horizon);

  std::vector<std::size_t> sigma(horizon, 0);
  double best = kInfeasible;
  do {
    const std::size_t switches = count_switches(sigma);
    if (variant == Variant::kDynLimited && switches > params.m) continue;
    double cost = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const PredictorTrace& tr = traces[sigma[t]];
      if (variant == Variant::kDynRho) {
        const bool switched = t > 0 && sigma[t] != sigma[t - 1];
        const double f = predictor_step_cost_or_infeasible(inst, tr, t);
        cost += switched ? params.rho + (params.charge_full ? f : service(inst, tr, t)) : f;
      } else {
        const State from = t == 0 ? inst.initial_state : traces[sigma[t - 1]].states[t - 1];
        cost += d(from, tr.states[t]) + service(inst, tr, t);
      }
    }
    best = std::min(best, cost);
  } while (next_combination(sigma, ell));
  return best;
}

std::string BenchmarkReport::to_json(const std::string& instance_id) const {
  using nlohmann::json;
  auto schedule_json = [](const ScheduleResult& r) {
    return json{{"value", r.value},
                {"sigma", r.schedule.sigma},
                {"switches", r.schedule.switches}};
  };
  json out;
  out["instance_id"] = instance_id;
  out["dyn"] = schedule_json(dyn);
  out["dyn_m"] = json::array();
  for (const auto& [m, r] : dyn_m) {
    json e = schedule_json(r);
    e["m"] = m;
    out["dyn_m"].push_back(std::move(e));
  }
  out["dyn_rho"] = json::array();
  for (const auto& [rho, r] : dyn_rho) {
    json e = schedule_json(r);
    e["rho"] = rho;
    out["dyn_rho"].push_back(std::move(e));
  }
  out["opt"] = json{{"value", opt.value}, {"states", opt.states}};
  out["dyn_tilde"] = dyn_tilde ? json(*dyn_tilde) : json(nullptr);
  return out.dump(2);
}

std::string BenchmarkReport::to_csv(const std::string& instance_id) const {
  std::string out = "instance_id,benchmark,param,value,argmin_switches\n";
  auto row = [&](const char* name, const std::string& param, double value,
                 const std::string& switches) {
    out += instance_id + ',' + name + ',' + param + ',' + format_number(value, 12) + ',' +
           switches + '\n';
  };
  row("dyn", "", dyn.value, std::to_string(dyn.schedule.switches));
  for (const auto& [m, r] : dyn_m) {
    row("dyn_m", std::to_string(m), r.value, std::to_string(r.schedule.switches));
  }
  for (const auto& [rho, r] : dyn_rho) {
    row("dyn_rho", format_number(rho, 12), r.value, std::to_string(r.schedule.switches));
  }
  row("opt", "", opt.value, std::to_string(count_switches(opt.states)));
  if (dyn_tilde) row("dyn_tilde", "", *dyn_tilde, "");
  return out;
}

BenchmarkReport compute_report(const MtsInstance& inst,
                               std::span<const PredictorTrace> traces,
                               std::span<const std::size_t> ms,
                               std::span<const double> rhos) {
  BenchmarkReport rep;
  rep.dyn = dyn(inst, traces);
  for (std::size_t m : ms) rep.dyn_m.emplace_back(m, dyn_limited(inst, traces, m));
  for (double rho : rhos) rep.dyn_rho.emplace_back(rho, dyn_rho(inst, traces, rho));
  rep.opt = offline_opt(inst);
  return rep;
}

}  // namespace mtsim::benchmarks
