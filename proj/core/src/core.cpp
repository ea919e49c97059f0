#include "mtsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtsim {

std::vector<MetricViolation> validate_metric(
    const std::vector<std::vector<double>>& dist, std::size_t point_count) {
  const std::size_t n = dist.size();
  if (n != point_count) {
    throw StructuralError("distance matrix has " + std::to_string(n) +
                          " rows but there are " + std::to_string(point_count) +
                          " points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) {
      throw StructuralError("distance matrix row " + std::to_string(i) +
                            " has length " + std::to_string(dist[i].size()) +
                            ", expected " + std::to_string(n));
    }
  }

  std::vector<MetricViolation> out;
  auto describe = [](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(dist[i][i]) > kTolerance) {
      out.push_back({MetricViolation::Kind::kDiagonal, i, i, 0,
                     describe("dist[", i, "][", i, "] = ", dist[i][i], " != 0")});
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(dist[i][j] >= -kTolerance) || !std::isfinite(dist[i][j])) {
        out.push_back({MetricViolation::Kind::kNegative, i, j, 0,
                       describe("dist[", i, "][", j, "] = ", dist[i][j],
                                " is not a finite non-negative real")});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(dist[i][j] - dist[j][i]) > kTolerance) {
        out.push_back({MetricViolation::Kind::kSymmetry, i, j, 0,
                       describe("dist[", i, "][", j, "] = ", dist[i][j],
                                " but dist[", j, "][", i, "] = ", dist[j][i])});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (dist[i][j] > dist[i][k] + dist[k][j] + kTolerance) {
          out.push_back({MetricViolation::Kind::kTriangle, i, j, k,
                         describe("triangle (", i, ",", k, ",", j, "): dist[", i,
                                  "][", j, "] = ", dist[i][j], " > ",
                                  dist[i][k], " + ", dist[k][j])});
        }
      }
    }
  }
  return out;
}

MetricSpace::MetricSpace(std::vector<std::string> points,
                         const std::vector<std::vector<double>>& dist)
    : names_(std::move(points)) {
  auto violations = validate_metric(dist, names_.size());
  if (!violations.empty()) {
    throw StructuralError("invalid metric: " + violations.front().description);
  }
  const std::size_t n = names_.size();
  dist_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist_[i * n + j] = dist[i][j];
      diameter_ = std::max(diameter_, dist[i][j]);
    }
  }
}

MetricSpace::MetricSpace(const std::vector<std::vector<double>>& dist)
    : MetricSpace(
          [&] {
            std::vector<std::string> names;
            for (std::size_t i = 0; i < dist.size(); ++i) {
              names.push_back(std::to_string(i));
            }
            return names;
          }(),
          dist) {}

MetricSpace MetricSpace::uniform(std::size_t n) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  return MetricSpace(d);
}

MetricSpace MetricSpace::line(std::span<const double> coordinates) {
  const std::size_t n = coordinates.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      d[i][j] = std::abs(coordinates[i] - coordinates[j]);
    }
  }
  return MetricSpace(d);
}

std::vector<std::vector<double>> MetricSpace::matrix() const {
  const std::size_t n = size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i][j] = dist_[i * n + j];
  }
  return d;
}

void validate_instance(const MtsInstance& inst) {
  const std::size_t n = inst.metric.size();
  if (n == 0) throw StructuralError("metric space has no points");
  if (inst.costs.empty()) throw StructuralError("instance has no tasks (T = 0)");
  if (inst.initial_state >= n) {
    throw StructuralError("initial state " + std::to_string(inst.initial_state) +
                          " out of range");
  }
  for (std::size_t t = 0; t < inst.costs.size(); ++t) {
    const auto& c = inst.costs[t];
    if (c.size() != n) {
      throw StructuralError("cost vector " + std::to_string(t) + " has length " +
                            std::to_string(c.size()) + ", expected " +
                            std::to_string(n));
    }
    bool any_finite = false;
    for (double x : c) {
      if (std::isnan(x) || x < 0.0) {
        throw StructuralError("cost vector " + std::to_string(t) +
                              " has a negative or NaN entry");
      }
      any_finite = any_finite || !is_infeasible(x);
    }
    if (!any_finite) {
      throw StructuralError("cost vector " + std::to_string(t) +
                            " is INFEASIBLE everywhere");
    }
  }
}

void validate_trace(const MtsInstance& inst, const PredictorTrace& trace) {
  if (trace.states.size() != inst.horizon()) {
    throw StructuralError("predictor trace has length " +
                          std::to_string(trace.states.size()) + ", expected " +
                          std::to_string(inst.horizon()));
  }
  for (State s : trace.states) {
    if (s >= inst.metric.size()) {
      throw StructuralError("predictor state " + std::to_string(s) +
                            " out of range");
    }
  }
}

Trajectory trajectory_cost(const MtsInstance& inst, std::span<const State> states) {
  if (states.size() != inst.horizon()) {
    throw StructuralError("state sequence has length " +
                          std::to_string(states.size()) + ", expected " +
                          std::to_string(inst.horizon()));
  }
  Trajectory out;
  out.states.assign(states.begin(), states.end());
  out.end_states = out.states;
  out.steps.reserve(states.size());
  State prev = inst.initial_state;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const State s = states[t];
    if (s >= inst.metric.size()) {
      throw StructuralError("state " + std::to_string(s) + " out of range");
    }
    const double service = inst.costs[t][s];
    if (is_infeasible(service)) {
      throw InfeasibleTrajectoryError(
          t, "trajectory visits INFEASIBLE state " + std::to_string(s) +
                 " at step " + std::to_string(t));
    }
    StepCost step{inst.metric(prev, s), service};
    out.total += step.total();
    out.steps.push_back(step);
    prev = s;
  }
  return out;
}

double predictor_step_cost_or_infeasible(const MtsInstance& inst,
                                         const PredictorTrace& trace,
                                         std::size_t t) {
  const State prev = t == 0 ? inst.initial_state : trace.states[t - 1];
  const State cur = trace.states[t];
  return inst.metric(prev, cur) + inst.costs[t][cur];
}

double predictor_step_cost(const MtsInstance& inst, const PredictorTrace& trace,
                           std::size_t t) {
  if (t >= inst.horizon() || t >= trace.states.size()) {
    throw StructuralError("step " + std::to_string(t) + " out of range");
  }
  const double f = predictor_step_cost_or_infeasible(inst, trace, t);
  if (is_infeasible(f)) {
    throw InfeasiblePredictorError(
        0, t, "predictor sits on INFEASIBLE state " +
                  std::to_string(trace.states[t]) + " at step " +
                  std::to_string(t));
  }
  return f;
}

double predictor_total_cost(const MtsInstance& inst, const PredictorTrace& trace) {
  double total = 0.0;
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    total += predictor_step_cost_or_infeasible(inst, trace, t);
  }
  return total;
}

double NormalizedInstance::total_offset() const {
  double s = 0.0;
  for (double o : offsets) s += o;
  return s;
}

NormalizedInstance normalize_costs(const MtsInstance& inst) {
  NormalizedInstance out{inst, std::vector<double>(inst.horizon(), 0.0)};
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    auto& c = out.instance.costs[t];
    double lo = kInfeasible;
    for (double x : c) lo = std::min(lo, x);
    if (is_infeasible(lo)) continue;
    out.offsets[t] = lo;
    for (double& x : c) {
      if (!is_infeasible(x)) x -= lo;
    }
  }
  return out;
}

std::size_t CappedCostTable::capped_count() const {
  std::size_t n = 0;
  for (const auto& row : capped) {
    n += static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
  }
  return n;
}

CappedCostTable cap_cost_table(std::vector<std::vector<double>> raw, double cap) {
  CappedCostTable out;
  out.cap = cap;
  out.capped.reserve(raw.size());
  for (auto& row : raw) {
    std::vector<bool> flags(row.size(), false);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] > cap) {
        row[i] = cap;
        flags[i] = true;
      }
    }
    out.capped.push_back(std::move(flags));
  }
  out.values = std::move(raw);
  return out;
}

CappedCostTable cap_predictor_costs(const MtsInstance& inst,
                                    std::span<const PredictorTrace> traces) {
  std::vector<std::vector<double>> raw(inst.horizon(),
                                       std::vector<double>(traces.size()));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    validate_trace(inst, traces[i]);
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      raw[t][i] = predictor_step_cost_or_infeasible(inst, traces[i], t);
    }
  }
  return cap_cost_table(std::move(raw), 2.0 * inst.metric.diameter());
}

double earth_movers_uniform(std::span<const double> p, std::span<const double> q) {
  double moved = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) moved += std::max(0.0, p[i] - q[i]);
  return moved;
}

}  // namespace mtsim
