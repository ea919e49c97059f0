#pragma once

// Hand-rolled generators for property tests. Everything is driven by an
// explicit Rng so a failing case can be replayed from its seed.

#include <cmath>
#include <vector>

#include "mtsim/core.hpp"
#include "mtsim/rng.hpp"

namespace mtsim::testgen {

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

/// Line metric with distinct integer-ish coordinates, or a random metric
/// obtained as the shortest-path closure of random weights.
inline MetricSpace random_metric(Rng& rng, std::size_t n) {
  if (bernoulli(rng, 0.5)) {
    std::vector<double> xs;
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(x);
      x += 0.5 + std::floor(uniform01(rng) * 4.0);
    }
    return MetricSpace::line(xs);
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = 0.25 + 2.0 * uniform01(rng);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return MetricSpace(d);
}

struct CaseParams {
  std::size_t max_n = 4;
  std::size_t max_T = 5;
  double infeasible_prob = 0.0;
  double cost_max = 3.0;
};

inline MtsInstance random_instance(Rng& rng, const CaseParams& p = {}) {
  MtsInstance inst;
  const std::size_t n = between(rng, 2, p.max_n);
  inst.metric = random_metric(rng, n);
  inst.initial_state = uniform_index(rng, n);
  const std::size_t T = between(rng, 1, p.max_T);
  for (std::size_t t = 0; t < T; ++t) {
    CostVector c(n);
    for (auto& x : c) {
      x = bernoulli(rng, p.infeasible_prob) ? kInfeasible
                                            : std::round(uniform01(rng) * p.cost_max * 4) / 4;
    }
    c[uniform_index(rng, n)] = std::round(uniform01(rng) * p.cost_max * 4) / 4;
    inst.costs.push_back(std::move(c));
  }
  return inst;
}

inline std::vector<PredictorTrace> random_traces(Rng& rng, const MtsInstance& inst,
                                                 std::size_t ell) {
  std::vector<PredictorTrace> out(ell);
  for (auto& tr : out) {
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      tr.states.push_back(uniform_index(rng, inst.metric.size()));
    }
  }
  return out;
}

/// Calls f(seq) for every sequence in {0..base-1}^length.
template <class F>
void for_each_sequence(std::size_t base, std::size_t length, F&& f) {
  std::vector<std::size_t> seq(length, 0);
  while (true) {
    f(static_cast<const std::vector<std::size_t>&>(seq));
    std::size_t pos = 0;
    while (pos < length && ++seq[pos] == base) seq[pos++] = 0;
    if (pos == length) return;
  }
}

}  // namespace mtsim::testgen
