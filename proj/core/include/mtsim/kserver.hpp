#pragma once

// k-server instances with named servers, the relaxed benchmark that lets
// any predictor's named server serve a request, and two MTS encodings:
// configurations (sorted multisets) and, on k+1 points, the hole.

#include <span>
#include <vector>

#include "mtsim/core.hpp"

namespace mtsim::kserver {

using ServerId = std::size_t;

struct KServerInstance {
  MetricSpace metric;
  std::vector<State> initial;  // initial[s] = position of server s
  std::vector<State> requests;

  std::size_t k() const noexcept { return initial.size(); }
};

void validate(const KServerInstance& kinst);

/// A lazy predictor names one server per request.
using LazyPrediction = std::vector<ServerId>;

/// Cost of serving every request with the named server, moving nothing else.
double lazy_cost(const KServerInstance& kinst, std::span<const ServerId> names);

/// Cheapest lazy solution in which request t is served by a server from
/// allowed[t]. Throws SizeError beyond 1e6 server tuples; returns kInfeasible
/// only if some allowed[t] is empty.
double restricted_opt(const KServerInstance& kinst,
                      std::span<const std::vector<ServerId>> allowed);

/// Unrestricted optimum (every server allowed at every step).
double kserver_opt(const KServerInstance& kinst);

/// ~DYN: request t may be served by any server named at t by some predictor.
double dyn_tilde_kserver(const KServerInstance& kinst,
                         std::span<const LazyPrediction> predictions);

/// Sorted-multiset configurations with min-cost matching distances. Costs
/// are 0 on configurations covering the request, kInfeasible elsewhere.
struct ConfigurationMts {
  MtsInstance instance;
  std::vector<std::vector<State>> configs;

  State index_of(std::vector<State> positions) const;
};

/// Throws SizeError beyond 2000 configurations.
ConfigurationMts configuration_mts(const KServerInstance& kinst);

/// Configuration sequence produced by a lazy predictor.
PredictorTrace configuration_trace(const KServerInstance& kinst,
                                   const ConfigurationMts& cmts,
                                   std::span<const ServerId> names);

/// States are hole positions; c_t(r_t) = kInfeasible, 0 elsewhere. The
/// metric must have exactly k+1 points.
MtsInstance hole_encode(const MetricSpace& metric, State initial_hole,
                        std::span<const State> requests);

/// Named servers s_0..s_{k-1} on the non-hole points in index order.
KServerInstance from_hole(const MetricSpace& metric, State initial_hole,
                          std::span<const State> requests);

}  // namespace mtsim::kserver
