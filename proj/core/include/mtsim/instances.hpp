#pragma once

// Instance generators and reductions: the coupon-collector lower bound, the
// line-metric k-server lower bound, MTS to layered graph traversal, metrical
// service systems to k-server, and synthetic predictor families.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtsim/core.hpp"
#include "mtsim/kserver.hpp"
#include "mtsim/rng.hpp"

namespace mtsim::instances {

// ---- coupon-collector lower bound ----

struct CouponParams {
  std::size_t ell = 2;
  std::size_t T = 1;
  double alpha = 1.0;  // in (0, 1]
  std::uint64_t seed = 0;
  State initial_state = 0;
};

struct CouponInstance {
  MtsInstance instance;
  std::vector<PredictorTrace> traces;  // predictor i stays at point i
  std::vector<std::size_t> sigma;      // hit point per step, 0-based
};

/// Uniform metric on ell points; c_t(sigma_t) = 1, alpha/ell elsewhere.
CouponInstance gen_coupon_lb(const CouponParams& p);

/// Builds the instance for a given hit sequence (no sampling).
CouponInstance coupon_instance(std::size_t ell, double alpha,
                               std::span<const std::size_t> sigma, State initial_state = 0);

// ---- line k-server lower bound ----

struct LineLowerBound {
  kserver::KServerInstance kinst;  // servers named left to right
  MtsInstance instance;            // hole encoding
  std::vector<PredictorTrace> traces;  // two hole traces
  /// Server names suggested by the two predictors per request.
  std::vector<std::pair<kserver::ServerId, kserver::ServerId>> suggestions;
};

/// Suggestions for a request at point q (0-based) among k+1 line points:
/// (q-1, q), with both clipped to [0, k-1] at the borders.
std::pair<kserver::ServerId, kserver::ServerId> line_suggestions(std::size_t k, State q);

/// Points at `positions` (default 0..k). Each predictor moves its suggested
/// server onto requests at its hole; requests on covered points leave it in
/// place.
LineLowerBound gen_kserver_line_lb(std::size_t k, std::span<const State> requests,
                                   std::span<const double> positions = {},
                                   State initial_hole = 0);

/// Hole positions of a lazy named-server predictor on k+1 points. Requests
/// on covered points cost nothing and move nothing.
PredictorTrace lazy_hole_trace(const kserver::KServerInstance& kinst,
                               std::span<const kserver::ServerId> names);

// ---- MTS to layered graph traversal ----

struct LayeredGraph {
  /// layers[0] = {source}, layers[1..T] = predictor vertices, last = {target}.
  std::vector<std::vector<std::string>> layers;
  /// edges[g][a][b]: weight from vertex a of layer g to vertex b of layer g+1.
  std::vector<std::vector<std::vector<double>>> edges;
};

/// Edge (v_{i,t-1}, v_{jt}) weighs d(phi_{i,t-1}, phi_{jt}) + c_t(phi_{jt}).
/// Throws InfeasiblePredictorError on an INFEASIBLE suggestion.
LayeredGraph mts_to_lgt(const MtsInstance& inst, std::span<const PredictorTrace> traces);

/// Shortest source-to-target path weight.
double lgt_shortest_path(const LayeredGraph& g);

// ---- metrical service systems ----

struct MssInstance {
  MetricSpace metric;
  State start = 0;
  std::vector<std::vector<State>> requests;  // W_t
};

void validate(const MssInstance& mss);

/// Cheapest sequence x_t in W_t from the start point.
double mss_offline_opt(const MssInstance& mss);

/// Movement cost of a position sequence; kInfeasible if some x_t is not in W_t.
double mss_cost(const MssInstance& mss, std::span<const State> positions);

struct MssReduction {
  MtsInstance instance;                 // hole encoding, k = n - 1
  std::vector<PredictorTrace> traces;   // ell hole traces
  std::vector<State> requests;
  /// round_begin[t]..round_begin[t+1] are the requests of MSS round t.
  std::vector<std::size_t> round_begin;
  std::size_t reps = 0;
};

/// 2 * ceil(D * (k + 1)) with k = n - 1.
std::size_t default_reps(const MetricSpace& metric);

/// Requests every point outside W_t `reps` times per round while predictor j
/// keeps its hole on the j-th point of W_t (the last one if W_t is short).
MssReduction mss_to_kserver(const MssInstance& mss, std::size_t ell,
                            std::optional<std::size_t> reps = std::nullopt);

/// For each round, the last W_t point held by the hole between the end of
/// the previous round and the end of this one. nullopt if some round never
/// has the hole in W_t.
std::optional<std::vector<State>> project_to_rounds(const MssInstance& mss,
                                                    const MssReduction& red,
                                                    std::span<const State> holes);

// ---- synthetic instances and predictors ----

enum class PredictorKind { kFixedState, kNoisyOpt, kGreedy, kLazyRandom };

const char* to_string(PredictorKind k);
PredictorKind predictor_kind_from_string(const std::string& name);

struct PredictorParams {
  std::vector<State> fixed_points;  // fixed_state: point per predictor (default i mod n)
  double p_noise = 0.1;             // noisy_opt
  double threshold = 0.5;           // lazy_random
};

/// Traces of `count` predictors of one kind.
std::vector<PredictorTrace> gen_predictors(const MtsInstance& inst, PredictorKind kind,
                                           std::size_t count, const PredictorParams& params,
                                           Rng& rng);

struct RandomMtsParams {
  std::size_t n = 4;
  std::size_t T = 10;
  double diameter = 1.0;
  double cost_max = 1.0;
  double infeasible_prob = 0.0;
};

/// Distances drawn from [D/2, D] (always a metric, diameter exactly D),
/// costs uniform in [0, cost_max], optional INFEASIBLE entries with at least
/// one finite entry per step.
MtsInstance gen_random_mts(const RandomMtsParams& p, Rng& rng);

/// 10 * T * D.
double infeasible_penalty(const MtsInstance& inst);

/// Copy with INFEASIBLE entries replaced by infeasible_penalty(inst).
MtsInstance penalize_infeasible(const MtsInstance& inst);

struct Sidecar {
  std::string kind;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
  std::vector<std::size_t> sigma;  // coupon only

  std::string to_json() const;
};

}  // namespace mtsim::instances
