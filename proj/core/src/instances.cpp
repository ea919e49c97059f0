#include "mtsim/instances.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mtsim/benchmarks.hpp"

namespace mtsim::instances {

CouponInstance coupon_instance(std::size_t ell, double alpha,
                               std::span<const std::size_t> sigma, State initial_state) {
  if (ell < 2) throw StructuralError("coupon instance needs ell >= 2");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw StructuralError("alpha must be in (0, 1]");
  if (initial_state >= ell) throw StructuralError("initial state out of range");
  CouponInstance out;
  out.instance.metric = MetricSpace::uniform(ell);
  out.instance.initial_state = initial_state;
  out.instance.costs.reserve(sigma.size());
  const double low = alpha / static_cast<double>(ell);
  for (std::size_t s : sigma) {
    if (s >= ell) throw StructuralError("hit index out of range");
    CostVector c(ell, low);
    c[s] = 1.0;
    out.instance.costs.push_back(std::move(c));
  }
  out.sigma.assign(sigma.begin(), sigma.end());
  out.traces.resize(ell);
  for (std::size_t i = 0; i < ell; ++i) out.traces[i].states.assign(sigma.size(), i);
  return out;
}

CouponInstance gen_coupon_lb(const CouponParams& p) {
  if (p.T == 0) throw StructuralError("coupon instance needs T >= 1");
  if (p.ell < 2) throw StructuralError("coupon instance needs ell >= 2");
  Rng rng(p.seed);
  std::vector<std::size_t> sigma(p.T);
  for (auto& s : sigma) s = uniform_index(rng, p.ell);
  return coupon_instance(p.ell, p.alpha, sigma, p.initial_state);
}

std::pair<kserver::ServerId, kserver::ServerId> line_suggestions(std::size_t k, State q) {
  if (k == 0 || q > k) throw StructuralError("request outside the k+1 line points");
  if (q == 0) return {0, 0};
  if (q == k) return {k - 1, k - 1};
  return {q - 1, q};
}

PredictorTrace lazy_hole_trace(const kserver::KServerInstance& kinst,
                               std::span<const kserver::ServerId> names) {
  const std::size_t n = kinst.metric.size();
  if (n != kinst.k() + 1) throw StructuralError("hole traces need exactly k+1 points");
  if (names.size() != kinst.requests.size()) {
    throw StructuralError("prediction length differs from the request count");
  }
  std::vector<State> pos = kinst.initial;
  auto hole_of = [&] {
    std::vector<bool> covered(n, false);
    for (State p : pos) covered[p] = true;
    return static_cast<State>(std::ranges::find(covered, false) - covered.begin());
  };
  PredictorTrace tr;
  for (std::size_t t = 0; t < names.size(); ++t) {
    const State r = kinst.requests[t];
    if (std::ranges::find(pos, r) == pos.end()) {
      if (names[t] >= kinst.k()) throw StructuralError("server name out of range");
      pos[names[t]] = r;
    }
    tr.states.push_back(hole_of());
  }
  return tr;
}

LineLowerBound gen_kserver_line_lb(std::size_t k, std::span<const State> requests,
                                   std::span<const double> positions, State initial_hole) {
  if (k == 0) throw StructuralError("k must be at least 1");
  std::vector<double> coords(positions.begin(), positions.end());
  if (coords.empty()) {
    for (std::size_t i = 0; i <= k; ++i) coords.push_back(static_cast<double>(i));
  }
  if (coords.size() != k + 1) throw StructuralError("need exactly k+1 line positions");
  if (!std::ranges::is_sorted(coords)) throw StructuralError("line positions must be sorted");

  LineLowerBound out;
  const MetricSpace metric = MetricSpace::line(coords);
  out.kinst = kserver::from_hole(metric, initial_hole, requests);
  out.instance = kserver::hole_encode(metric, initial_hole, requests);
  std::vector<kserver::ServerId> first, second;
  for (State q : requests) {
    const auto s = line_suggestions(k, q);
    out.suggestions.push_back(s);
    first.push_back(s.first);
    second.push_back(s.second);
  }
  out.traces.push_back(lazy_hole_trace(out.kinst, first));
  out.traces.push_back(lazy_hole_trace(out.kinst, second));
  return out;
}

LayeredGraph mts_to_lgt(const MtsInstance& inst, std::span<const PredictorTrace> traces) {
  validate_instance(inst);
  if (traces.empty()) throw StructuralError("need at least one predictor");
  const std::size_t ell = traces.size();
  const std::size_t horizon = inst.horizon();
  for (std::size_t i = 0; i < ell; ++i) {
    validate_trace(inst, traces[i]);
    for (std::size_t t = 0; t < horizon; ++t) {
      if (is_infeasible(inst.costs[t][traces[i].states[t]])) {
        throw InfeasiblePredictorError(i, t, "predictor " + std::to_string(i) +
                                                 " is on an INFEASIBLE state at step " +
                                                 std::to_string(t));
      }
    }
  }

  LayeredGraph g;
  g.layers.push_back({"source"});
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<std::string> layer;
    for (std::size_t i = 0; i < ell; ++i) {
      layer.push_back("v_" + std::to_string(i) + "_" + std::to_string(t + 1));
    }
    g.layers.push_back(std::move(layer));
  }
  g.layers.push_back({"target"});

  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t from_count = t == 0 ? 1 : ell;
    std::vector<std::vector<double>> w(from_count, std::vector<double>(ell));
    for (std::size_t a = 0; a < from_count; ++a) {
      const State from = t == 0 ? inst.initial_state : traces[a].states[t - 1];
      for (std::size_t j = 0; j < ell; ++j) {
        const State to = traces[j].states[t];
        w[a][j] = inst.metric(from, to) + inst.costs[t][to];
      }
    }
    g.edges.push_back(std::move(w));
  }
  g.edges.emplace_back(ell, std::vector<double>(1, 0.0));
  return g;
}

double lgt_shortest_path(const LayeredGraph& g) {
  if (g.layers.empty() || g.edges.size() + 1 != g.layers.size()) {
    throw StructuralError("malformed layered graph");
  }
  std::vector<double> dist(g.layers[0].size(), 0.0);
  for (std::size_t gap = 0; gap < g.edges.size(); ++gap) {
    const auto& w = g.edges[gap];
    if (w.size() != dist.size()) throw StructuralError("edge matrix does not match its layer");
    std::vector<double> next(g.layers[gap + 1].size(), kInfeasible);
    for (std::size_t a = 0; a < w.size(); ++a) {
      if (w[a].size() != next.size()) {
        throw StructuralError("edge matrix does not match its layer");
      }
      for (std::size_t b = 0; b < next.size(); ++b) {
        next[b] = std::min(next[b], dist[a] + w[a][b]);
      }
    }
    dist = std::move(next);
  }
  return *std::ranges::min_element(dist);
}

void validate(const MssInstance& mss) {
  const std::size_t n = mss.metric.size();
  if (mss.start >= n) throw StructuralError("start point out of range");
  for (std::size_t t = 0; t < mss.requests.size(); ++t) {
    if (mss.requests[t].empty()) {
      throw StructuralError("request set " + std::to_string(t) + " is empty");
    }
    for (State x : mss.requests[t]) {
      if (x >= n) throw StructuralError("request point out of range");
    }
  }
}

double mss_offline_opt(const MssInstance& mss) {
  validate(mss);
  const std::size_t n = mss.metric.size();
  std::vector<double> v(n, kInfeasible);
  v[mss.start] = 0.0;
  for (const auto& w : mss.requests) {
    std::vector<double> next(n, kInfeasible);
    for (State x : w) {
      for (State y = 0; y < n; ++y) next[x] = std::min(next[x], v[y] + mss.metric(y, x));
    }
    v = std::move(next);
  }
  return *std::ranges::min_element(v);
}

double mss_cost(const MssInstance& mss, std::span<const State> positions) {
  validate(mss);
  if (positions.size() != mss.requests.size()) {
    throw StructuralError("position count differs from the round count");
  }
  double cost = 0.0;
  State at = mss.start;
  for (std::size_t t = 0; t < positions.size(); ++t) {
    if (std::ranges::find(mss.requests[t], positions[t]) == mss.requests[t].end()) {
      return kInfeasible;
    }
    cost += mss.metric(at, positions[t]);
    at = positions[t];
  }
  return cost;
}

std::size_t default_reps(const MetricSpace& metric) {
  const double k = static_cast<double>(metric.size()) - 1.0;
  return 2 * static_cast<std::size_t>(std::ceil(metric.diameter() * (k + 1.0)));
}

MssReduction mss_to_kserver(const MssInstance& mss, std::size_t ell,
                            std::optional<std::size_t> reps) {
  validate(mss);
  if (ell == 0) throw StructuralError("need at least one predictor");
  const std::size_t n = mss.metric.size();
  if (n < 2) throw StructuralError("need at least two points");
  MssReduction out;
  out.reps = reps.value_or(default_reps(mss.metric));
  out.traces.resize(ell);
  for (const auto& w : mss.requests) {
    if (w.size() > ell) throw StructuralError("request set larger than ell");
    out.round_begin.push_back(out.requests.size());
    std::vector<bool> inside(n, false);
    for (State x : w) inside[x] = true;
    for (std::size_t rep = 0; rep < out.reps; ++rep) {
      for (State p = 0; p < n; ++p) {
        if (inside[p]) continue;
        out.requests.push_back(p);
        for (std::size_t j = 0; j < ell; ++j) {
          out.traces[j].states.push_back(w[std::min(j, w.size() - 1)]);
        }
      }
    }
  }
  out.round_begin.push_back(out.requests.size());
  out.instance.metric = mss.metric;
  out.instance.initial_state = mss.start;
  for (State r : out.requests) {
    CostVector c(n, 0.0);
    c[r] = kInfeasible;
    out.instance.costs.push_back(std::move(c));
  }
  return out;
}

std::optional<std::vector<State>> project_to_rounds(const MssInstance& mss,
                                                    const MssReduction& red,
                                                    std::span<const State> holes) {
  if (holes.size() != red.requests.size()) {
    throw StructuralError("hole trajectory length differs from the request count");
  }
  std::vector<State> out;
  State before = mss.start;
  for (std::size_t t = 0; t < mss.requests.size(); ++t) {
    const auto& w = mss.requests[t];
    auto in_w = [&](State x) { return std::ranges::find(w, x) != w.end(); };
    std::optional<State> pick;
    if (in_w(before)) pick = before;
    for (std::size_t q = red.round_begin[t]; q < red.round_begin[t + 1]; ++q) {
      if (in_w(holes[q])) pick = holes[q];
    }
    if (!pick) return std::nullopt;
    out.push_back(*pick);
    if (red.round_begin[t + 1] > red.round_begin[t]) before = holes[red.round_begin[t + 1] - 1];
  }
  return out;
}

const char* to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::kFixedState: return "fixed_state";
    case PredictorKind::kNoisyOpt: return "noisy_opt";
    case PredictorKind::kGreedy: return "greedy";
    case PredictorKind::kLazyRandom: return "lazy_random";
  }
  return "?";
}

PredictorKind predictor_kind_from_string(const std::string& name) {
  for (auto k : {PredictorKind::kFixedState, PredictorKind::kNoisyOpt, PredictorKind::kGreedy,
                 PredictorKind::kLazyRandom}) {
    if (name == to_string(k)) return k;
  }
  throw StructuralError("unknown predictor kind '" + name + "'");
}

std::vector<PredictorTrace> gen_predictors(const MtsInstance& inst, PredictorKind kind,
                                           std::size_t count, const PredictorParams& params,
                                           Rng& rng) {
  validate_instance(inst);
  const std::size_t n = inst.metric.size();
  const std::size_t horizon = inst.horizon();
  std::vector<PredictorTrace> out(count);

  switch (kind) {
    case PredictorKind::kFixedState:
      for (std::size_t i = 0; i < count; ++i) {
        const State x = i < params.fixed_points.size() ? params.fixed_points[i] : i % n;
        if (x >= n) throw StructuralError("fixed point out of range");
        out[i].states.assign(horizon, x);
      }
      break;
    case PredictorKind::kNoisyOpt: {
      if (!(params.p_noise >= 0.0 && params.p_noise <= 1.0)) {
        throw StructuralError("p_noise must be in [0, 1]");
      }
      const auto opt = benchmarks::offline_opt(inst).states;
      for (auto& tr : out) {
        tr.states = opt;
        for (auto& x : tr.states) {
          if (bernoulli(rng, params.p_noise)) x = uniform_index(rng, n);
        }
      }
      break;
    }
    case PredictorKind::kGreedy:
      for (auto& tr : out) {
        State at = inst.initial_state;
        for (std::size_t t = 0; t < horizon; ++t) {
          double best = kInfeasible;
          State pick = at;
          for (State x = 0; x < n; ++x) {
            const double v = inst.metric(at, x) + inst.costs[t][x];
            if (v < best) {
              best = v;
              pick = x;
            }
          }
          at = pick;
          tr.states.push_back(at);
        }
      }
      break;
    case PredictorKind::kLazyRandom:
      for (auto& tr : out) {
        State at = inst.initial_state;
        for (std::size_t t = 0; t < horizon; ++t) {
          const auto& c = inst.costs[t];
          if (c[at] > params.threshold) {
            // Jump to a uniformly random state below the threshold, or any
            // feasible one if there is none.
            std::vector<State> ok;
            for (State x = 0; x < n; ++x) {
              if (c[x] <= params.threshold) ok.push_back(x);
            }
            if (ok.empty()) {
              for (State x = 0; x < n; ++x) {
                if (!is_infeasible(c[x])) ok.push_back(x);
              }
            }
            at = ok[uniform_index(rng, ok.size())];
          }
          tr.states.push_back(at);
        }
      }
      break;
  }
  return out;
}

MtsInstance gen_random_mts(const RandomMtsParams& p, Rng& rng) {
  if (p.n < 1 || p.T < 1) throw StructuralError("random MTS needs n, T >= 1");
  if (!(p.diameter > 0.0)) throw StructuralError("diameter must be positive");
  std::vector<std::vector<double>> dist(p.n, std::vector<double>(p.n, 0.0));
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = i + 1; j < p.n; ++j) {
      dist[i][j] = dist[j][i] = p.diameter * (0.5 + 0.5 * uniform01(rng));
    }
  }
  if (p.n >= 2) dist[0][1] = dist[1][0] = p.diameter;

  MtsInstance inst;
  inst.metric = MetricSpace(dist);
  inst.initial_state = 0;
  for (std::size_t t = 0; t < p.T; ++t) {
    CostVector c(p.n);
    for (auto& x : c) x = p.cost_max * uniform01(rng);
    if (p.infeasible_prob > 0.0) {
      const State keep = uniform_index(rng, p.n);
      for (State x = 0; x < p.n; ++x) {
        if (x != keep && bernoulli(rng, p.infeasible_prob)) c[x] = kInfeasible;
      }
    }
    inst.costs.push_back(std::move(c));
  }
  return inst;
}

double infeasible_penalty(const MtsInstance& inst) {
  return 10.0 * static_cast<double>(inst.horizon()) * inst.metric.diameter();
}

MtsInstance penalize_infeasible(const MtsInstance& inst) {
  MtsInstance out = inst;
  const double penalty = infeasible_penalty(inst);
  for (auto& c : out.costs) {
    for (auto& x : c) {
      if (is_infeasible(x)) x = penalty;
    }
  }
  return out;
}

std::string Sidecar::to_json() const {
  nlohmann::json j;
  j["generator"] = kind;
  auto& ps = j["params"] = nlohmann::json::object();
  for (const auto& [k, v] : params) ps[k] = v;
  j["seed"] = seed;
  if (!sigma.empty()) j["sigma_seq"] = sigma;
  return j.dump(2);
}

}  // namespace mtsim::instances
