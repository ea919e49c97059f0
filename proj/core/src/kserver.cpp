#include "mtsim/kserver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtsim::kserver {

namespace {

constexpr double kTupleLimit = 1e6;
constexpr std::size_t kConfigLimit = 2000;

double min_matching(const MetricSpace& d, std::span<const State> a,
                    std::span<const State> b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInfeasible;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += d(a[i], b[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void multisets(std::size_t n, std::size_t k, std::size_t lo, std::vector<State>& cur,
               std::vector<std::vector<State>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (State x = lo; x < n; ++x) {
    cur.push_back(x);
    multisets(n, k, x, cur, out);
    cur.pop_back();
  }
}

}  // namespace

void validate(const KServerInstance& kinst) {
  const std::size_t n = kinst.metric.size();
  if (kinst.initial.empty()) throw StructuralError("k-server instance needs k >= 1");
  for (State p : kinst.initial) {
    if (p >= n) throw StructuralError("server position out of range");
  }
  for (State r : kinst.requests) {
    if (r >= n) throw StructuralError("request point out of range");
  }
}

double lazy_cost(const KServerInstance& kinst, std::span<const ServerId> names) {
  validate(kinst);
  if (names.size() != kinst.requests.size()) {
    throw StructuralError("prediction length differs from the request count");
  }
  std::vector<State> pos = kinst.initial;
  double cost = 0.0;
  for (std::size_t t = 0; t < names.size(); ++t) {
    if (names[t] >= kinst.k()) throw StructuralError("server name out of range");
    cost += kinst.metric(pos[names[t]], kinst.requests[t]);
    pos[names[t]] = kinst.requests[t];
  }
  return cost;
}

double restricted_opt(const KServerInstance& kinst,
                      std::span<const std::vector<ServerId>> allowed) {
  validate(kinst);
  if (allowed.size() != kinst.requests.size()) {
    throw StructuralError("allowed-server list length differs from the request count");
  }
  const std::size_t n = kinst.metric.size();
  const std::size_t k = kinst.k();
  if (std::pow(static_cast<double>(n), static_cast<double>(k)) > kTupleLimit) {
    throw SizeError("k-server DP exceeds 1e6 server tuples");
  }
  std::vector<std::size_t> stride(k, 1);
  for (std::size_t s = 1; s < k; ++s) stride[s] = stride[s - 1] * n;
  const std::size_t tuples = stride[k - 1] * n;

  std::vector<double> v(tuples, kInfeasible), next(tuples);
  std::size_t start = 0;
  for (std::size_t s = 0; s < k; ++s) start += kinst.initial[s] * stride[s];
  v[start] = 0.0;

  for (std::size_t t = 0; t < allowed.size(); ++t) {
    const State r = kinst.requests[t];
    std::fill(next.begin(), next.end(), kInfeasible);
    for (std::size_t code = 0; code < tuples; ++code) {
      if (is_infeasible(v[code])) continue;
      for (ServerId s : allowed[t]) {
        if (s >= k) throw StructuralError("server name out of range");
        const State at = (code / stride[s]) % n;
        const std::size_t to = code + (r - at) * stride[s];  // wraps correctly mod 2^64
        next[to] = std::min(next[to], v[code] + kinst.metric(at, r));
      }
    }
    v.swap(next);
  }
  return *std::ranges::min_element(v);
}

double kserver_opt(const KServerInstance& kinst) {
  std::vector<ServerId> all(kinst.k());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<std::vector<ServerId>> allowed(kinst.requests.size(), all);
  return restricted_opt(kinst, allowed);
}

double dyn_tilde_kserver(const KServerInstance& kinst,
                         std::span<const LazyPrediction> predictions) {
  if (predictions.empty()) throw StructuralError("need at least one predictor");
  std::vector<std::vector<ServerId>> allowed(kinst.requests.size());
  for (const auto& p : predictions) {
    if (p.size() != kinst.requests.size()) {
      throw StructuralError("prediction length differs from the request count");
    }
    for (std::size_t t = 0; t < p.size(); ++t) allowed[t].push_back(p[t]);
  }
  for (auto& a : allowed) {
    std::ranges::sort(a);
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return restricted_opt(kinst, allowed);
}

State ConfigurationMts::index_of(std::vector<State> positions) const {
  std::ranges::sort(positions);
  const auto it = std::ranges::lower_bound(configs, positions);
  if (it == configs.end() || *it != positions) {
    throw StructuralError("unknown configuration");
  }
  return static_cast<State>(it - configs.begin());
}

ConfigurationMts configuration_mts(const KServerInstance& kinst) {
  validate(kinst);
  const std::size_t n = kinst.metric.size();
  ConfigurationMts out;
  std::vector<State> cur;
  multisets(n, kinst.k(), 0, cur, out.configs);
  if (out.configs.size() > kConfigLimit) {
    throw SizeError("configuration space exceeds " + std::to_string(kConfigLimit));
  }
  const std::size_t c = out.configs.size();
  std::vector<std::vector<double>> dist(c, std::vector<double>(c, 0.0));
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = a + 1; b < c; ++b) {
      dist[a][b] = dist[b][a] = min_matching(kinst.metric, out.configs[a], out.configs[b]);
    }
  }
  out.instance.metric = MetricSpace(dist);
  out.instance.initial_state = out.index_of(kinst.initial);
  for (State r : kinst.requests) {
    CostVector cost(c);
    for (std::size_t a = 0; a < c; ++a) {
      cost[a] = std::ranges::find(out.configs[a], r) != out.configs[a].end() ? 0.0
                                                                             : kInfeasible;
    }
    out.instance.costs.push_back(std::move(cost));
  }
  return out;
}

PredictorTrace configuration_trace(const KServerInstance& kinst,
                                   const ConfigurationMts& cmts,
                                   std::span<const ServerId> names) {
  if (names.size() != kinst.requests.size()) {
    throw StructuralError("prediction length differs from the request count");
  }
  std::vector<State> pos = kinst.initial;
  PredictorTrace tr;
  for (std::size_t t = 0; t < names.size(); ++t) {
    if (names[t] >= kinst.k()) throw StructuralError("server name out of range");
    pos[names[t]] = kinst.requests[t];
    tr.states.push_back(cmts.index_of(pos));
  }
  return tr;
}

MtsInstance hole_encode(const MetricSpace& metric, State initial_hole,
                        std::span<const State> requests) {
  const std::size_t n = metric.size();
  if (n < 2) throw StructuralError("hole encoding needs k >= 1 and k+1 points");
  if (initial_hole >= n) throw StructuralError("initial hole out of range");
  MtsInstance inst;
  inst.metric = metric;
  inst.initial_state = initial_hole;
  for (State r : requests) {
    if (r >= n) throw StructuralError("request point out of range");
    CostVector c(n, 0.0);
    c[r] = kInfeasible;
    inst.costs.push_back(std::move(c));
  }
  return inst;
}

KServerInstance from_hole(const MetricSpace& metric, State initial_hole,
                          std::span<const State> requests) {
  if (initial_hole >= metric.size()) throw StructuralError("initial hole out of range");
  KServerInstance kinst{metric, {}, {requests.begin(), requests.end()}};
  for (State p = 0; p < metric.size(); ++p) {
    if (p != initial_hole) kinst.initial.push_back(p);
  }
  validate(kinst);
  return kinst;
}

}  // namespace mtsim::kserver
