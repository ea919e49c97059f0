#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "mtsim/benchmarks.hpp"
#include "mtsim/kserver.hpp"

namespace mtsim::kserver {
namespace {

// Lazy simulation written out again so the library is checked against it.
double simulate(const KServerInstance& kinst, std::span<const ServerId> names) {
  std::vector<State> pos = kinst.initial;
  double cost = 0.0;
  for (std::size_t t = 0; t < names.size(); ++t) {
    cost += kinst.metric(pos[names[t]], kinst.requests[t]);
    pos[names[t]] = kinst.requests[t];
  }
  return cost;
}

// Minimum over every choice of one allowed name per request.
double enumerate_allowed(const KServerInstance& kinst,
                         const std::vector<std::vector<ServerId>>& allowed) {
  double best = kInfeasible;
  std::size_t width = 0;
  for (const auto& a : allowed) width = std::max(width, a.size());
  testgen::for_each_sequence(width, allowed.size(), [&](const std::vector<std::size_t>& pick) {
    std::vector<ServerId> names;
    for (std::size_t t = 0; t < allowed.size(); ++t) {
      if (pick[t] >= allowed[t].size()) return;
      names.push_back(allowed[t][pick[t]]);
    }
    best = std::min(best, simulate(kinst, names));
  });
  return best;
}

KServerInstance random_kinst(Rng& rng, std::size_t max_n, std::size_t max_T) {
  const std::size_t n = testgen::between(rng, 2, max_n);
  KServerInstance kinst{testgen::random_metric(rng, n), {}, {}};
  const std::size_t k = testgen::between(rng, 1, n - 1);
  for (std::size_t s = 0; s < k; ++s) kinst.initial.push_back(uniform_index(rng, n));
  const std::size_t T = testgen::between(rng, 1, max_T);
  for (std::size_t t = 0; t < T; ++t) kinst.requests.push_back(uniform_index(rng, n));
  return kinst;
}

std::vector<LazyPrediction> random_predictions(Rng& rng, const KServerInstance& kinst,
                                               std::size_t ell) {
  std::vector<LazyPrediction> out(ell);
  for (auto& p : out) {
    for (std::size_t t = 0; t < kinst.requests.size(); ++t) p.push_back(uniform_index(rng, kinst.k()));
  }
  return out;
}

TEST(LazyCost, Example) {
  const std::vector<double> xs = {0, 10, 90, 100};
  const KServerInstance kinst{MetricSpace::line(xs), {0, 3}, {1, 2}};
  const std::vector<ServerId> p1 = {0, 0}, p2 = {1, 1}, mixed = {0, 1};
  EXPECT_DOUBLE_EQ(lazy_cost(kinst, p1), 90.0);
  EXPECT_DOUBLE_EQ(lazy_cost(kinst, p2), 170.0);
  EXPECT_DOUBLE_EQ(lazy_cost(kinst, mixed), 20.0);
  const std::vector<ServerId> bad = {0, 2};
  EXPECT_THROW(lazy_cost(kinst, bad), StructuralError);
}

TEST(DynTilde, NamedServerExample) {
  const std::vector<double> xs = {0, 10, 90, 100};
  const KServerInstance kinst{MetricSpace::line(xs), {0, 3}, {1, 2}};
  const std::vector<LazyPrediction> preds = {{0, 0}, {1, 1}};
  EXPECT_DOUBLE_EQ(dyn_tilde_kserver(kinst, preds), 20.0);

  // Switching between the predictors' configurations: P1 to {10, 100}, then
  // P2's {0, 90} for 10 + 10 more.
  const auto cmts = configuration_mts(kinst);
  std::vector<PredictorTrace> traces;
  for (const auto& p : preds) traces.push_back(configuration_trace(kinst, cmts, p));
  const auto d = benchmarks::dyn(cmts.instance, traces);
  EXPECT_DOUBLE_EQ(d.value, 30.0);
  EXPECT_DOUBLE_EQ(benchmarks::brute_force_oracle(cmts.instance, traces, benchmarks::Variant::kDyn),
                   30.0);
  EXPECT_EQ(d.schedule.sigma, (std::vector<PredictorId>{0, 1}));
}

TEST(RestrictedOpt, MatchesEnumeration) {
  Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const auto kinst = random_kinst(rng, 5, 6);
    std::vector<std::vector<ServerId>> allowed(kinst.requests.size());
    for (auto& a : allowed) {
      for (ServerId s = 0; s < kinst.k(); ++s) {
        if (bernoulli(rng, 0.5)) a.push_back(s);
      }
      if (a.empty()) a.push_back(uniform_index(rng, kinst.k()));
    }
    EXPECT_NEAR(restricted_opt(kinst, allowed), enumerate_allowed(kinst, allowed), 1e-9);
  }
}

TEST(RestrictedOpt, EmptyAllowedSetIsInfeasible) {
  const KServerInstance kinst{MetricSpace::uniform(3), {0}, {1, 2}};
  const std::vector<std::vector<ServerId>> allowed = {{0}, {}};
  EXPECT_TRUE(is_infeasible(restricted_opt(kinst, allowed)));
}

TEST(DynTilde, SinglePredictorIsItsLazyCost) {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto kinst = random_kinst(rng, 5, 8);
    const auto preds = random_predictions(rng, kinst, 1);
    EXPECT_NEAR(dyn_tilde_kserver(kinst, preds), lazy_cost(kinst, preds[0]), 1e-9);
  }
}

TEST(DynTilde, BetweenOptAndEveryPredictor) {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto kinst = random_kinst(rng, 5, 7);
    const auto preds = random_predictions(rng, kinst, testgen::between(rng, 2, 3));
    const double dt = dyn_tilde_kserver(kinst, preds);
    EXPECT_LE(kserver_opt(kinst), dt + 1e-9);
    for (const auto& p : preds) EXPECT_LE(dt, lazy_cost(kinst, p) + 1e-9);
  }
}

TEST(KServerOpt, EqualsHoleEncodedOptimum) {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = testgen::between(rng, 2, 5);
    const auto metric = testgen::random_metric(rng, n);
    const State hole = uniform_index(rng, n);
    std::vector<State> requests;
    for (std::size_t t = testgen::between(rng, 1, 8); t > 0; --t) requests.push_back(uniform_index(rng, n));
    const auto kinst = from_hole(metric, hole, requests);
    const auto mts = hole_encode(metric, hole, requests);
    EXPECT_NEAR(kserver_opt(kinst), benchmarks::offline_opt(mts).value, 1e-9);
  }
}

TEST(ConfigurationMts, SizeAndCosts) {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto kinst = random_kinst(rng, 5, 5);
    const auto cmts = configuration_mts(kinst);
    const std::size_t n = kinst.metric.size(), k = kinst.k();
    // C(n + k - 1, k)
    std::size_t expected = 1;
    for (std::size_t i = 1; i <= k; ++i) expected = expected * (n + k - i) / i;
    EXPECT_EQ(cmts.configs.size(), expected);
    EXPECT_TRUE(std::ranges::is_sorted(cmts.configs));
    EXPECT_EQ(cmts.configs[cmts.instance.initial_state], [&] {
      auto s = kinst.initial;
      std::ranges::sort(s);
      return s;
    }());
    for (std::size_t t = 0; t < kinst.requests.size(); ++t) {
      for (std::size_t a = 0; a < cmts.configs.size(); ++a) {
        const bool covers = std::ranges::count(cmts.configs[a], kinst.requests[t]) > 0;
        EXPECT_EQ(is_infeasible(cmts.instance.costs[t][a]), !covers);
      }
    }
  }
}

TEST(ConfigurationMts, MatchingDistance) {
  const std::vector<double> xs = {0, 1, 3};
  const KServerInstance kinst{MetricSpace::line(xs), {0, 1}, {2}};
  const auto cmts = configuration_mts(kinst);
  const auto a = cmts.index_of({0, 1});
  const auto b = cmts.index_of({1, 2});
  const auto c = cmts.index_of({2, 2});
  EXPECT_DOUBLE_EQ(cmts.instance.metric(a, b), 3.0);  // 0 -> 3 leaves 1 in place
  EXPECT_DOUBLE_EQ(cmts.instance.metric(a, c), 5.0);
  EXPECT_THROW(cmts.index_of({0, 5}), StructuralError);
}

TEST(ConfigurationMts, LazyTraceCostsTheLazyCost) {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const auto kinst = random_kinst(rng, 5, 8);
    const auto cmts = configuration_mts(kinst);
    const auto pred = random_predictions(rng, kinst, 1)[0];
    const auto tr = configuration_trace(kinst, cmts, pred);
    // One element changes per step and the matching of {a} + M to {r} + M
    // never beats d(a, r), so the configuration path costs exactly the same.
    EXPECT_NEAR(trajectory_cost(cmts.instance, tr.states).total, lazy_cost(kinst, pred), 1e-9);
  }
}

TEST(HoleEncoding, Example) {
  const std::vector<double> xs = {0, 1, 3};
  const std::vector<State> req = {1};
  const auto inst = hole_encode(MetricSpace::line(xs), 0, req);
  ASSERT_EQ(inst.costs.size(), 1u);
  EXPECT_DOUBLE_EQ(inst.costs[0][0], 0.0);
  EXPECT_TRUE(is_infeasible(inst.costs[0][1]));
  EXPECT_DOUBLE_EQ(inst.costs[0][2], 0.0);
  EXPECT_EQ(inst.initial_state, 0u);

  const auto kinst = from_hole(MetricSpace::line(xs), 0, req);
  EXPECT_EQ(kinst.initial, (std::vector<State>{1, 2}));
  EXPECT_EQ(kinst.requests, req);
  EXPECT_THROW(hole_encode(MetricSpace::line(xs), 3, req), StructuralError);
}

TEST(Validate, Errors) {
  EXPECT_THROW(validate(KServerInstance{MetricSpace::uniform(2), {}, {0}}), StructuralError);
  EXPECT_THROW(validate(KServerInstance{MetricSpace::uniform(2), {2}, {0}}), StructuralError);
  EXPECT_THROW(validate(KServerInstance{MetricSpace::uniform(2), {0}, {3}}), StructuralError);
  KServerInstance big{MetricSpace::uniform(40), {}, {0}};
  for (State s = 0; s < 5; ++s) big.initial.push_back(s);
  const std::vector<std::vector<ServerId>> allowed = {{0}};
  EXPECT_THROW(restricted_opt(big, allowed), SizeError);
}

}  // namespace
}  // namespace mtsim::kserver
