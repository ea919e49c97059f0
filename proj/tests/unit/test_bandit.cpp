#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "mtsim/bandit.hpp"

namespace mtsim::bandit {
namespace {

// Normalized instance whose predictor costs never exceed 2D.
struct Setup {
  MtsInstance inst;
  std::vector<PredictorTrace> traces;
};

Setup small_setup(std::uint64_t seed, std::size_t ell = 3, std::size_t T = 40) {
  Rng rng(seed);
  Setup s;
  s.inst.metric = testgen::random_metric(rng, 4);
  s.inst.initial_state = 0;
  const double d = s.inst.metric.diameter();
  for (std::size_t t = 0; t < T; ++t) {
    CostVector c(4);
    for (auto& x : c) x = d * uniform01(rng);
    c[uniform_index(rng, 4)] = 0.0;
    s.inst.costs.push_back(c);
  }
  s.traces = testgen::random_traces(rng, s.inst, ell);
  return s;
}

BanditConfig diagnostic(double gamma) {
  BanditConfig cfg;
  cfg.gamma = gamma;
  cfg.strict_gamma = false;
  cfg.r = 4.0;
  return cfg;
}

TEST(GreedyState, Examples) {
  const auto line = MetricSpace::line(std::vector<double>{0, 1, 2});
  EXPECT_EQ(greedy_state(line, std::vector<double>{0.5, 0.2, 5}, 0), 0u);
  EXPECT_EQ(greedy_state(line, std::vector<double>{3, 0, 0}, 1), 1u);
  const auto u = MetricSpace::uniform(3);
  EXPECT_EQ(greedy_state(u, std::vector<double>{2, 1, 1}, 0), 0u);  // three-way tie
  EXPECT_EQ(greedy_state(u, std::vector<double>{2, 0.5, 0.5}, 0), 1u);
  EXPECT_EQ(greedy_state(u, std::vector<double>{kInfeasible, 0.5, 0}, 0), 2u);
}

TEST(EstimateLoss, Examples) {
  EXPECT_EQ(estimate_loss(1, 1.0, 2.0, 3), (CostVector{0, 0.25, 0}));
  EXPECT_EQ(estimate_loss(0, 4.0, 2.0, 2), (CostVector{1, 0}));
  EXPECT_THROW(estimate_loss(0, 4.5, 2.0, 2), ContractViolation);
  EXPECT_THROW(estimate_loss(2, 1.0, 2.0, 2), StructuralError);
}

TEST(EstimateLoss, UnbiasedUnderExploration) {
  Rng rng(5);
  const double gamma = 0.2, d = 1.0;
  const std::vector<double> f = {1.0, 2.0};
  constexpr int kN = 100000;
  std::vector<double> sum(2, 0.0), sq(2, 0.0);
  for (int k = 0; k < kN; ++k) {
    CostVector fhat(2, 0.0);
    if (bernoulli(rng, gamma)) {
      const std::size_t i = uniform_index(rng, 2);
      fhat = estimate_loss(i, f[i], d, 2);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      sum[i] += fhat[i];
      sq[i] += fhat[i] * fhat[i];
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const double mean = sum[i] / kN;
    const double se = std::sqrt((sq[i] / kN - mean * mean) / kN);
    EXPECT_NEAR(mean, gamma / (2.0 * d * 2.0) * f[i], 3.0 * se);
  }
}

TEST(PredictorOracle, EnforcesBudget) {
  const auto s = small_setup(1);
  PredictorOracle oracle(s.inst, s.traces);
  oracle.begin_step(3, 1);
  const auto obs = oracle.query(2);
  EXPECT_EQ(obs.state, s.traces[2].states[3]);
  EXPECT_DOUBLE_EQ(obs.cost, std::min(predictor_step_cost(s.inst, s.traces[2], 3),
                                      2.0 * s.inst.metric.diameter()));
  EXPECT_THROW(oracle.query(0), ContractViolation);
  oracle.begin_step(4, 2);
  oracle.query(0);
  oracle.query(1);
  EXPECT_EQ(oracle.queries_this_step(), 2u);
  EXPECT_THROW(oracle.query(0), ContractViolation);
}

TEST(BanditConfig, GammaRange) {
  BanditConfig cfg;
  cfg.gamma = 0.25;
  EXPECT_THROW(validate(cfg), StructuralError);
  cfg.gamma = 0.0;
  EXPECT_THROW(validate(cfg), StructuralError);
  cfg.gamma = 0.2;
  EXPECT_NO_THROW(validate(cfg));
  cfg.strict_gamma = false;
  cfg.gamma = 1.0;
  EXPECT_NO_THROW(validate(cfg));
  const auto e = BanditConfig::for_epsilon(0.5, 4);
  EXPECT_DOUBLE_EQ(e.gamma, 0.5 / 6.0);
  EXPECT_NEAR(e.r, unfair::unfair_rate_for_epsilon(0.5, 4, unfair::Algorithm::kShare), 1e-12);
}

TEST(BanditRun, NoExplorationFollowsOnePredictor) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = small_setup(seed);
    PredictorOracle oracle(s.inst, s.traces);
    Rng rng(seed);
    const auto run = bandit_combine_run(s.inst, oracle, diagnostic(0.0), rng);
    EXPECT_EQ(run.anchor_switches, 0u);
    const auto i = run.anchors.front();
    EXPECT_EQ(run.trajectory.states, s.traces[i].states);
    EXPECT_NEAR(run.trajectory.total, predictor_total_cost(s.inst, s.traces[i]), 1e-9);
  }
}

TEST(BanditRun, FullExplorationReturnsToStart) {
  const auto s = small_setup(7);
  PredictorOracle oracle(s.inst, s.traces);
  Rng rng(7);
  const auto run = bandit_combine_run(s.inst, oracle, diagnostic(1.0), rng);
  double expected = 0.0;
  for (std::size_t t = 0; t < s.inst.horizon(); ++t) {
    EXPECT_EQ(run.trajectory.end_states[t], s.inst.initial_state);
    const State g = greedy_state(s.inst.metric, s.inst.costs[t], s.inst.initial_state);
    EXPECT_EQ(run.trajectory.states[t], g);
    expected += 2.0 * s.inst.metric(s.inst.initial_state, g) + s.inst.costs[t][g];
  }
  EXPECT_NEAR(run.trajectory.total, expected, 1e-9);
}

TEST(BanditRun, QueryCountsAndAnchorDuringExploration) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = small_setup(100 + seed);
    auto cfg = BanditConfig::for_epsilon(1.0, s.traces.size());
    for (bool primed : {false, true}) {
      PredictorOracle oracle(s.inst, s.traces);
      Rng rng(seed);
      const auto run = primed ? bandit_combine_prime_run(s.inst, oracle, cfg, rng)
                              : bandit_combine_run(s.inst, oracle, cfg, rng);
      ASSERT_EQ(run.log.size(), s.inst.horizon());
      State prev_end = s.inst.initial_state;
      for (std::size_t t = 0; t < run.log.size(); ++t) {
        const bool explore = run.exploration[t];
        EXPECT_EQ(run.log[t].type == StepType::kExploration, explore);
        EXPECT_EQ(run.log[t].observations.size(), explore && primed ? 2u : 1u);
        if (explore && !primed) {
          EXPECT_EQ(run.trajectory.end_states[t], prev_end);
        }
        if (!explore) {
          EXPECT_EQ(run.log[t].observations[0].predictor, run.anchors[t]);
        }
        prev_end = run.trajectory.end_states[t];
      }
    }
  }
}

TEST(BanditRun, PrimedVariantAgreesWithoutExploration) {
  const auto s = small_setup(9);
  PredictorOracle o1(s.inst, s.traces), o2(s.inst, s.traces);
  Rng r1(3), r2(3);
  const auto a = bandit_combine_run(s.inst, o1, diagnostic(0.0), r1);
  const auto b = bandit_combine_prime_run(s.inst, o2, diagnostic(0.0), r2);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
  EXPECT_DOUBLE_EQ(a.trajectory.total, b.trajectory.total);
}

TEST(BanditRun, OriginalCostsAddTheOffsets) {
  Rng gen(12);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = testgen::random_instance(gen, {.max_n = 4, .max_T = 30, .cost_max = 5.0});
    const auto traces = testgen::random_traces(gen, inst, 3);
    const auto norm = normalize_costs(inst);
    const auto cfg = BanditConfig::for_epsilon(1.0, 3);
    Rng r1(rep), r2(rep);
    const auto orig = run_on_original(inst, traces, cfg, r1, false);
    PredictorOracle oracle(norm.instance, traces);
    const auto direct = bandit_combine_run(norm.instance, oracle, cfg, r2);
    EXPECT_NEAR(orig.trajectory.total, direct.trajectory.total + norm.total_offset(), 1e-9);
    // every realized step is at least the original instance's cost of the served state
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      EXPECT_GE(orig.trajectory.steps[t].service + 1e-9,
                inst.costs[t][orig.trajectory.states[t]]);
    }
  }
}

TEST(QueryLog, JsonLines) {
  const auto s = small_setup(4, 2, 10);
  PredictorOracle oracle(s.inst, s.traces);
  Rng rng(4);
  const auto run = bandit_combine_prime_run(s.inst, oracle, diagnostic(0.5), rng);
  std::istringstream in(query_log_to_jsonl(run.log));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    EXPECT_NE(line.find("\"t\":" + std::to_string(n)), std::string::npos);
    EXPECT_NE(line.find("\"queried\""), std::string::npos);
    ++n;
  }
  EXPECT_EQ(n, 10u);
}

}  // namespace
}  // namespace mtsim::bandit
