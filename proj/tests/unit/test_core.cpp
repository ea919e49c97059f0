#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "mtsim/core.hpp"

namespace mtsim {
namespace {

// Two points at distance 1, start at point 0, c1 = (3, 0), c2 = (0, 3).
MtsInstance two_point() {
  return {MetricSpace::uniform(2), 0, {{3.0, 0.0}, {0.0, 3.0}}};
}

double brute_force_min(const MtsInstance& inst) {
  double best = kInfeasible;
  testgen::for_each_sequence(inst.metric.size(), inst.horizon(), [&](const auto& seq) {
    try {
      best = std::min(best, trajectory_cost(inst, seq).total);
    } catch (const InfeasibleTrajectoryError&) {
    }
  });
  return best;
}

TEST(ValidateMetric, UniformIsValid) {
  EXPECT_TRUE(validate_metric({{0, 1}, {1, 0}}, 2).empty());
}

TEST(ValidateMetric, Asymmetry) {
  const auto v = validate_metric({{0, 1}, {2, 0}}, 2);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, MetricViolation::Kind::kSymmetry);
}

TEST(ValidateMetric, TriangleViolationNamesTheTriple) {
  const auto v = validate_metric({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}, 3);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, MetricViolation::Kind::kTriangle);
  EXPECT_EQ(v[0].i, 0u);
  EXPECT_EQ(v[0].k, 1u);
  EXPECT_EQ(v[0].j, 2u);
}

TEST(ValidateMetric, TriangleCheckMatchesAllOrderedTriples) {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = testgen::between(rng, 2, 5);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = std::floor(uniform01(rng) * 6);
    }
    bool broken = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) broken |= d[i][j] > d[i][k] + d[k][j] + kTolerance;
      }
    }
    const auto v = validate_metric(d, n);
    const bool reported = std::ranges::any_of(
        v, [](const auto& x) { return x.kind == MetricViolation::Kind::kTriangle; });
    EXPECT_EQ(reported, broken);
  }
}

TEST(ValidateMetric, DimensionMismatchThrows) {
  EXPECT_THROW(validate_metric({{0, 1}, {1, 0}}, 3), StructuralError);
  EXPECT_THROW(validate_metric({{0, 1}, {1}}, 2), StructuralError);
  EXPECT_THROW(MetricSpace({{0, 1}, {2, 0}}), StructuralError);
}

TEST(MetricSpace, FactoriesAndDiameter) {
  const std::vector<double> xs = {0, 4, 10};
  const auto line = MetricSpace::line(xs);
  EXPECT_DOUBLE_EQ(line(0, 2), 10.0);
  EXPECT_DOUBLE_EQ(line.diameter(), 10.0);
  const auto u = MetricSpace::uniform(5);
  EXPECT_DOUBLE_EQ(u(1, 3), 1.0);
  EXPECT_DOUBLE_EQ(u(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(u.diameter(), 1.0);
}

TEST(TrajectoryCost, TwoPointExamples) {
  const auto inst = two_point();
  const std::vector<State> stay = {0, 0};
  EXPECT_DOUBLE_EQ(trajectory_cost(inst, stay).total, 3.0);
  const std::vector<State> dodge = {1, 0};
  const auto tr = trajectory_cost(inst, dodge);
  EXPECT_DOUBLE_EQ(tr.total, 2.0);
  EXPECT_DOUBLE_EQ(tr.steps[0].movement, 1.0);
  EXPECT_DOUBLE_EQ(tr.steps[0].service, 0.0);
  EXPECT_DOUBLE_EQ(tr.steps[1].movement, 1.0);
  EXPECT_DOUBLE_EQ(tr.steps[1].service, 0.0);
  EXPECT_DOUBLE_EQ(brute_force_min(inst), 2.0);
}

TEST(TrajectoryCost, ZeroCostsStayingIsFree) {
  MtsInstance inst{MetricSpace::uniform(3), 2, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  const std::vector<State> s = {2, 2, 2};
  EXPECT_DOUBLE_EQ(trajectory_cost(inst, s).total, 0.0);
}

TEST(TrajectoryCost, InfeasibleVisitReportsStep) {
  MtsInstance inst{MetricSpace::uniform(2), 0, {{0, 1}, {kInfeasible, 0}, {0, 0}}};
  const std::vector<State> s = {0, 0, 0};
  try {
    trajectory_cost(inst, s);
    FAIL() << "expected InfeasibleTrajectoryError";
  } catch (const InfeasibleTrajectoryError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(TrajectoryCost, LocalityProperty) {
  Rng rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const auto inst = testgen::random_instance(rng, {.max_n = 5, .max_T = 6});
    const std::size_t n = inst.metric.size();
    std::vector<State> a(inst.horizon());
    for (auto& s : a) s = uniform_index(rng, n);
    const std::size_t t = uniform_index(rng, inst.horizon());
    auto b = a;
    b[t] = uniform_index(rng, n);
    const State prev = t == 0 ? inst.initial_state : a[t - 1];
    auto local = [&](State x) {
      double v = inst.metric(prev, x) + inst.costs[t][x];
      if (t + 1 < a.size()) v += inst.metric(x, a[t + 1]);
      return v;
    };
    EXPECT_NEAR(trajectory_cost(inst, a).total - trajectory_cost(inst, b).total,
                local(a[t]) - local(b[t]), 1e-9);
  }
}

TEST(PredictorStepCost, Examples) {
  MtsInstance inst{MetricSpace::uniform(3), 0, {{0, 0.5, 1}}};
  EXPECT_DOUBLE_EQ(predictor_step_cost(inst, {{0}}, 0), 0.0);
  EXPECT_DOUBLE_EQ(predictor_step_cost(inst, {{1}}, 0), 1.5);

  const std::vector<double> xs = {0, 4, 10};
  MtsInstance line{MetricSpace::line(xs), 0, {{0, 2, 0}}};
  EXPECT_DOUBLE_EQ(predictor_step_cost(line, {{1}}, 0), 6.0);
}

TEST(PredictorStepCost, MovementIsFromPreviousSuggestion) {
  MtsInstance inst{MetricSpace::line(std::vector<double>{0, 1, 3}), 0, {{0, 0, 0}, {0, 0, 0}}};
  const PredictorTrace tr{{2, 1}};
  EXPECT_DOUBLE_EQ(predictor_step_cost(inst, tr, 0), 3.0);
  EXPECT_DOUBLE_EQ(predictor_step_cost(inst, tr, 1), 2.0);
  EXPECT_DOUBLE_EQ(predictor_total_cost(inst, tr), 5.0);
}

TEST(PredictorStepCost, InfeasibleSuggestion) {
  MtsInstance inst{MetricSpace::uniform(2), 0, {{0, kInfeasible}}};
  try {
    predictor_step_cost(inst, {{1}}, 0);
    FAIL() << "expected InfeasiblePredictorError";
  } catch (const InfeasiblePredictorError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
  EXPECT_TRUE(is_infeasible(predictor_step_cost_or_infeasible(inst, {{1}}, 0)));
  EXPECT_TRUE(is_infeasible(predictor_total_cost(inst, {{1}})));
}

TEST(NormalizeCosts, Examples) {
  MtsInstance inst{MetricSpace::uniform(3), 0, {{3, 5, 4}, {0, 7, 1}, {2, kInfeasible, 6}}};
  const auto norm = normalize_costs(inst);
  EXPECT_EQ(norm.instance.costs[0], (CostVector{0, 2, 1}));
  EXPECT_EQ(norm.instance.costs[1], (CostVector{0, 7, 1}));
  EXPECT_DOUBLE_EQ(norm.instance.costs[2][0], 0.0);
  EXPECT_TRUE(is_infeasible(norm.instance.costs[2][1]));
  EXPECT_DOUBLE_EQ(norm.instance.costs[2][2], 4.0);
  EXPECT_EQ(norm.offsets, (std::vector<double>{3, 0, 2}));
  EXPECT_DOUBLE_EQ(norm.total_offset(), 5.0);
}

TEST(NormalizeCosts, ShiftsEverySequenceByTheSameConstant) {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = testgen::random_instance(rng, {.max_n = 4, .max_T = 5, .infeasible_prob = 0.2});
    const auto norm = normalize_costs(inst);
    double best_old = kInfeasible, best_new = kInfeasible;
    testgen::for_each_sequence(inst.metric.size(), inst.horizon(), [&](const auto& seq) {
      double old_cost, new_cost;
      try {
        old_cost = trajectory_cost(inst, seq).total;
      } catch (const InfeasibleTrajectoryError&) {
        EXPECT_THROW(trajectory_cost(norm.instance, seq), InfeasibleTrajectoryError);
        return;
      }
      new_cost = trajectory_cost(norm.instance, seq).total;
      EXPECT_NEAR(old_cost - new_cost, norm.total_offset(), 1e-9);
      best_old = std::min(best_old, old_cost);
      best_new = std::min(best_new, new_cost);
    });
    EXPECT_NEAR(best_old - best_new, norm.total_offset(), 1e-9);
    EXPECT_NEAR(brute_force_min(norm.instance), best_new, 1e-9);
  }
}

TEST(CapPredictorCosts, Examples) {
  const auto low = cap_cost_table({{1.3}}, 2.0);
  EXPECT_DOUBLE_EQ(low.values[0][0], 1.3);
  EXPECT_FALSE(low.capped[0][0]);
  const auto high = cap_cost_table({{9.0}}, 4.0);
  EXPECT_DOUBLE_EQ(high.values[0][0], 4.0);
  EXPECT_TRUE(high.capped[0][0]);
  EXPECT_EQ(high.capped_count(), 1u);
}

TEST(CapPredictorCosts, UncappedTableEqualsRawCosts) {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = testgen::random_instance(rng, {.max_n = 5, .max_T = 8, .cost_max = 0.0});
    const auto traces = testgen::random_traces(rng, inst, 3);
    const auto table = cap_predictor_costs(inst, traces);
    EXPECT_DOUBLE_EQ(table.cap, 2.0 * inst.metric.diameter());
    EXPECT_EQ(table.capped_count(), 0u);
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      for (std::size_t i = 0; i < traces.size(); ++i) {
        EXPECT_DOUBLE_EQ(table.values[t][i], predictor_step_cost(inst, traces[i], t));
      }
    }
  }
}

TEST(CapPredictorCosts, Idempotent) {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = testgen::random_instance(rng, {.max_n = 4, .max_T = 6, .cost_max = 6.0});
    const auto traces = testgen::random_traces(rng, inst, 3);
    const auto once = cap_predictor_costs(normalize_costs(inst).instance, traces);
    const auto twice = cap_cost_table(once.values, once.cap);
    EXPECT_EQ(twice.values, once.values);
    EXPECT_EQ(twice.capped_count(), 0u);
  }
}

TEST(EarthMovers, TotalVariationOnUniformMetric) {
  const std::vector<double> p = {0.5, 0.5, 0.0}, q = {0.2, 0.3, 0.5};
  EXPECT_NEAR(earth_movers_uniform(p, q), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(earth_movers_uniform(p, p), 0.0);
}

TEST(ValidateInstance, RejectsDegenerateInput) {
  MtsInstance empty{MetricSpace::uniform(2), 0, {}};
  EXPECT_THROW(validate_instance(empty), StructuralError);
  MtsInstance all_inf{MetricSpace::uniform(2), 0, {{kInfeasible, kInfeasible}}};
  EXPECT_THROW(validate_instance(all_inf), StructuralError);
  MtsInstance bad_start{MetricSpace::uniform(2), 2, {{0, 0}}};
  EXPECT_THROW(validate_instance(bad_start), StructuralError);
  MtsInstance negative{MetricSpace::uniform(2), 0, {{-1, 0}}};
  EXPECT_THROW(validate_instance(negative), StructuralError);
  MtsInstance ok{MetricSpace::uniform(2), 0, {{0, kInfeasible}}};
  EXPECT_NO_THROW(validate_instance(ok));
  EXPECT_THROW(validate_trace(ok, {{0, 0}}), StructuralError);
  EXPECT_THROW(validate_trace(ok, {{2}}), StructuralError);
  EXPECT_NO_THROW(validate_trace(ok, {{1}}));
}

}  // namespace
}  // namespace mtsim
