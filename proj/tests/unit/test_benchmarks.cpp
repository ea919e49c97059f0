#include <gtest/gtest.h>

#include <json.hpp>

#include <limits>
#include <sstream>

#include "generators.hpp"
#include "mtsim/benchmarks.hpp"
#include "mtsim/instances.hpp"

namespace mtsim::benchmarks {
namespace {

MtsInstance two_point() { return {MetricSpace::uniform(2), 0, {{3.0, 0.0}, {0.0, 3.0}}}; }

std::vector<PredictorTrace> fixed_traces(std::size_t ell, std::size_t T) {
  std::vector<PredictorTrace> out(ell);
  for (std::size_t i = 0; i < ell; ++i) out[i].states.assign(T, i);
  return out;
}

// Cost of a state sequence, kInfeasible on any INFEASIBLE visit.
double path_cost(const MtsInstance& inst, std::span<const State> states) {
  double total = 0.0;
  State prev = inst.initial_state;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const double c = inst.costs[t][states[t]];
    if (is_infeasible(c)) return kInfeasible;
    total += inst.metric(prev, states[t]) + c;
    prev = states[t];
  }
  return total;
}

struct Enumerated {
  double dyn = kInfeasible;
  std::vector<double> dyn_m;  // indexed by switch count, then prefix-min
};

// Enumerates every schedule in [ell]^T independently of the library.
Enumerated enumerate_schedules(const MtsInstance& inst, std::span<const PredictorTrace> traces) {
  const std::size_t T = inst.horizon();
  Enumerated out;
  out.dyn_m.assign(T, kInfeasible);
  testgen::for_each_sequence(traces.size(), T, [&](const std::vector<std::size_t>& sigma) {
    std::vector<State> states(T);
    for (std::size_t t = 0; t < T; ++t) states[t] = traces[sigma[t]].states[t];
    const double c = path_cost(inst, states);
    out.dyn = std::min(out.dyn, c);
    const std::size_t sw = count_switches(sigma);
    out.dyn_m[sw] = std::min(out.dyn_m[sw], c);
  });
  for (std::size_t m = 1; m < T; ++m) out.dyn_m[m] = std::min(out.dyn_m[m], out.dyn_m[m - 1]);
  return out;
}

double enumerate_rho(const MtsInstance& inst, std::span<const PredictorTrace> traces,
                     double rho, bool charge_full) {
  const std::size_t T = inst.horizon();
  double best = kInfeasible;
  testgen::for_each_sequence(traces.size(), T, [&](const std::vector<std::size_t>& sigma) {
    double total = 0.0;
    for (std::size_t t = 0; t < T && !is_infeasible(total); ++t) {
      const auto& tr = traces[sigma[t]];
      const double f = predictor_step_cost_or_infeasible(inst, tr, t);
      if (t > 0 && sigma[t] != sigma[t - 1]) {
        const double c = charge_full ? f : inst.costs[t][tr.states[t]];
        total = is_infeasible(c) ? kInfeasible : total + rho + c;
      } else {
        total = is_infeasible(f) ? kInfeasible : total + f;
      }
    }
    best = std::min(best, total);
  });
  return best;
}

double enumerate_opt(const MtsInstance& inst) {
  double best = kInfeasible;
  testgen::for_each_sequence(inst.metric.size(), inst.horizon(),
                             [&](const std::vector<std::size_t>& s) {
                               best = std::min(best, path_cost(inst, s));
                             });
  return best;
}

TEST(TwoPoint, Examples) {
  const auto inst = two_point();
  const auto traces = fixed_traces(2, 2);
  const auto d = dyn(inst, traces);
  EXPECT_DOUBLE_EQ(d.value, 2.0);
  EXPECT_EQ(d.schedule.sigma, (std::vector<PredictorId>{1, 0}));
  EXPECT_EQ(d.schedule.switches, 1u);
  EXPECT_DOUBLE_EQ(dyn_limited(inst, traces, 0).value, 3.0);
  EXPECT_DOUBLE_EQ(dyn_limited(inst, traces, 1).value, 2.0);
  EXPECT_DOUBLE_EQ(dyn_rho(inst, traces, 5.0).value, 3.0);
  EXPECT_DOUBLE_EQ(dyn_rho(inst, traces, 0.0).value, 1.0);
  EXPECT_DOUBLE_EQ(offline_opt(inst).value, 2.0);
  EXPECT_EQ(offline_opt(inst).states, (std::vector<State>{1, 0}));
}

TEST(SinglePredictor, AllBenchmarksAgree) {
  Rng gen(1);
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = testgen::random_instance(gen, {.max_n = 4, .max_T = 8});
    const auto traces = testgen::random_traces(gen, inst, 1);
    const double f = predictor_total_cost(inst, traces[0]);
    EXPECT_DOUBLE_EQ(dyn(inst, traces).value, f);
    EXPECT_DOUBLE_EQ(dyn_limited(inst, traces, 0).value, f);
    EXPECT_DOUBLE_EQ(dyn_rho(inst, traces, 3.0).value, f);
  }
}

TEST(BruteForce, DynamicProgramsMatchEnumeration) {
  Rng gen(2);
  for (int rep = 0; rep < 250; ++rep) {
    const auto inst = testgen::random_instance(gen, {.max_n = 4, .max_T = 6, .infeasible_prob = 0.15});
    const std::size_t ell = testgen::between(gen, 1, 3);
    const auto traces = testgen::random_traces(gen, inst, ell);
    const auto ref = enumerate_schedules(inst, traces);
    const double opt = enumerate_opt(inst);
    EXPECT_DOUBLE_EQ(offline_opt(inst).value, opt);
    EXPECT_DOUBLE_EQ(brute_force_oracle(inst, traces, Variant::kOpt), opt);
    if (is_infeasible(ref.dyn)) {
      EXPECT_THROW(dyn(inst, traces), InfeasibleBenchmarkError);
      EXPECT_TRUE(is_infeasible(brute_force_oracle(inst, traces, Variant::kDyn)));
      continue;
    }
    const auto d = dyn(inst, traces);
    EXPECT_DOUBLE_EQ(d.value, ref.dyn);
    EXPECT_DOUBLE_EQ(path_cost(inst, [&] {
                       std::vector<State> s;
                       for (std::size_t t = 0; t < inst.horizon(); ++t)
                         s.push_back(traces[d.schedule.sigma[t]].states[t]);
                       return s;
                     }()),
                     d.value);
    EXPECT_DOUBLE_EQ(brute_force_oracle(inst, traces, Variant::kDyn), ref.dyn);
    for (std::size_t m = 0; m < inst.horizon(); ++m) {
      const double want = ref.dyn_m[m];
      if (is_infeasible(want)) {
        EXPECT_THROW(dyn_limited(inst, traces, m), InfeasibleBenchmarkError);
      } else {
        const auto r = dyn_limited(inst, traces, m);
        EXPECT_DOUBLE_EQ(r.value, want);
        EXPECT_LE(r.schedule.switches, m);
      }
      EXPECT_DOUBLE_EQ(brute_force_oracle(inst, traces, Variant::kDynLimited, {.m = m}), want);
    }
    const double D = inst.metric.diameter();
    for (double rho : {0.0, 0.5, D, 2.0 * D * 3.0}) {
      for (bool full : {false, true}) {
        const double want = enumerate_rho(inst, traces, rho, full);
        EXPECT_DOUBLE_EQ(brute_force_oracle(inst, traces, Variant::kDynRho,
                                            {.rho = rho, .charge_full = full}),
                         want);
        if (is_infeasible(want)) continue;
        EXPECT_NEAR(dyn_rho(inst, traces, rho, full).value, want, 1e-9);
      }
    }
  }
}

TEST(Ordering, BenchmarksChain) {
  Rng gen(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = testgen::random_instance(gen, {.max_n = 5, .max_T = 10});
    const auto traces = testgen::random_traces(gen, inst, testgen::between(gen, 2, 4));
    const double opt = offline_opt(inst).value;
    const double d = dyn(inst, traces).value;
    EXPECT_LE(opt, d + 1e-9);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < inst.horizon(); ++m) {
      const double v = dyn_limited(inst, traces, m).value;
      EXPECT_LE(v, prev + 1e-9);
      EXPECT_LE(d, v + 1e-9);
      prev = v;
    }
    EXPECT_NEAR(prev, d, 1e-9);
    double best_single = kInfeasible;
    for (const auto& tr : traces) best_single = std::min(best_single, predictor_total_cost(inst, tr));
    EXPECT_NEAR(dyn_limited(inst, traces, 0).value, best_single, 1e-9);
    double last = 0.0;
    for (double rho : {0.0, 0.5, 1.0, 4.0, 100.0}) {
      const double v = dyn_rho(inst, traces, rho).value;
      EXPECT_GE(v + 1e-9, last);
      EXPECT_LE(v, best_single + 1e-9);
      last = v;
    }
  }
}

TEST(Infeasible, AllPredictorsBlocked) {
  MtsInstance inst{MetricSpace::uniform(2), 0, {{kInfeasible, 0.0}}};
  const std::vector<PredictorTrace> traces = {{{0}}};
  EXPECT_THROW(dyn(inst, traces), InfeasibleBenchmarkError);
  EXPECT_THROW(dyn_limited(inst, traces, 0), InfeasibleBenchmarkError);
  EXPECT_THROW(dyn_rho(inst, traces, 1.0), InfeasibleBenchmarkError);
  EXPECT_DOUBLE_EQ(offline_opt(inst).value, 1.0);
}

TEST(SizeGuard, OracleRefusesLargeInputs) {
  Rng gen(4);
  MtsInstance inst;
  inst.metric = MetricSpace::uniform(4);
  inst.costs.assign(12, CostVector(4, 1.0));
  const auto traces = testgen::random_traces(gen, inst, 4);
  EXPECT_THROW(brute_force_oracle(inst, traces, Variant::kDyn), SizeError);
  EXPECT_THROW(brute_force_oracle(inst, traces, Variant::kOpt), SizeError);
}

TEST(CouponStrategy, Examples) {
  const std::vector<std::size_t> sigma = {0, 0, 1};
  const auto c = instances::coupon_instance(2, 0.5, sigma, 1);
  const auto r = coupon_offline_strategy(c.instance, c.sigma, 1);
  EXPECT_DOUBLE_EQ(r.cost, 1.75);
  EXPECT_EQ(r.switch_steps, (std::vector<std::size_t>{2}));
  EXPECT_EQ(r.schedule.sigma, (std::vector<PredictorId>{1, 1, 0}));

  const std::vector<std::size_t> never(7, 0);
  const auto c2 = instances::coupon_instance(2, 0.5, never, 1);
  const auto r2 = coupon_offline_strategy(c2.instance, c2.sigma, 3);
  EXPECT_DOUBLE_EQ(r2.cost, 7 * 0.25);
  EXPECT_EQ(r2.schedule.switches, 0u);
}

TEST(CouponStrategy, NeverBeatsSwitchLimitedBenchmark) {
  Rng gen(5);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t ell = testgen::between(gen, 2, 4);
    const std::size_t T = testgen::between(gen, 1, 20);
    instances::CouponParams p{.ell = ell, .T = T, .alpha = 0.25 + 0.75 * uniform01(gen),
                              .seed = gen(), .initial_state = uniform_index(gen, ell)};
    const auto c = instances::gen_coupon_lb(p);
    for (std::size_t m : {0u, 1u, 3u}) {
      if (m >= T) continue;
      const auto r = coupon_offline_strategy(c.instance, c.sigma, m);
      EXPECT_LE(r.schedule.switches, m);
      EXPECT_GE(r.cost + 1e-9, dyn_limited(c.instance, c.traces, m).value);
    }
  }
}

TEST(CouponStrategy, RejectsMismatchedCosts) {
  const std::vector<std::size_t> sigma = {0, 1};
  const auto c = instances::coupon_instance(2, 0.5, sigma);
  const std::vector<std::size_t> wrong = {1, 1};
  EXPECT_THROW(coupon_offline_strategy(c.instance, wrong, 1), StructuralError);
}

TEST(Report, CsvAndJson) {
  const auto inst = two_point();
  const auto traces = fixed_traces(2, 2);
  const std::vector<std::size_t> ms = {0, 1};
  const std::vector<double> rhos = {5.0};
  const auto rep = compute_report(inst, traces, ms, rhos);
  EXPECT_DOUBLE_EQ(rep.dyn.value, 2.0);
  ASSERT_EQ(rep.dyn_m.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.dyn_m[0].second.value, 3.0);
  EXPECT_DOUBLE_EQ(rep.dyn_rho[0].second.value, 3.0);

  std::istringstream csv(rep.to_csv("two"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "instance_id,benchmark,param,value,argmin_switches");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    EXPECT_EQ(line.rfind("two,", 0), 0u) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 5u);  // dyn, two dyn_m, one dyn_rho, opt

  const auto doc = nlohmann::json::parse(rep.to_json("two"));
  EXPECT_EQ(doc.dump().find("\"two\"") != std::string::npos, true);
}

}  // namespace
}  // namespace mtsim::benchmarks
