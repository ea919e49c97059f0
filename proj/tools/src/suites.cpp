#include "mtsim_tools/suites.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ranges>
#include <sstream>
#include <stdexcept>

#include "mtsim/bandit.hpp"
#include "mtsim/benchmarks.hpp"
#include "mtsim/combine.hpp"
#include "mtsim/instances.hpp"
#include "mtsim/kserver.hpp"
#include "mtsim/unfair.hpp"
#include "mtsim_tools/cli.hpp"
#include "mtsim_tools/stats.hpp"

namespace mtsim::tools {

namespace {

namespace bm = mtsim::benchmarks;
namespace inst_gen = mtsim::instances;

bool close(double a, double b, double tol = 1e-9) {
  if (is_infeasible(a) || is_infeasible(b)) return a == b;
  return std::abs(a - b) <= tol;
}

template <class F>
double or_infeasible(F&& f) {
  try {
    return f();
  } catch (const InfeasibleBenchmarkError&) {
    return kInfeasible;
  }
}

std::vector<PredictorTrace> random_traces(const MtsInstance& inst, std::size_t ell, Rng& rng) {
  std::vector<PredictorTrace> out(ell);
  for (auto& tr : out) {
    for (std::size_t t = 0; t < inst.horizon(); ++t) {
      tr.states.push_back(uniform_index(rng, inst.metric.size()));
    }
  }
  return out;
}

// One predictor of each synthetic kind, cycling if ell > 4.
std::vector<PredictorTrace> mixed_predictors(const MtsInstance& inst, std::size_t ell,
                                             Rng& rng) {
  using inst_gen::PredictorKind;
  const PredictorKind kinds[] = {PredictorKind::kFixedState, PredictorKind::kNoisyOpt,
                                 PredictorKind::kGreedy, PredictorKind::kLazyRandom};
  std::vector<PredictorTrace> out;
  for (std::size_t i = 0; i < ell; ++i) {
    inst_gen::PredictorParams p;
    p.fixed_points = {uniform_index(rng, inst.metric.size())};
    p.p_noise = 0.2;
    p.threshold = 0.5;
    out.push_back(inst_gen::gen_predictors(inst, kinds[i % 4], 1, p, rng).front());
  }
  return out;
}

MtsInstance prefix(const MtsInstance& inst, std::size_t length) {
  MtsInstance out = inst;
  out.costs.resize(length);
  return out;
}

std::vector<PredictorTrace> prefix(std::span<const PredictorTrace> traces, std::size_t length) {
  std::vector<PredictorTrace> out(traces.begin(), traces.end());
  for (auto& tr : out) tr.states.resize(length);
  return out;
}

// ---- 1 ----

CriterionResult dp_oracle() {
  CriterionResult res;
  Rng rng(0x5eed0001);
  std::size_t checks = 0, mismatches = 0, infeasible = 0;
  std::string first;
  auto check = [&](double got, double want, const std::string& what) {
    ++checks;
    if (!close(got, want)) {
      if (mismatches++ == 0) first = fmt::format("{}: dp={} oracle={}", what, got, want);
    }
  };
  for (std::size_t k = 0; k < 1000; ++k) {
    inst_gen::RandomMtsParams p;
    p.n = 2 + uniform_index(rng, 3);
    p.T = 1 + uniform_index(rng, 6);
    p.cost_max = 5.0;
    p.infeasible_prob = k % 4 == 0 ? 0.3 : 0.0;
    MtsInstance inst = inst_gen::gen_random_mts(p, rng);
    inst.initial_state = uniform_index(rng, p.n);
    const std::size_t ell = 1 + uniform_index(rng, 3);
    const auto traces = random_traces(inst, ell, rng);
    const std::string tag = fmt::format("instance {}", k);

    const double d = or_infeasible([&] { return bm::dyn(inst, traces).value; });
    infeasible += is_infeasible(d);
    check(d, bm::brute_force_oracle(inst, traces, bm::Variant::kDyn), tag + " dyn");
    for (std::size_t m = 0; m <= p.T; ++m) {
      check(or_infeasible([&] { return bm::dyn_limited(inst, traces, m).value; }),
            bm::brute_force_oracle(inst, traces, bm::Variant::kDynLimited, {.m = m}),
            tag + fmt::format(" dyn_limited m={}", m));
    }
    for (double rho : {0.0, 1.0, 5.0}) {
      check(or_infeasible([&] { return bm::dyn_rho(inst, traces, rho).value; }),
            bm::brute_force_oracle(inst, traces, bm::Variant::kDynRho, {.rho = rho}),
            tag + fmt::format(" dyn_rho rho={}", rho));
    }
    check(bm::offline_opt(inst).value, bm::brute_force_oracle(inst, {}, bm::Variant::kOpt),
          tag + " opt");
  }
  res.passed = mismatches == 0;
  res.details.push_back(fmt::format("{} comparisons, {} mismatches, {} instances without a "
                                    "feasible schedule",
                                    checks, mismatches, infeasible));
  if (!first.empty()) res.details.push_back("first mismatch: " + first);
  return res;
}

// ---- 2, 3 ----

CriterionResult unfair_ratio(unfair::Algorithm alg) {
  CriterionResult res;
  res.passed = true;
  constexpr std::size_t kInstances = 50, kHorizon = 200;
  for (std::size_t ell : {2, 4, 8}) {
    for (double r : {1.0, 5.0, 20.0}) {
      Rng rng(0x5eed0200 + ell * 100 + static_cast<std::size_t>(r));
      std::vector<double> alg_sum(10, 0.0), opt_sum(10, 0.0);
      for (std::size_t k = 0; k < kInstances; ++k) {
        unfair::UnfairUniformInstance inst;
        inst.ell = ell;
        inst.r = r;
        inst.initial_state = 0;
        for (std::size_t t = 0; t < kHorizon; ++t) {
          CostVector c(ell);
          for (auto& x : c) x = uniform01(rng);
          inst.costs.push_back(std::move(c));
        }
        std::unique_ptr<unfair::Runner> runner;
        if (alg == unfair::Algorithm::kOddExponent) {
          runner = std::make_unique<unfair::OddExponent>(ell, r, State{0});
        } else {
          runner = std::make_unique<unfair::Share>(unfair::Share::for_rate(ell, r, State{0}));
        }
        const auto run = unfair::run_expected(*runner, inst);
        const auto opt = unfair::unfair_opt(inst);
        for (std::size_t p = 0; p < 10; ++p) {
          const std::size_t len = (p + 1) * kHorizon / 10;
          alg_sum[p] += run.prefix_totals[len - 1];
          opt_sum[p] += opt.prefix_values[len - 1];
        }
      }
      std::vector<double> x, y;
      for (std::size_t p = 0; p < 10; ++p) {
        x.push_back(opt_sum[p] / kInstances);
        y.push_back(alg_sum[p] / kInstances);
      }
      const double bound = alg == unfair::Algorithm::kOddExponent
                               ? unfair::odd_exponent_ratio(ell, r)
                               : unfair::share_ratio(ell, r);
      const LinearFit fit = least_squares(x, y);
      const bool ok = fit.slope <= 1.1 * bound;
      res.passed = res.passed && ok;
      res.details.push_back(fmt::format(
          "ell={} r={:<2} slope={:.4f} bound={:.4f} C_fit={:.4f} mean_cost={:.3f} "
          "mean_opt={:.3f} {}",
          ell, r, fit.slope, bound, additive_constant(x, y, bound), y.back(), x.back(),
          ok ? "ok" : "SLOPE TOO HIGH"));
    }
  }
  return res;
}

// ---- 4 ----

CriterionResult combine_vs_dyn_m() {
  CriterionResult res;
  res.passed = true;
  constexpr std::size_t kInstances = 100, kHorizon = 2000, kEll = 4;
  for (double eps : {0.5, 1.0}) {
    std::vector<double> alg_sum(10, 0.0), bench_sum(10, 0.0);
    double m_total = 0.0;
    for (std::size_t k = 0; k < kInstances; ++k) {
      Rng rng(0x5eed0400 + k);
      inst_gen::RandomMtsParams p;
      p.n = 6;
      p.T = kHorizon;
      p.diameter = 1.0;
      const MtsInstance inst = inst_gen::gen_random_mts(p, rng);
      const auto traces = mixed_predictors(inst, kEll, rng);
      combine::CombineConfig cfg;
      cfg.epsilon = eps;
      cfg.subroutine = unfair::Algorithm::kOddExponent;
      const auto run = combine::combine_run(inst, traces, cfg, rng);
      double running = 0.0;
      std::vector<double> cost_prefix;
      for (const auto& s : run.trajectory.steps) cost_prefix.push_back(running += s.total());
      for (std::size_t q = 0; q < 10; ++q) {
        const std::size_t len = (q + 1) * kHorizon / 10;
        const MtsInstance sub = prefix(inst, len);
        const auto sub_traces = prefix(traces, len);
        const double d = bm::dyn(sub, sub_traces).value;
        const std::size_t m = combine::switch_budget(eps, 1.0, kEll, d);
        alg_sum[q] += cost_prefix[len - 1];
        bench_sum[q] += bm::dyn_limited(sub, sub_traces, m).value;
        if (q == 9) m_total += static_cast<double>(m);
      }
    }
    std::vector<double> x, y;
    for (std::size_t q = 0; q < 10; ++q) {
      x.push_back(bench_sum[q] / kInstances);
      y.push_back(alg_sum[q] / kInstances);
    }
    const double bound = (1.0 + eps) * (1.0 + eps);
    const LinearFit fit = least_squares(x, y);
    const bool ok = fit.slope <= 1.1 * bound;
    res.passed = res.passed && ok;
    res.details.push_back(fmt::format(
        "eps={} slope={:.4f} bound={:.4f} C_fit={:.3f} mean_cost={:.2f} mean_dyn_m={:.2f} "
        "mean_m={:.1f} {}",
        eps, fit.slope, bound, additive_constant(x, y, bound), y.back(), x.back(),
        m_total / kInstances, ok ? "ok" : "SLOPE TOO HIGH"));
  }
  return res;
}

// ---- 5 ----

constexpr std::size_t kCouponEll = 16;
constexpr double kCouponAlpha = 0.1;
constexpr std::size_t kCouponHorizon = 100000;
constexpr std::size_t kCouponSeeds = 20;

inst_gen::CouponInstance coupon_for_seed(std::size_t s) {
  return inst_gen::gen_coupon_lb(
      {.ell = kCouponEll, .T = kCouponHorizon, .alpha = kCouponAlpha, .seed = 0x5eed0500 + s});
}

std::size_t coupon_switch_budget() {
  const double ell = kCouponEll;
  return static_cast<std::size_t>(4.0 * kCouponHorizon / (ell * std::log(ell)));
}

CriterionResult coupon_algorithms() {
  CriterionResult res;
  res.passed = true;
  const double threshold = 0.95 * kCouponHorizon / kCouponEll;
  struct Algo {
    const char* name;
    std::function<double(const inst_gen::CouponInstance&, Rng&)> run;
  };
  const std::vector<Algo> algos = {
      {"combine/oddexponent",
       [](const inst_gen::CouponInstance& ci, Rng& rng) {
         combine::CombineConfig cfg;
         cfg.subroutine = unfair::Algorithm::kOddExponent;
         return combine::combine_run(ci.instance, ci.traces, cfg, rng).trajectory.total;
       }},
      {"combine/share",
       [](const inst_gen::CouponInstance& ci, Rng& rng) {
         combine::CombineConfig cfg;
         cfg.subroutine = unfair::Algorithm::kShare;
         return combine::combine_run(ci.instance, ci.traces, cfg, rng).trajectory.total;
       }},
      {"bandit",
       [](const inst_gen::CouponInstance& ci, Rng& rng) {
         const auto cfg = bandit::BanditConfig::for_epsilon(1.0, kCouponEll);
         return bandit::run_on_original(ci.instance, ci.traces, cfg, rng, false)
             .trajectory.total;
       }},
      {"bandit-prime",
       [](const inst_gen::CouponInstance& ci, Rng& rng) {
         const auto cfg = bandit::BanditConfig::for_epsilon(1.0, kCouponEll);
         return bandit::run_on_original(ci.instance, ci.traces, cfg, rng, true)
             .trajectory.total;
       }},
  };
  std::vector<std::vector<double>> costs(algos.size());
  for (std::size_t s = 0; s < kCouponSeeds; ++s) {
    const auto ci = coupon_for_seed(s);
    for (std::size_t a = 0; a < algos.size(); ++a) {
      Rng rng(0xa160 + s);
      costs[a].push_back(algos[a].run(ci, rng));
    }
  }
  for (std::size_t a = 0; a < algos.size(); ++a) {
    const double m = mean(costs[a]);
    const bool ok = m >= threshold;
    res.passed = res.passed && ok;
    res.details.push_back(fmt::format("{:<20} mean cost {:.1f} (threshold 0.95 T/ell = {:.1f}) {}",
                                      algos[a].name, m, threshold, ok ? "ok" : "BELOW"));
  }
  return res;
}

CriterionResult coupon_gap() {
  CriterionResult res;
  std::vector<double> gaps;
  for (std::size_t s = 0; s < kCouponSeeds; ++s) {
    const auto ci = coupon_for_seed(s);
    const auto strat = bm::coupon_offline_strategy(ci.instance, ci.sigma, coupon_switch_budget());
    for (std::size_t i = 1; i < strat.switch_steps.size(); ++i) {
      gaps.push_back(static_cast<double>(strat.switch_steps[i] - strat.switch_steps[i - 1]));
    }
  }
  double harmonic = 0.0;
  for (std::size_t i = 1; i < kCouponEll; ++i) harmonic += 1.0 / static_cast<double>(i);
  const double ell = kCouponEll;
  const double expected = ell * harmonic;
  const double lower = ell * std::log(ell);
  const double g = mean(gaps);
  const bool within = std::abs(g - expected) <= 0.05 * expected;
  res.passed = within && g >= lower;
  res.details.push_back(fmt::format(
      "{} gaps, mean {:.3f}; ell*H(ell-1) = {:.3f} (5% band [{:.3f}, {:.3f}]); "
      "ell*ln(ell) = {:.3f}",
      gaps.size(), g, expected, 0.95 * expected, 1.05 * expected, lower));
  return res;
}

CriterionResult coupon_strategy_cost() {
  CriterionResult res;
  const std::size_t m = coupon_switch_budget();
  std::vector<double> costs, switches;
  for (std::size_t s = 0; s < kCouponSeeds; ++s) {
    const auto ci = coupon_for_seed(s);
    const auto strat = bm::coupon_offline_strategy(ci.instance, ci.sigma, m);
    costs.push_back(strat.cost);
    switches.push_back(static_cast<double>(strat.switch_steps.size()));
  }
  const double target = 3.0 * kCouponAlpha * kCouponHorizon / kCouponEll;
  const double c = mean(costs);
  res.passed = c < target;
  res.details.push_back(fmt::format("m = {}; mean strategy cost {:.1f}, mean switches {:.1f}; "
                                    "target 3 alpha T / ell = {:.1f}",
                                    m, c, mean(switches), target));
  res.details.push_back(fmt::format(
      "service alone is about T alpha / ell = {:.1f}; each forced switch adds one unit of "
      "movement",
      kCouponAlpha * kCouponHorizon / kCouponEll));
  return res;
}

// ---- 6 ----

CriterionResult estimator_unbiased() {
  CriterionResult res;
  res.passed = true;
  const double diameter = 1.0;
  const std::vector<double> f = {1.0, 2.0};
  const std::size_t ell = f.size();
  constexpr std::size_t kDraws = 100000;
  for (double gamma : {0.05, 0.2}) {
    Rng rng(0x5eed0600 + static_cast<std::uint64_t>(gamma * 1000));
    std::vector<std::vector<double>> samples(ell);
    for (std::size_t n = 0; n < kDraws; ++n) {
      CostVector fhat(ell, 0.0);
      if (bernoulli(rng, gamma)) {
        const PredictorId i = uniform_index(rng, ell);
        fhat = bandit::estimate_loss(i, f[i], diameter, ell);
      }
      for (std::size_t i = 0; i < ell; ++i) samples[i].push_back(fhat[i]);
    }
    for (std::size_t i = 0; i < ell; ++i) {
      const double want = gamma / (2.0 * diameter * static_cast<double>(ell)) * f[i];
      const double got = mean(samples[i]);
      const double se = standard_error(samples[i]);
      const bool ok = std::abs(got - want) <= 3.0 * se;
      res.passed = res.passed && ok;
      res.details.push_back(fmt::format("gamma={} i={} mean={:.5f} expected={:.5f} se={:.5f} {}",
                                        gamma, i, got, want, se, ok ? "ok" : "OUTSIDE 3 SE"));
    }
  }
  return res;
}

// ---- 7 ----

CriterionResult bandit_coupling() {
  CriterionResult res;
  constexpr double kGamma = 1.0 / 8.0;
  std::vector<double> plain, primed;
  for (std::size_t s = 0; s < 100; ++s) {
    Rng gen(0x5eed0700 + s);
    inst_gen::RandomMtsParams p;
    p.n = 6;
    p.T = 2000;
    const MtsInstance inst = inst_gen::gen_random_mts(p, gen);
    const auto traces = mixed_predictors(inst, 4, gen);
    auto cfg = bandit::BanditConfig::for_epsilon(1.0, 4);
    cfg.gamma = kGamma;
    Rng a(0xb0b0 + s), b(0xb0b0 + s);
    plain.push_back(bandit::run_on_original(inst, traces, cfg, a, false).trajectory.total);
    primed.push_back(bandit::run_on_original(inst, traces, cfg, b, true).trajectory.total);
  }
  const double ratio = mean(plain) / mean(primed);
  const double bound = (1.0 + 6.0 * kGamma) * 1.05;
  res.passed = ratio <= bound;
  res.details.push_back(fmt::format("mean cost {:.2f} vs primed {:.2f}: ratio {:.4f}, bound {:.4f}",
                                    mean(plain), mean(primed), ratio, bound));
  return res;
}

// ---- 8 ----

CriterionResult lgt_reduction() {
  CriterionResult res;
  Rng rng(0x5eed0800);
  double worst = 0.0;
  for (std::size_t k = 0; k < 100; ++k) {
    inst_gen::RandomMtsParams p;
    p.n = 2 + uniform_index(rng, 5);
    p.T = 1 + uniform_index(rng, 60);
    p.cost_max = 3.0;
    MtsInstance inst = inst_gen::gen_random_mts(p, rng);
    inst.initial_state = uniform_index(rng, p.n);
    const auto traces = random_traces(inst, 1 + uniform_index(rng, 4), rng);
    const double path = inst_gen::lgt_shortest_path(inst_gen::mts_to_lgt(inst, traces));
    worst = std::max(worst, std::abs(path - bm::dyn(inst, traces).value));
  }
  res.passed = worst <= 1e-9;
  res.details.push_back(fmt::format("100 instances, max |path - dyn| = {:.3g}", worst));
  return res;
}

// ---- 9 ----

CriterionResult kserver_line_structure() {
  CriterionResult res;
  std::size_t count = 0, violations = 0, encoding_mismatch = 0;
  std::string first;
  for (std::size_t k : {2, 3}) {
    std::vector<std::vector<double>> layouts(2);
    for (std::size_t i = 0; i <= k; ++i) layouts[0].push_back(static_cast<double>(i));
    layouts[1] = k == 2 ? std::vector<double>{0, 1, 3} : std::vector<double>{0, 1, 3, 7};
    for (const auto& coords : layouts) {
      const MetricSpace line = MetricSpace::line(coords);
      for (State hole = 0; hole <= k; ++hole) {
        for (std::size_t len = 1; len <= 6; ++len) {
          std::vector<std::size_t> seq(len, 0);
          do {
            ++count;
            const std::vector<State> requests(seq.begin(), seq.end());
            const auto kinst = kserver::from_hole(line, hole, requests);
            std::vector<std::vector<kserver::ServerId>> allowed;
            for (State q : requests) {
              const auto [a, b] = inst_gen::line_suggestions(k, q);
              allowed.push_back({a, b});
            }
            const double opt = kserver::kserver_opt(kinst);
            const double restricted = kserver::restricted_opt(kinst, allowed);
            const double encoded =
                bm::offline_opt(kserver::hole_encode(line, hole, requests)).value;
            if (!close(opt, encoded)) ++encoding_mismatch;
            if (!close(opt, restricted) && violations++ == 0) {
              first = fmt::format("k={} hole={} requests={} opt={} restricted={}", k, hole,
                                  fmt::join(requests, ","), opt, restricted);
            }
          } while ([&] {
            for (std::size_t i = len; i-- > 0;) {
              if (++seq[i] <= k) return true;
              seq[i] = 0;
            }
            return false;
          }());
        }
      }
    }
  }
  res.passed = violations == 0 && encoding_mismatch == 0;
  res.details.push_back(fmt::format(
      "{} request sequences; {} without an optimal solution using the suggested servers; "
      "{} where the hole-encoded optimum differs from the k-server optimum",
      count, violations, encoding_mismatch));
  if (!first.empty()) res.details.push_back("first violation: " + first);
  return res;
}

// ---- 10 ----

CriterionResult dyn_tilde_relaxation() {
  CriterionResult res;
  Rng rng(0x5eed1000);
  std::size_t violations = 0;
  double max_gap = 0.0, max_excess = 0.0;
  for (std::size_t it = 0; it < 100; ++it) {
    inst_gen::RandomMtsParams p;
    p.n = 5;
    p.T = 1;
    const MetricSpace metric = inst_gen::gen_random_mts(p, rng).metric;
    const std::size_t k = 2 + it % 2;
    kserver::KServerInstance kinst;
    kinst.metric = metric;
    for (std::size_t s = 0; s < k; ++s) kinst.initial.push_back(uniform_index(rng, p.n));
    for (std::size_t t = 0; t < 6; ++t) kinst.requests.push_back(uniform_index(rng, p.n));
    const std::size_t ell = 2 + uniform_index(rng, 2);
    std::vector<kserver::LazyPrediction> names(ell);
    for (auto& pred : names) {
      std::vector<State> pos = kinst.initial;
      for (State r : kinst.requests) {
        const auto cover = std::ranges::find(pos, r);
        const kserver::ServerId s = cover != pos.end()
                                        ? static_cast<kserver::ServerId>(cover - pos.begin())
                                        : uniform_index(rng, k);
        pred.push_back(s);
        pos[s] = r;
      }
    }
    const auto cmts = kserver::configuration_mts(kinst);
    std::vector<PredictorTrace> traces;
    for (const auto& pred : names) traces.push_back(kserver::configuration_trace(kinst, cmts, pred));
    const double d = bm::dyn(cmts.instance, traces).value;
    const double dt = kserver::dyn_tilde_kserver(kinst, names);
    if (dt > d + 1e-9) ++violations;
    max_gap = std::max(max_gap, d - dt);
    max_excess = std::max(max_excess, dt - d);
  }
  res.details.push_back(fmt::format("100 random instances: {} with dyn_tilde > dyn (largest "
                                    "excess {:.4f}); largest dyn - dyn_tilde = {:.4f}",
                                    violations, max_excess, max_gap));

  // Two servers at 0 and 100, requests at 10 then 90.
  const std::vector<double> coords = {0, 10, 90, 100};
  kserver::KServerInstance ex{MetricSpace::line(coords), {0, 3}, {1, 2}};
  const std::vector<kserver::LazyPrediction> ex_names = {{0, 0}, {1, 1}};
  const auto cmts = kserver::configuration_mts(ex);
  std::vector<PredictorTrace> traces;
  for (const auto& pred : ex_names) traces.push_back(kserver::configuration_trace(ex, cmts, pred));
  const auto d = bm::dyn(cmts.instance, traces);
  const double dt = kserver::dyn_tilde_kserver(ex, ex_names);
  const bool example_ok = close(dt, 20.0) && close(d.value, 90.0);
  std::vector<std::string> path;
  for (std::size_t t = 0; t < d.schedule.sigma.size(); ++t) {
    const auto& cfg = cmts.configs[traces[d.schedule.sigma[t]].states[t]];
    path.push_back(fmt::format("P{}{{{}}}", d.schedule.sigma[t] + 1,
                               fmt::join(cfg | std::views::transform([&](State x) {
                                           return coords[x];
                                         }),
                                         ",")));
  }
  res.details.push_back(fmt::format(
      "example (servers 0 and 100, requests 10, 90): dyn_tilde = {} (expected 20), "
      "dyn = {} (expected 90) via {}",
      dt, d.value, fmt::join(path, " -> ")));
  res.passed = violations == 0 && example_ok;
  return res;
}

// ---- 11 ----

CriterionResult reproducibility() {
  CriterionResult res;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       fmt::format("mtsim-repro-{}", std::chrono::steady_clock::now()
                                                         .time_since_epoch()
                                                         .count());
  fs::create_directories(dir);
  const std::string inst = (dir / "inst.json").string();
  std::ostringstream sink;
  auto call = [&](std::vector<std::string> args) { return run_command(args, sink, sink); };
  int rc = call({"gen", "--kind", "random", "--n", "5", "--T", "60", "--ell", "3", "--seed",
                 "3", "-o", inst});
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::vector<std::string> bodies;
  for (const char* threads : {"1", "1", "2"}) {
    const std::string out = (dir / fmt::format("run{}.csv", bodies.size())).string();
    rc |= call({"run", "--algo", "combine", "--subroutine", "oddexponent", "--epsilon", "0.5",
                "--instance", inst, "--trials", "20", "--seed", "1", "--threads", threads, "-o",
                out});
    bodies.push_back(read(out));
  }
  const auto rows = std::ranges::count(bodies[0], '\n');
  res.passed = rc == 0 && bodies[0] == bodies[1] && bodies[0] == bodies[2] && rows == 22;
  res.details.push_back(fmt::format(
      "exit codes ok: {}; repeated run identical: {}; 2-thread run identical: {}; {} lines",
      rc == 0, bodies[0] == bodies[1], bodies[0] == bodies[2], rows));
  if (rc != 0) res.details.push_back("command output: " + sink.str());
  fs::remove_all(dir);
  return res;
}

template <class F>
std::function<CriterionResult()> timed(std::string id, std::string title, F f) {
  return [id = std::move(id), title = std::move(title), f] {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = f();
    r.id = id;
    r.title = title;
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };
}

std::vector<Criterion> build_criteria() {
  std::vector<Criterion> out;
  auto add = [&](std::string id, std::string suite, std::string title, auto f) {
    out.push_back({id, suite, title, timed(id, title, f)});
  };
  add("1", "dp-oracle", "benchmark DPs match exhaustive enumeration", dp_oracle);
  add("2", "oddexponent-ratio", "OddExponent unfair ratio slope",
      [] { return unfair_ratio(unfair::Algorithm::kOddExponent); });
  add("3", "share-ratio", "Share unfair ratio slope",
      [] { return unfair_ratio(unfair::Algorithm::kShare); });
  add("4", "combine-dynm", "Combine against the switch-limited benchmark", combine_vs_dyn_m);
  add("5a", "coupon-lb", "coupon instance: algorithms pay at least T/ell", coupon_algorithms);
  add("5b", "coupon-lb", "coupon instance: gap between forced switches", coupon_gap);
  add("5c", "coupon-lb", "coupon instance: offline strategy below 3 alpha T / ell",
      coupon_strategy_cost);
  add("6", "bandit-estimator", "loss estimator is unbiased", estimator_unbiased);
  add("7", "bandit-coupling", "BanditCombine within (1+6 gamma) of the primed variant",
      bandit_coupling);
  add("8", "lgt-reduction", "layered graph shortest path equals dyn", lgt_reduction);
  add("9", "kserver-line", "line k-server optimum uses the suggested servers",
      kserver_line_structure);
  add("10", "dyn-tilde", "named-server benchmark relaxes dyn", dyn_tilde_relaxation);
  add("11", "reproducibility", "run output is byte-identical across invocations",
      reproducibility);
  return out;
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = build_criteria();
  return all;
}

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& c : criteria()) {
    if (std::ranges::find(out, c.suite) == out.end()) out.push_back(c.suite);
  }
  out.push_back("all");
  return out;
}

std::vector<CriterionResult> run_suite(const std::string& suite) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (suite == "all" || c.suite == suite) out.push_back(c.run());
  }
  if (out.empty() && suite != "all") throw std::invalid_argument("unknown suite '" + suite + "'");
  return out;
}

CriterionResult run_criterion(const std::string& id) {
  for (const auto& c : criteria()) {
    if (c.id == id) return c.run();
  }
  throw std::invalid_argument("unknown criterion '" + id + "'");
}

std::string format_result(const CriterionResult& r) {
  std::string s = fmt::format("{} [{}] {} ({:.1f} s)\n", r.passed ? "PASS" : "FAIL", r.id,
                              r.title, r.seconds);
  for (const auto& d : r.details) s += "    " + d + "\n";
  return s;
}

}  // namespace mtsim::tools
