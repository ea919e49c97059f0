#include "mtsim_tools/trials.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <tuple>
#include <thread>

#include "mtsim/bandit.hpp"
#include "mtsim/benchmarks.hpp"
#include "mtsim/combine.hpp"
#include "mtsim/instances.hpp"
#include "mtsim_tools/seeds.hpp"

namespace mtsim::tools {

const char* to_string(AlgoKind a) {
  switch (a) {
    case AlgoKind::kCombine: return "combine";
    case AlgoKind::kBandit: return "bandit";
    case AlgoKind::kBanditPrime: return "bandit-prime";
  }
  return "?";
}

AlgoKind algo_from_string(const std::string& name) {
  for (auto a : {AlgoKind::kCombine, AlgoKind::kBandit, AlgoKind::kBanditPrime}) {
    if (name == to_string(a)) return a;
  }
  throw StructuralError("unknown algorithm '" + name + "'");
}

double AlgoSpec::rate(std::size_t ell) const {
  if (ell < 2) return 1.0;
  const auto alg = algo == AlgoKind::kCombine ? subroutine : unfair::Algorithm::kShare;
  return unfair::unfair_rate_for_epsilon(epsilon, ell, alg);
}

std::string AlgoSpec::params_string() const {
  std::string s = "epsilon=" + format_number(epsilon, 12);
  if (algo == AlgoKind::kCombine) {
    s += ";subroutine=";
    s += unfair::to_string(subroutine);
  } else {
    s += ";gamma=" + format_number(gamma.value_or(std::min(1.0, epsilon) / 6.0), 12);
  }
  return s;
}

InstanceBenchmarks compute_benchmarks(const InstanceBundle& bundle, const AlgoSpec& spec,
                                      const BenchSpec& bench) {
  const MtsInstance& inst = bundle.instance;
  const auto& traces = bundle.predictors;
  const std::size_t ell = traces.size();
  const double diameter = inst.metric.diameter();
  InstanceBenchmarks out;
  auto guarded = [](auto&& f) {
    try {
      return f();
    } catch (const InfeasibleBenchmarkError&) {
      return kInfeasible;
    }
  };
  out.dyn = guarded([&] { return benchmarks::dyn(inst, traces).value; });
  if (bench.m) {
    out.m = *bench.m;
  } else if (ell >= 2 && !is_infeasible(out.dyn)) {
    out.m = combine::switch_budget(spec.epsilon, diameter, ell, out.dyn);
  }
  out.dyn_m = guarded([&] { return benchmarks::dyn_limited(inst, traces, out.m).value; });
  out.rho = bench.rho.value_or(2.0 * diameter * spec.rate(ell));
  out.dyn_rho = guarded([&] { return benchmarks::dyn_rho(inst, traces, out.rho).value; });
  out.opt = benchmarks::offline_opt(inst).value;
  return out;
}

RunOutcome run_once(const InstanceBundle& bundle, const AlgoSpec& spec, std::uint64_t seed) {
  const MtsInstance inst = instances::penalize_infeasible(bundle.instance);
  const auto& traces = bundle.predictors;
  Rng rng(seed);
  if (spec.algo == AlgoKind::kCombine) {
    combine::CombineConfig cfg;
    cfg.epsilon = spec.epsilon;
    cfg.subroutine = spec.subroutine;
    cfg.seed = seed;
    const auto run = combine::combine_run(inst, traces, cfg, rng);
    return {run.trajectory.total, run.switches};
  }
  auto cfg = bandit::BanditConfig::for_epsilon(spec.epsilon, traces.size());
  if (spec.gamma) cfg.gamma = *spec.gamma;
  cfg.seed = seed;
  const auto run = bandit::run_on_original(inst, traces, cfg, rng,
                                           spec.algo == AlgoKind::kBanditPrime);
  return {run.trajectory.total, run.anchor_switches};
}

std::vector<TrialRecord> run_trials(const std::vector<NamedInstance>& instances,
                                    const AlgoSpec& spec, const BenchSpec& bench,
                                    std::size_t trials, std::uint64_t master_seed,
                                    std::size_t threads) {
  if (trials == 0) throw StructuralError("trials must be at least 1");
  std::vector<TrialRecord> records;
  for (const auto& ni : instances) {
    const InstanceBenchmarks b = compute_benchmarks(ni.bundle, spec, bench);
    for (std::size_t k = 0; k < trials; ++k) {
      TrialRecord rec;
      rec.instance_id = ni.id;
      rec.algo = to_string(spec.algo);
      rec.params = spec.params_string();
      rec.trial = k;
      rec.seed = derive_trial_seed(master_seed, ni.id, k);
      rec.bench = b;
      records.push_back(std::move(rec));
    }
  }
  std::vector<const InstanceBundle*> bundle_of;
  for (const auto& ni : instances) {
    for (std::size_t k = 0; k < trials; ++k) bundle_of.push_back(&ni.bundle);
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        records[i].outcome = run_once(*bundle_of[i], spec, records[i].seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, records.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::ranges::stable_sort(records, [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.instance_id, a.trial) < std::tie(b.instance_id, b.trial);
  });
  return records;
}

std::string trials_to_csv(const std::vector<TrialRecord>& records) {
  std::string out = kCsvVersionLine;
  out +=
      "\ninstance_id,algo,params,trial,seed,cost,switches,dyn,dyn_m,m,dyn_rho,rho,opt,"
      "ratio_dyn,ratio_dyn_m\n";
  auto num = [](double x) { return format_number(x, 12); };
  auto ratio = [&](double a, double b) {
    return b == 0.0 || is_infeasible(b) ? std::string() : num(a / b);
  };
  for (const auto& r : records) {
    const auto& b = r.bench;
    out += r.instance_id + ',' + r.algo + ',' + r.params + ',' + std::to_string(r.trial) +
           ',' + std::to_string(r.seed) + ',' + num(r.outcome.cost) + ',' +
           std::to_string(r.outcome.switches) + ',' + num(b.dyn) + ',' + num(b.dyn_m) + ',' +
           std::to_string(b.m) + ',' + num(b.dyn_rho) + ',' + num(b.rho) + ',' + num(b.opt) +
           ',' + ratio(r.outcome.cost, b.dyn) + ',' + ratio(r.outcome.cost, b.dyn_m) + '\n';
  }
  return out;
}

}  // namespace mtsim::tools
