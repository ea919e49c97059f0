#include "mtsim_tools/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "mtsim/benchmarks.hpp"
#include "mtsim/instances.hpp"
#include "mtsim/io.hpp"
#include "mtsim_tools/suites.hpp"
#include "mtsim_tools/trials.hpp"

namespace mtsim::tools {

namespace {

namespace fs = std::filesystem;

struct GenOptions {
  std::string kind = "random";
  std::size_t ell = 2;
  std::size_t T = 10;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::size_t n = 4;
  double diameter = 1.0;
  double infeasible_prob = 0.0;
  std::vector<std::string> predictor_kinds = {"fixed_state", "noisy_opt", "greedy",
                                              "lazy_random"};
  double p_noise = 0.1;
  double threshold = 0.5;
  std::size_t k = 2;
  std::vector<std::size_t> requests;
  std::size_t hole = 0;
  std::string output;
  std::string sidecar;
};

struct RunOptions {
  std::string algo = "combine";
  std::string subroutine = "oddexponent";
  double epsilon = 1.0;
  std::vector<double> epsilons;  // sweep
  std::optional<double> gamma;
  std::vector<std::string> instances;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<std::size_t> m;
  std::optional<double> rho;
  std::size_t threads = 1;
  std::string output;
};

struct BenchOptions {
  std::string instance;
  std::vector<std::size_t> ms;
  std::vector<double> rhos;
  std::string output;
  std::string csv;
};

struct VerifyOptions {
  std::string suite;
  bool list = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StructuralError("cannot write " + path.string());
  f << text;
  if (!f) throw StructuralError("failed writing " + path.string());
}

fs::path default_sidecar(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".meta.json");
  return p;
}

int cmd_gen(const GenOptions& o, std::ostream& out) {
  InstanceBundle bundle;
  instances::Sidecar meta;
  meta.kind = o.kind;
  meta.seed = o.seed;
  if (o.kind == "coupon") {
    auto ci = instances::gen_coupon_lb({.ell = o.ell, .T = o.T, .alpha = o.alpha, .seed = o.seed});
    bundle = {std::move(ci.instance), std::move(ci.traces)};
    meta.params = {{"ell", static_cast<double>(o.ell)},
                   {"T", static_cast<double>(o.T)},
                   {"alpha", o.alpha}};
    meta.sigma = std::move(ci.sigma);
  } else if (o.kind == "random") {
    Rng rng(o.seed);
    instances::RandomMtsParams p{o.n, o.T, o.diameter, 1.0, o.infeasible_prob};
    bundle.instance = instances::gen_random_mts(p, rng);
    for (std::size_t i = 0; i < o.ell; ++i) {
      const auto kind =
          instances::predictor_kind_from_string(o.predictor_kinds[i % o.predictor_kinds.size()]);
      instances::PredictorParams pp;
      pp.fixed_points = {i % o.n};
      pp.p_noise = o.p_noise;
      pp.threshold = o.threshold;
      bundle.predictors.push_back(
          instances::gen_predictors(bundle.instance, kind, 1, pp, rng).front());
    }
    meta.params = {{"n", static_cast<double>(o.n)},
                   {"T", static_cast<double>(o.T)},
                   {"ell", static_cast<double>(o.ell)},
                   {"diameter", o.diameter},
                   {"infeasible_prob", o.infeasible_prob},
                   {"p_noise", o.p_noise},
                   {"threshold", o.threshold}};
  } else if (o.kind == "kserver-line") {
    const std::vector<State> req(o.requests.begin(), o.requests.end());
    auto lb = instances::gen_kserver_line_lb(o.k, req, {}, o.hole);
    bundle = {std::move(lb.instance), std::move(lb.traces)};
    meta.params = {{"k", static_cast<double>(o.k)}, {"hole", static_cast<double>(o.hole)}};
  } else {
    throw StructuralError("unknown instance kind '" + o.kind + "'");
  }
  save_instance_file(o.output, bundle);
  const fs::path side = o.sidecar.empty() ? default_sidecar(o.output) : fs::path(o.sidecar);
  write_file(side, meta.to_json() + "\n");
  out << "wrote " << o.output << " (T=" << bundle.instance.horizon()
      << ", predictors=" << bundle.predictors.size() << ") and " << side.string() << "\n";
  return kExitOk;
}

std::vector<NamedInstance> load_instances(const std::vector<std::string>& paths) {
  if (paths.empty()) throw StructuralError("at least one --instance is required");
  std::vector<NamedInstance> out;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw StructuralError("instance file not found: " + p);
    out.push_back({fs::path(p).stem().string(), load_instance_file(p)});
  }
  return out;
}

AlgoSpec algo_spec(const RunOptions& o, double epsilon) {
  AlgoSpec spec;
  spec.algo = algo_from_string(o.algo);
  spec.subroutine = unfair::algorithm_from_string(o.subroutine);
  spec.epsilon = epsilon;
  spec.gamma = o.gamma;
  if (!(epsilon > 0.0)) throw StructuralError("epsilon must be positive");
  return spec;
}

int cmd_run(const RunOptions& o, bool sweep, std::ostream& out) {
  if (o.trials < 1) throw StructuralError("trials must be at least 1");
  const auto insts = load_instances(o.instances);
  const BenchSpec bench{o.m, o.rho};
  std::vector<TrialRecord> records;
  const std::vector<double> eps = sweep ? o.epsilons : std::vector<double>{o.epsilon};
  if (eps.empty()) throw StructuralError("sweep needs --epsilons");
  for (double e : eps) {
    auto part = run_trials(insts, algo_spec(o, e), bench, o.trials, o.seed, o.threads);
    records.insert(records.end(), part.begin(), part.end());
  }
  write_file(o.output, trials_to_csv(records));
  out << "wrote " << records.size() << " rows to " << o.output << "\n";
  return kExitOk;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  const auto insts = load_instances({o.instance});
  const auto& b = insts.front().bundle;
  const auto rep = benchmarks::compute_report(b.instance, b.predictors, o.ms, o.rhos);
  write_file(o.output, rep.to_json(insts.front().id) + "\n");
  if (!o.csv.empty()) write_file(o.csv, rep.to_csv(insts.front().id));
  out << "dyn " << format_number(rep.dyn.value, 12) << ", opt "
      << format_number(rep.opt.value, 12) << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  if (o.list) {
    for (const auto& c : criteria()) out << c.suite << "\t" << c.id << "\t" << c.title << "\n";
    return kExitOk;
  }
  const auto names = suite_names();
  if (std::ranges::find(names, o.suite) == names.end()) {
    throw StructuralError("unknown suite '" + o.suite + "'");
  }
  bool ok = true;
  for (const auto& r : run_suite(o.suite)) {
    out << format_result(r) << std::flush;
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

std::string json_scalar(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// Rewrites `--config file.json` into ordinary arguments placed right after
// the subcommand, so explicit arguments that follow take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  const auto it = std::ranges::find(args, "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw StructuralError("--config needs a file");
  const std::string path = *(it + 1);
  std::ifstream f(path);
  if (!f) throw StructuralError("config file not found: " + path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw StructuralError("config file must hold a JSON object");

  std::vector<std::string> rest(args.begin(), it);
  rest.insert(rest.end(), it + 2, args.end());
  std::string command;
  if (cfg.contains("command")) command = cfg["command"].get<std::string>();
  if (!rest.empty() && rest.front().rfind("-", 0) != 0) {
    if (!command.empty() && rest.front() != command) {
      throw StructuralError("config command '" + command + "' conflicts with '" +
                            rest.front() + "'");
    }
    command = rest.front();
    rest.erase(rest.begin());
  }
  if (command.empty()) throw StructuralError("no command given");

  std::vector<std::string> out = {command};
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::ranges::replace(flag, '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(json_scalar(v));
      }
    } else {
      out.push_back(flag);
      out.push_back(json_scalar(value));
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

template <class T>
CLI::Option* scalar(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option(name, value, help)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
      ->capture_default_str();
}

}  // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Learning-augmented metrical task system simulator", "mtsim"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with options for the subcommand");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate an instance file");
  scalar(g, "--kind", gen.kind, "coupon | random | kserver-line");
  scalar(g, "--ell", gen.ell, "number of predictors (points, for coupon)");
  scalar(g, "--T", gen.T, "horizon");
  scalar(g, "--alpha", gen.alpha, "coupon: off-hit cost is alpha/ell");
  scalar(g, "--seed", gen.seed, "generator seed");
  scalar(g, "--n", gen.n, "random: number of points");
  scalar(g, "--diameter", gen.diameter, "random: metric diameter");
  scalar(g, "--infeasible-prob", gen.infeasible_prob, "random: INFEASIBLE entry rate");
  g->add_option("--predictor-kinds", gen.predictor_kinds, "random: kinds, cycled")
      ->delimiter(',');
  scalar(g, "--p-noise", gen.p_noise, "noisy_opt resampling probability");
  scalar(g, "--threshold", gen.threshold, "lazy_random jump threshold");
  scalar(g, "--k", gen.k, "kserver-line: servers");
  g->add_option("--requests", gen.requests, "kserver-line: request points (0-based)")
      ->delimiter(',');
  scalar(g, "--hole", gen.hole, "kserver-line: initial hole");
  scalar(g, "-o,--output", gen.output, "instance JSON path")->required();
  scalar(g, "--sidecar", gen.sidecar, "generator metadata path (default <output>.meta.json)");

  RunOptions run;
  auto* r = app.add_subcommand("run", "run an algorithm for several seeds");
  auto* sw = app.add_subcommand("sweep", "run over a list of epsilon values");
  for (auto* sub : {r, sw}) {
    scalar(sub, "--algo", run.algo, "combine | bandit | bandit-prime");
    scalar(sub, "--subroutine", run.subroutine, "oddexponent | share (combine only)");
    scalar(sub, "--gamma", run.gamma, "bandit exploration rate");
    sub->add_option("--instance", run.instances, "instance JSON (repeatable)")->required();
    scalar(sub, "--trials", run.trials, "seeds per instance");
    scalar(sub, "--seed,--master-seed", run.seed, "master seed");
    scalar(sub, "--m", run.m, "switch limit for dyn_m (default: derived budget)");
    scalar(sub, "--rho", run.rho, "switch charge for dyn_rho (default: 2 D r)");
    scalar(sub, "--threads", run.threads, "worker threads");
    scalar(sub, "-o,--output", run.output, "CSV path")->required();
  }
  scalar(r, "--epsilon", run.epsilon, "target accuracy");
  sw->add_option("--epsilons", run.epsilons, "epsilon values")->delimiter(',')->required();

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "compute offline benchmarks");
  scalar(b, "--instance", bench.instance, "instance JSON")->required();
  b->add_option("--m", bench.ms, "switch limits")->delimiter(',');
  b->add_option("--rho", bench.rhos, "switch charges")->delimiter(',');
  scalar(b, "-o,--output", bench.output, "report JSON path")->required();
  scalar(b, "--csv", bench.csv, "also write CSV rows here");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "run a verification suite");
  scalar(v, "--suite", verify.suite, "suite name (see --list)");
  v->add_flag("--list", verify.list, "list suites and criteria");

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> storage = {"mtsim"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfigError;
    }
    if (v->parsed() && !verify.list && verify.suite.empty()) {
      throw StructuralError("verify needs --suite or --list");
    }
    if (g->parsed()) return cmd_gen(gen, out);
    if (r->parsed()) return cmd_run(run, false, out);
    if (sw->parsed()) return cmd_run(run, true, out);
    if (b->parsed()) return cmd_bench(bench, out);
    return cmd_verify(verify, out);
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const InfeasiblePredictorError& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const InfeasibleTrajectoryError& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const InfeasibleBenchmarkError& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace mtsim::tools
