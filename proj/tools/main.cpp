#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sysid/config.hpp"
#include "sysid/harness.hpp"
#include "sysid/validation.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* config = cmd->add_option("--config", opts.config_path, "JSON experiment config");
  if (config_required) config->required();
  cmd->add_option("--out", opts.out_path, "output path (overrides output.path)");
  cmd->add_option("--override", opts.overrides,
                  "dotted-key config override KEY=VALUE (repeatable)");
  cmd->add_option("--seed", opts.seed, "base seed (overrides config seed)");
  cmd->add_option("--replicas", opts.replicas, "replica count (overrides config)");
}

nlohmann::json load_config_document(const CommonOpts& opts) {
  nlohmann::json doc =
      opts.config_path.empty() ? nlohmann::json::object() : sysid::load_json_file(opts.config_path);
  for (const auto& assignment : opts.overrides) sysid::apply_override(doc, assignment);
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.replicas) doc["replicas"] = *opts.replicas;
  if (!opts.out_path.empty()) doc["output"]["path"] = opts.out_path;
  return doc;
}

int run_rollout(const CommonOpts& opts, bool update_posterior) {
  auto cfg = sysid::parse_experiment_config(load_config_document(opts));
  cfg.update_posterior = update_posterior;
  const auto results = sysid::run_experiment(cfg);
  int aborted = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].ok()) {
      std::cerr << "replica " << k << " aborted: " << results[k].error << "\n";
      ++aborted;
    }
  }
  if (!cfg.output.path.empty()) {
    for (const auto& path : sysid::write_traces(cfg.output, results)) {
      std::cout << "wrote " << path << "\n";
    }
  }
  if (!results.empty() && results.front().ok() && !results.front().trace.empty()) {
    const auto& last = results.front().trace.back();
    std::printf("replica 0 final: t=%ld param_error=%.6g noise_error=%.6g logdetK=%.6g\n",
                last.t, last.param_error, last.noise_error, last.logdet_K);
  }
  return aborted == 0 ? 0 : 1;
}

int run_noise_report(const CommonOpts& opts) {
  auto cfg = sysid::parse_experiment_config(load_config_document(opts));
  const auto results = sysid::run_experiment(cfg);
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].ok()) {
      std::cerr << "replica " << k << " aborted: " << results[k].error << "\n";
      return 1;
    }
  }
  const auto summary = sysid::compare_strategies({cfg});
  std::cout << summary.dump(2) << "\n";
  if (!cfg.output.path.empty()) {
    std::ofstream os(cfg.output.path);
    if (!os) {
      std::cerr << "cannot open output file: " << cfg.output.path << "\n";
      return 1;
    }
    os << summary.dump(2) << "\n";
    std::cout << "wrote " << cfg.output.path << "\n";
  }
  return 0;
}

int run_compare(const CommonOpts& opts) {
  const auto cfgs = sysid::parse_compare_configs(load_config_document(opts));
  const auto summary = sysid::compare_strategies(cfgs);
  std::cout << summary.dump(2) << "\n";
  const auto& out = cfgs.front().output;
  if (!out.path.empty()) {
    std::ofstream os(out.path);
    if (!os) {
      std::cerr << "cannot open output file: " << out.path << "\n";
      return 1;
    }
    os << summary.dump(2) << "\n";
    std::cout << "wrote " << out.path << "\n";
  }
  return 0;
}

int run_validate(std::uint64_t seed) {
  const auto checks = sysid::run_analytic_checks(seed);
  bool all_pass = true;
  for (const auto& check : checks) {
    std::printf("[%s] %-38s max_error=%.3e tol=%.3e  %s\n", check.pass ? "PASS" : "FAIL",
                check.name.c_str(), check.max_error, check.tolerance, check.detail.c_str());
    all_pass = all_pass && check.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"active-sysid: online Bayesian identification of a stochastic recurrent "
               "plant with optimal-design stimulus selection"};
  app.require_subcommand(1);
  app.footer("Override keys (--override KEY=VALUE):\n  " + [] {
    std::string joined;
    for (const auto& key : sysid::known_override_keys()) {
      if (!joined.empty()) joined += "\n  ";
      joined += key;
    }
    return joined;
  }());

  CommonOpts simulate_opts, identify_opts, compare_opts, noise_opts;
  std::uint64_t validate_seed = 12345;

  auto* simulate = app.add_subcommand(
      "simulate", "open-loop plant rollout (posterior frozen at the prior)");
  add_common(simulate, simulate_opts, false);
  auto* identify = app.add_subcommand(
      "identify", "closed-loop identification with the configured strategy");
  add_common(identify, identify_opts, false);
  auto* compare = app.add_subcommand(
      "compare", "run the 'strategies' list on a shared plant and print the summary");
  add_common(compare, compare_opts, true);
  auto* noise = app.add_subcommand(
      "noise", "closed-loop run reporting noise-estimation error quantiles");
  add_common(noise, noise_opts, false);
  auto* validate = app.add_subcommand(
      "validate-lemmas", "run the built-in analytic identity checks and report max errors");
  validate->add_option("--seed", validate_seed, "seed for the check suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_rollout(simulate_opts, false);
    if (identify->parsed()) return run_rollout(identify_opts, true);
    if (compare->parsed()) return run_compare(compare_opts);
    if (noise->parsed()) return run_noise_report(noise_opts);
    if (validate->parsed()) return run_validate(validate_seed);
  } catch (const sysid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
