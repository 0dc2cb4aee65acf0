// slaterec: run Rep-UCB-Rec, comparison baselines, or the acceptance suites.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure (including
// a failed acceptance criterion).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slaterec/harness/acceptance.hpp"
#include "slaterec/harness/config.hpp"
#include "slaterec/harness/experiment.hpp"

namespace {

void print_summary(const slaterec::harness::ExperimentResult& res) {
  std::cout << "episodes: " << res.metrics.size() << "\n";
  if (res.optimal_value) std::cout << "optimal value: " << *res.optimal_value << "\n";
  if (res.mixture_value) std::cout << "mixture value: " << *res.mixture_value << "\n";
  if (res.mixture_suboptimality) std::cout << "mixture suboptimality: " << *res.mixture_suboptimality << "\n";
  if (res.final_suboptimality) std::cout << "final suboptimality: " << *res.final_suboptimality << "\n";
  std::cout << "output: " << res.out_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slate recommendation RL workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "run Rep-UCB-Rec on a config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override the run seed");
  run->add_option("--out", out, "override the output directory");

  std::string strategy;
  auto* baseline = app.add_subcommand("baseline", "run a comparison baseline");
  baseline->add_option("--strategy", strategy, "random | epsilon_greedy | myopic_greedy")->required();
  baseline->add_option("--config", config_path, "config file")->required();
  baseline->add_option("--seed", seed, "override the run seed");
  baseline->add_option("--out", out, "override the output directory");

  std::string suite;
  std::string accept_out = "accept_out";
  auto* accept = app.add_subcommand("accept", "run an acceptance suite");
  accept->add_option("--suite", suite, "tabular | simulator")->required();
  accept->add_option("--out", accept_out, "directory for acceptance run outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  namespace h = slaterec::harness;
  try {
    if (*accept) {
      h::AcceptanceContext ctx;
      ctx.out_root = accept_out;
      bool all = true;
      h::run_suite(suite, ctx, [&](const h::CriterionResult& r) {
        std::cout << h::format_result(r) << std::endl;
        all = all && r.passed;
      });
      return all ? 0 : 2;
    }
    h::RunConfig cfg = h::parse_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    const h::ExperimentResult res = *run ? h::run_experiment(cfg) : h::run_baseline(cfg, strategy);
    print_summary(res);
    return 0;
  } catch (const slaterec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
