#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpp/cli/commands.hpp"

namespace {

int report_exit(bool passed) { return passed ? 0 : 3; }

}  // namespace

int main(int argc, char** argv) {
  using namespace dpp::cli;

  CLI::App app{"Drift-plus-penalty engines, oracles and bound checks"};
  app.require_subcommand(1);

  RunConfig run;
  std::vector<std::uint64_t> run_seeds;
  dpp::Slot t_max = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an engine and check its bounds at fixed checkpoints");
  run_cmd->add_option("--problem", run.problem, "Problem file (JSON)")->required();
  run_cmd->add_option("--epsilon", run.epsilon, "Accuracy target; V = 1/epsilon")->required();
  run_cmd->add_option("--t-max", t_max, "Number of slots (default 4*ceil(1/epsilon^2))");
  run_cmd->add_option("--seeds", run_seeds, "Comma-separated seeds for stochastic problems")->delimiter(',');
  run_cmd->add_option("--out", run.out, "Output directory")->required();

  SweepConfig sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run to t = ceil(1/epsilon^2) for several epsilons");
  sweep_cmd->add_option("--problem", sweep.problem, "Problem file (JSON)")->required();
  sweep_cmd->add_option("--epsilons", sweep.epsilons, "Comma-separated epsilons")->delimiter(',')->required();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Comma-separated seeds for stochastic problems")->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();

  OracleConfig oracle;
  double resolution = 0.0;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force optimum and multiplier estimate");
  oracle_cmd->add_option("--problem", oracle.problem, "Problem file (JSON)")->required();
  oracle_cmd->add_option("--resolution", resolution, "Grid step (static) or perturbation scale (stochastic)");
  oracle_cmd->add_option("--out", oracle.out, "Output directory")->required();

  RunConfig dist;
  dpp::Slot dist_t_max = 0;
  auto* dist_cmd = app.add_subcommand("distributed", "Simulate decentralized drift-plus-penalty on a graph");
  dist_cmd->add_option("--problem", dist.problem, "Problem file (JSON)")->required();
  dist_cmd->add_option("--epsilon", dist.epsilon, "Accuracy target; V = 1/epsilon")->required();
  dist_cmd->add_option("--t-max", dist_t_max, "Number of rounds (default 4*ceil(1/epsilon^2))");
  dist_cmd->add_option("--out", dist.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      run.seeds = run_seeds;
      if (run_cmd->count("--t-max")) run.t_max = t_max;
      return report_exit(run_command(run).passed());
    }
    if (*sweep_cmd) {
      const auto rows = sweep_command(sweep);
      bool passed = true;
      for (const auto& row : rows) passed = passed && row.pass != CheckStatus::fail;
      return report_exit(passed);
    }
    if (*oracle_cmd) {
      if (oracle_cmd->count("--resolution")) oracle.resolution = resolution;
      oracle_command(oracle);
      return 0;
    }
    if (*dist_cmd) {
      if (dist_cmd->count("--t-max")) dist.t_max = dist_t_max;
      return report_exit(distributed_command(dist).passed());
    }
  } catch (const UsageError& e) {
    std::cerr << "dpp: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dpp: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
