#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpp/cli/problem_file.hpp"
#include "dpp/oracle.hpp"
#include "dpp/queue.hpp"

namespace dpp::cli {

/// Bad command-line input or problem file; maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::filesystem::path problem;
  double epsilon = 0.1;
  std::optional<Slot> t_max;
  /// Seeds for stochastic problems; empty selects 1..30.
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out;
  /// Slack granted to engines that call the inner convex solver.
  double inner_tolerance = 1e-6;

  double v() const { return 1.0 / epsilon; }
  /// ceil(1 / epsilon^2)
  Slot base_time() const;
  /// t_max, defaulting to 4 ceil(1 / epsilon^2).
  Slot horizon() const;
  std::vector<std::uint64_t> seed_list() const;
  /// Throws UsageError.
  void validate() const;
};

/// {ceil(T/4), T, 2T, 4T} with T = ceil(1/epsilon^2), clipped to the horizon,
/// sorted and deduplicated. The horizon itself is always included.
std::vector<Slot> checkpoints(double epsilon, Slot horizon);

enum class CheckStatus { pass, fail, skipped };
const char* to_string(CheckStatus status);

/// One row of a bound report: pass iff measured <= cap + slack.
struct BoundCheck {
  Slot t = 0;
  std::string check;
  double measured = 0.0;
  double cap = 0.0;
  double slack = 0.0;
  CheckStatus status = CheckStatus::skipped;
};

struct BoundReport {
  std::string kind;
  double epsilon = 0.0;
  double v = 0.0;
  Slot t_max = 0;
  double b = 0.0;
  std::optional<double> y0_opt;
  double oracle_error_bar = 0.0;
  std::optional<std::vector<double>> mu;
  bool mu_certified = false;
  std::size_t runs = 1;
  std::vector<std::string> notes;
  std::vector<BoundCheck> checks;

  /// No check failed (skipped rows do not count as failures).
  bool passed() const;
  /// Appends a check; status is skipped when `available` is false.
  void add(Slot t, std::string check, double measured, double cap, double slack, bool available = true);
};

/// Ground truth used by the bound checks.
struct Reference {
  double b = 0.0;
  std::optional<OracleResult> optimum;
  std::optional<MultiplierEstimate> multiplier;
  std::vector<std::string> notes;

  bool has_certified_multiplier() const { return multiplier && multiplier->certified; }
};

/// B plus the optimum (file value or oracle) and a multiplier estimate.
/// Oracle limitations become notes rather than errors.
Reference compute_reference(const ProblemFile& file);

/// Parses, runs the matching engine, writes trace CSVs and bound_report.{csv,json}.
BoundReport run_command(const RunConfig& config);

struct SweepConfig {
  std::filesystem::path problem;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out;
  double inner_tolerance = 1e-6;
  void validate() const;
};

struct SweepRow {
  double epsilon = 0.0;
  Slot t = 0;
  double obj_gap = 0.0;
  double max_violation = 0.0;
  double cap_obj = 0.0;
  std::optional<double> cap_violation;
  CheckStatus pass = CheckStatus::skipped;
};

/// One run per epsilon to t = ceil(1/epsilon^2); writes sweep.csv.
std::vector<SweepRow> sweep_command(const SweepConfig& config);

struct OracleConfig {
  std::filesystem::path problem;
  std::optional<double> resolution;
  std::filesystem::path out;
};

struct OracleReport {
  OracleResult optimum;
  std::optional<MultiplierEstimate> multiplier;
};

/// Runs the brute-force oracle and writes oracle.json.
OracleReport oracle_command(const OracleConfig& config);

/// Distributed run: node_<n>.csv, consensus.csv and bound_report.{csv,json}.
BoundReport distributed_command(const RunConfig& config);

/// Writes bound_report.csv and bound_report.json into `dir`.
void write_bound_report(const BoundReport& report, const std::filesystem::path& dir);

}  // namespace dpp::cli
