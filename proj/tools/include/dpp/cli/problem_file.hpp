#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "dpp/convex.hpp"
#include "dpp/distributed.hpp"
#include "dpp/errors.hpp"
#include "dpp/linear_program.hpp"
#include "dpp/stochastic.hpp"

namespace dpp::cli {

/// A problem-file error. what() names the offending field path.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class ProblemKind { stochastic, convex, lp, distributed };

const char* to_string(ProblemKind kind);

struct DistributedSpec {
  GraphProblem graph;
  /// Set when the file describes a shared summed constraint; `graph` is then
  /// the transformed replica problem.
  std::optional<ReplicatedProblem> replicated;
};

struct ProblemFile {
  ProblemKind kind = ProblemKind::lp;
  std::string name;
  /// Optional analytic optimum supplied by the file; overrides the oracle.
  std::optional<double> optimum;
  std::variant<StochasticProblem, ConvexProgram, LinearProgram, DistributedSpec> problem;

  const StochasticProblem& stochastic() const { return std::get<StochasticProblem>(problem); }
  const ConvexProgram& convex() const { return std::get<ConvexProgram>(problem); }
  const LinearProgram& lp() const { return std::get<LinearProgram>(problem); }
  const DistributedSpec& distributed() const { return std::get<DistributedSpec>(problem); }
};

/// Parses and fully validates a problem document. Throws SchemaError.
ProblemFile parse_problem_text(const std::string& text);
ProblemFile parse_problem_file(const std::filesystem::path& path);

}  // namespace dpp::cli
