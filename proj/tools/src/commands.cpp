#include "dpp/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "dpp/cli/parallel.hpp"
#include "dpp/csv.hpp"
#include "json.hpp"

namespace dpp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kExact = 1e-9;
constexpr std::size_t kDefaultSeeds = 30;

ProblemFile load(const fs::path& path) {
  try {
    return parse_problem_file(path);
  } catch (const SchemaError& e) {
    throw UsageError(e.what());
  }
}

void prepare_output(const fs::path& dir) {
  if (dir.empty()) throw UsageError("--out: output directory required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("--out: cannot create '" + dir.string() + "': " + ec.message());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void check_epsilon(double epsilon, const char* what) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw UsageError(std::string(what) + ": epsilon must lie in (0, 1]");
  }
}

Slot ceil_inverse_square(double epsilon) {
  return static_cast<Slot>(std::ceil(1.0 / (epsilon * epsilon) - 1e-9));
}

// -- engine dispatch ---------------------------------------------------------

struct EngineRuns {
  std::vector<Trace> traces;
  std::vector<std::uint64_t> seeds;  // stochastic only
  double inner_slack = 0.0;
};

EngineRuns run_engine(const ProblemFile& file, double v, Slot horizon, const std::vector<std::uint64_t>& seeds,
                      double inner_tolerance, bool parallel) {
  EngineRuns runs;
  switch (file.kind) {
    case ProblemKind::lp:
      runs.traces.push_back(run_lp(file.lp(), v, horizon));
      break;
    case ProblemKind::convex:
      runs.traces.push_back(run_convex(file.convex(), v, horizon).trace);
      runs.inner_slack = inner_tolerance;
      break;
    case ProblemKind::stochastic: {
      runs.seeds = seeds;
      runs.traces.resize(seeds.size());
      auto job = [&](std::size_t i) { runs.traces[i] = run_stochastic(file.stochastic(), v, horizon, seeds[i]); };
      if (parallel) {
        parallel_for(seeds.size(), job);
      } else {
        for (std::size_t i = 0; i < seeds.size(); ++i) job(i);
      }
      break;
    }
    case ProblemKind::distributed:
      throw UsageError("distributed problems are run with the 'distributed' command");
  }
  return runs;
}

struct Constants {
  std::vector<double> c;
  std::vector<double> d;
  std::optional<ConvexProgram> program;  // for Jensen checks
};

Constants constants_of(const ProblemFile& file) {
  Constants k;
  switch (file.kind) {
    case ProblemKind::lp:
      k.c = file.lp().c;
      k.program = file.lp().to_convex();
      break;
    case ProblemKind::convex:
      k.c = file.convex().c;
      k.d = file.convex().d;
      k.program = file.convex();
      break;
    case ProblemKind::stochastic:
      k.c = file.stochastic().c;
      break;
    case ProblemKind::distributed:
      break;
  }
  return k;
}

// -- measurements ------------------------------------------------------------

struct Sample {
  double y0 = 0.0;
  std::vector<double> violation;  // ybar_k - c_k, then |wbar_i - d_i|
  double identity_excess = 0.0;   // largest violation minus its queue bound Q/t
  double queue_norm = 0.0;
  double jensen_excess = 0.0;
};

Sample measure(const Trace& trace, const Constants& k, Slot t) {
  Sample s;
  s.y0 = trace.time_average(t, 0);
  const QueueState q = trace.queues_at(t);
  const double td = static_cast<double>(t);
  s.identity_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k.c.size(); ++j) {
    const double v = trace.time_average(t, j + 1) - k.c[j];
    s.violation.push_back(v);
    s.identity_excess = std::max(s.identity_excess, v - q.ineq[j] / td);
  }
  for (std::size_t i = 0; i < k.d.size(); ++i) {
    const double v = std::abs(trace.equality_average(t, i) - k.d[i]);
    s.violation.push_back(v);
    s.identity_excess = std::max(s.identity_excess, v - std::abs(q.eq[i]) / td);
  }
  s.queue_norm = queue_norm(q);
  if (k.program) s.jensen_excess = jensen_check(*k.program, trace, t).max_excess;
  return s;
}

struct Stat {
  double mean = 0.0;
  double margin = 0.0;  // 3 standard errors; 0 for a single run
};

Stat stat_of(const std::vector<double>& values) {
  Stat s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.margin = 3.0 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

template <typename Get>
Stat stat_over(const std::vector<Sample>& samples, Get get) {
  std::vector<double> values;
  for (const auto& s : samples) values.push_back(get(s));
  return stat_of(values);
}

double mu_norm(const Reference& ref) { return ref.has_certified_multiplier() ? ref.multiplier->norm() : 0.0; }

void add_checks(BoundReport& report, const EngineRuns& runs, const Constants& k, const Reference& ref, Slot t) {
  std::vector<Sample> samples;
  for (const auto& trace : runs.traces) samples.push_back(measure(trace, k, t));
  const double v = report.v;
  const bool have_opt = ref.optimum.has_value();
  const bool have_mu = ref.has_certified_multiplier();
  const double norm_cap = have_mu ? queue_norm_bound(v, mu_norm(ref), ref.b, t) : 0.0;

  const Stat y0 = stat_over(samples, [](const Sample& s) { return s.y0; });
  const double opt = have_opt ? ref.optimum->optimum : 0.0;
  const double opt_bar = have_opt ? ref.optimum->error_bar : 0.0;
  report.add(t, "objective_gap", y0.mean - opt, ref.b / v, opt_bar + runs.inner_slack + y0.margin + kExact,
             have_opt);

  for (std::size_t j = 0; j < samples.front().violation.size(); ++j) {
    const Stat viol = stat_over(samples, [j](const Sample& s) { return s.violation[j]; });
    const std::string name = j < k.c.size() ? "violation_" + std::to_string(j + 1)
                                            : "equality_" + std::to_string(j - k.c.size() + 1);
    report.add(t, name, viol.mean, norm_cap / static_cast<double>(t), viol.margin + kExact, have_mu);
  }
  if (!samples.front().violation.empty()) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) worst = std::max(worst, s.identity_excess);
    report.add(t, "queue_identity", worst, 0.0, kExact);
  }
  const Stat qn = stat_over(samples, [](const Sample& s) { return s.queue_norm; });
  report.add(t, "queue_norm", qn.mean, norm_cap, 1e-6 * norm_cap + qn.margin, have_mu);
  if (k.program) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) worst = std::max(worst, s.jensen_excess);
    report.add(t, "jensen", worst, 0.0, kExact);
  }
}

BoundReport make_report(const ProblemFile& file, const Reference& ref, double epsilon, Slot horizon,
                        std::size_t runs) {
  BoundReport report;
  report.kind = to_string(file.kind);
  report.epsilon = epsilon;
  report.v = 1.0 / epsilon;
  report.t_max = horizon;
  report.b = ref.b;
  report.runs = runs;
  report.notes = ref.notes;
  if (ref.optimum) {
    report.y0_opt = ref.optimum->optimum;
    report.oracle_error_bar = ref.optimum->error_bar;
  }
  if (ref.multiplier) {
    report.mu = ref.multiplier->mu;
    report.mu_certified = ref.multiplier->certified;
  }
  return report;
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// -- distributed helpers -------------------------------------------------------

double distributed_B(const GraphProblem& graph) {
  double b = 0.0;
  for (const auto& node : graph.nodes) {
    if (node.program.num_ineq() > 0) b += compute_B_convex(node.program);
  }
  const std::size_t g = graph.shared_dim();
  for (const auto& link : graph.topology.links()) {
    const auto& from = graph.nodes[link.from];
    const auto& to = graph.nodes[link.to];
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t a = from.local_dim() + i, c = to.local_dim() + i;
      if (!from.program.set.is_box() || !to.program.set.is_box()) {
        throw ValidationError("distributed bound: node sets must be boxes");
      }
      const double spread = std::max(from.program.set.upper()[a] - to.program.set.lower()[c],
                                     to.program.set.upper()[c] - from.program.set.lower()[a]);
      b += 0.5 * spread * spread;
    }
  }
  return b;
}

void add_distributed_checks(BoundReport& report, const GraphProblem& graph, const DistributedRun& run,
                            std::optional<double> optimum, double inner_slack, Slot t) {
  const double td = static_cast<double>(t);
  const std::size_t g = graph.shared_dim();
  double total = 0.0, identity = -std::numeric_limits<double>::infinity(), consensus = 0.0;
  std::vector<std::vector<double>> theta(graph.nodes.size());
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const auto xb = run.nodes[n].x_bar(t);
    theta[n].assign(xb.end() - static_cast<std::ptrdiff_t>(g), xb.end());
  }
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const Trace& trace = run.nodes[n];
    total += trace.time_average(t, 0);
    const QueueState q = trace.queues_at(t);
    const auto& program = graph.nodes[n].program;
    for (std::size_t k = 0; k < program.num_ineq(); ++k) {
      identity = std::max(identity, trace.time_average(t, k + 1) - program.c[k] - q.ineq[k] / td);
    }
    const auto& outs = graph.topology.out_links(n);
    for (std::size_t o = 0; o < outs.size(); ++o) {
      const NodeId j = graph.topology.links()[outs[o]].to;
      for (std::size_t i = 0; i < g; ++i) {
        consensus = std::max(consensus, std::abs(q.eq[o * g + i] / td - (theta[n][i] - theta[j][i])));
      }
    }
  }
  report.add(t, "objective_gap", total - optimum.value_or(0.0), report.b / report.v, inner_slack + kExact,
             optimum.has_value());
  if (std::isfinite(identity)) report.add(t, "queue_identity", identity, 0.0, kExact);
  report.add(t, "consensus_identity", consensus, 0.0, kExact);
}

}  // namespace

// -- configuration -------------------------------------------------------------

Slot RunConfig::base_time() const { return ceil_inverse_square(epsilon); }

Slot RunConfig::horizon() const { return t_max ? *t_max : 4 * base_time(); }

std::vector<std::uint64_t> RunConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(kDefaultSeeds);
  std::iota(out.begin(), out.end(), std::uint64_t{1});
  return out;
}

void RunConfig::validate() const {
  check_epsilon(epsilon, "--epsilon");
  if (t_max && *t_max < 1) throw UsageError("--t-max: must be a positive integer");
  if (problem.empty()) throw UsageError("--problem: file required");
}

void SweepConfig::validate() const {
  if (epsilons.size() < 2) throw UsageError("--epsilons: a sweep needs at least two values");
  for (double e : epsilons) check_epsilon(e, "--epsilons");
  if (problem.empty()) throw UsageError("--problem: file required");
}

std::vector<Slot> checkpoints(double epsilon, Slot horizon) {
  const Slot base = ceil_inverse_square(epsilon);
  std::vector<Slot> out{(base + 3) / 4, base, 2 * base, 4 * base, horizon};
  std::erase_if(out, [&](Slot t) { return t < 1 || t > horizon; });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "skipped";
}

bool BoundReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const BoundCheck& c) { return c.status == CheckStatus::fail; });
}

void BoundReport::add(Slot t, std::string check, double measured, double cap, double slack, bool available) {
  BoundCheck row{t, std::move(check), measured, cap, slack, CheckStatus::skipped};
  if (available) row.status = measured <= cap + slack ? CheckStatus::pass : CheckStatus::fail;
  checks.push_back(std::move(row));
}

// -- reference values ----------------------------------------------------------

Reference compute_reference(const ProblemFile& file) {
  Reference ref;
  auto declared = [&]() -> std::optional<OracleResult> {
    if (!file.optimum) return std::nullopt;
    OracleResult r;
    r.optimum = *file.optimum;
    return r;
  };
  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      ref.notes.push_back(std::string(what) + " unavailable: " + e.what());
    }
  };

  switch (file.kind) {
    case ProblemKind::lp: {
      const auto& lp = file.lp();
      ref.b = compute_B_lp(lp);
      ref.optimum = declared();
      if (!ref.optimum) {
        attempt("optimum", [&] { ref.optimum = static_optimum_grid(lp, default_resolution(lp.dimension())); });
      }
      if (ref.optimum) attempt("multiplier", [&] { ref.multiplier = estimate_multiplier(lp, *ref.optimum); });
      break;
    }
    case ProblemKind::convex: {
      const auto& program = file.convex();
      ref.b = compute_B_convex(program);
      ref.optimum = declared();
      if (!ref.optimum) {
        attempt("optimum",
                [&] { ref.optimum = static_optimum_grid(program, default_resolution(program.dimension())); });
      }
      if (ref.optimum) attempt("multiplier", [&] { ref.multiplier = estimate_multiplier(program, *ref.optimum); });
      break;
    }
    case ProblemKind::stochastic: {
      const auto& problem = file.stochastic();
      ref.b = compute_B(problem);
      ref.optimum = declared();
      if (!ref.optimum) attempt("optimum", [&] { ref.optimum = stochastic_optimum(problem); });
      if (ref.optimum) attempt("multiplier", [&] { ref.multiplier = estimate_multiplier(problem, *ref.optimum); });
      break;
    }
    case ProblemKind::distributed: {
      const auto& graph = file.distributed().graph;
      ref.b = distributed_B(graph);
      ref.optimum = declared();
      break;
    }
  }
  if (ref.multiplier && !ref.multiplier->certified) {
    ref.notes.push_back("multiplier not certified; bounds that need it are skipped");
  }
  return ref;
}

// -- reports -------------------------------------------------------------------

void write_bound_report(const BoundReport& report, const fs::path& dir) {
  {
    auto out = open_output(dir / "bound_report.csv");
    write_csv_row(out, {"t", "check", "measured", "cap", "slack", "status"});
    for (const auto& c : report.checks) {
      write_csv_row(out, {std::to_string(c.t), c.check, format_number(c.measured), format_number(c.cap),
                          format_number(c.slack), to_string(c.status)});
    }
  }
  json doc;
  doc["kind"] = report.kind;
  doc["epsilon"] = report.epsilon;
  doc["V"] = report.v;
  doc["t_max"] = report.t_max;
  doc["B"] = report.b;
  doc["y0_opt"] = number_or_null(report.y0_opt);
  doc["oracle_error_bar"] = report.oracle_error_bar;
  doc["mu"] = report.mu ? json(*report.mu) : json(nullptr);
  doc["mu_certified"] = report.mu_certified;
  doc["runs"] = report.runs;
  doc["notes"] = report.notes;
  doc["passed"] = report.passed();
  doc["checks"] = json::array();
  for (const auto& c : report.checks) {
    doc["checks"].push_back({{"t", c.t},
                             {"check", c.check},
                             {"measured", c.measured},
                             {"cap", c.cap},
                             {"slack", c.slack},
                             {"status", to_string(c.status)}});
  }
  auto out = open_output(dir / "bound_report.json");
  out << doc.dump(2) << '\n';
}

// -- commands ------------------------------------------------------------------

BoundReport run_command(const RunConfig& config) {
  config.validate();
  const ProblemFile file = load(config.problem);
  if (file.kind == ProblemKind::distributed) return distributed_command(config);
  prepare_output(config.out);

  const Slot horizon = config.horizon();
  const auto seeds = config.seed_list();
  const Reference ref = compute_reference(file);
  const EngineRuns runs = run_engine(file, config.v(), horizon, seeds, config.inner_tolerance, true);
  const Constants k = constants_of(file);

  if (file.kind == ProblemKind::stochastic) {
    parallel_for(runs.traces.size(), [&](std::size_t i) {
      auto out = open_output(config.out / ("trace_seed_" + std::to_string(runs.seeds[i]) + ".csv"));
      write_stochastic_trace(out, runs.traces[i]);
    });
  } else {
    auto out = open_output(config.out / "trace.csv");
    write_program_trace(out, runs.traces.front());
  }

  BoundReport report = make_report(file, ref, config.epsilon, horizon, runs.traces.size());
  for (Slot t : checkpoints(config.epsilon, horizon)) add_checks(report, runs, k, ref, t);
  write_bound_report(report, config.out);
  return report;
}

std::vector<SweepRow> sweep_command(const SweepConfig& config) {
  config.validate();
  const ProblemFile file = load(config.problem);
  if (file.kind == ProblemKind::distributed) throw UsageError("sweep: distributed problems are not supported");
  prepare_output(config.out);

  RunConfig seeds_only;
  seeds_only.seeds = config.seeds;
  const auto seeds = seeds_only.seed_list();
  const Reference ref = compute_reference(file);
  const Constants k = constants_of(file);

  std::vector<SweepRow> rows(config.epsilons.size());
  parallel_for(rows.size(), [&](std::size_t r) {
    const double eps = config.epsilons[r];
    const Slot t = ceil_inverse_square(eps);
    const EngineRuns runs = run_engine(file, 1.0 / eps, t, seeds, config.inner_tolerance, false);
    BoundReport report = make_report(file, ref, eps, t, runs.traces.size());
    add_checks(report, runs, k, ref, t);

    SweepRow& row = rows[r];
    row.epsilon = eps;
    row.t = t;
    row.cap_obj = ref.b * eps;
    row.max_violation = -std::numeric_limits<double>::infinity();
    bool failed = false, skipped = false;
    for (const auto& c : report.checks) {
      if (c.check == "objective_gap") row.obj_gap = c.measured;
      if (c.check.starts_with("violation_") || c.check.starts_with("equality_")) {
        row.max_violation = std::max(row.max_violation, c.measured);
        if (c.status != CheckStatus::skipped) row.cap_violation = c.cap;
      }
      if (c.check == "objective_gap" || c.check.starts_with("violation_") || c.check.starts_with("equality_")) {
        failed = failed || c.status == CheckStatus::fail;
        skipped = skipped || c.status == CheckStatus::skipped;
      }
    }
    row.pass = failed ? CheckStatus::fail : skipped ? CheckStatus::skipped : CheckStatus::pass;
  });

  auto out = open_output(config.out / "sweep.csv");
  write_csv_row(out, {"epsilon", "t", "obj_gap", "max_violation", "cap_obj", "cap_violation", "pass"});
  for (const auto& row : rows) {
    const char* pass = row.pass == CheckStatus::pass ? "true" : row.pass == CheckStatus::fail ? "false" : "skipped";
    write_csv_row(out, {format_number(row.epsilon), std::to_string(row.t), format_number(row.obj_gap),
                        format_number(row.max_violation), format_number(row.cap_obj),
                        row.cap_violation ? format_number(*row.cap_violation) : std::string(), pass});
  }
  return rows;
}

OracleReport oracle_command(const OracleConfig& config) {
  if (config.resolution && !(*config.resolution > 0.0)) throw UsageError("--resolution: must be positive");
  const ProblemFile file = load(config.problem);
  if (file.kind == ProblemKind::distributed) throw UsageError("oracle: distributed problems are not supported");
  prepare_output(config.out);

  OracleReport report;
  switch (file.kind) {
    case ProblemKind::lp: {
      const auto& lp = file.lp();
      report.optimum = static_optimum_grid(lp, config.resolution.value_or(default_resolution(lp.dimension())));
      if (lp.num_constraints() > 0) report.multiplier = estimate_multiplier(lp, report.optimum);
      break;
    }
    case ProblemKind::convex: {
      const auto& program = file.convex();
      report.optimum =
          static_optimum_grid(program, config.resolution.value_or(default_resolution(program.dimension())));
      if (program.num_ineq() + program.num_eq() > 0) {
        report.multiplier = estimate_multiplier(program, report.optimum);
      }
      break;
    }
    case ProblemKind::stochastic:
      report.optimum = stochastic_optimum(file.stochastic(), config.resolution.value_or(0.02));
      report.multiplier = estimate_multiplier(file.stochastic(), report.optimum);
      break;
    case ProblemKind::distributed:
      break;
  }

  json doc;
  doc["optimum"] = report.optimum.optimum;
  doc["optimizer"] = report.optimum.optimizer;
  doc["mu"] = report.multiplier ? json(report.multiplier->mu) : json(nullptr);
  doc["margin"] = report.multiplier ? json(report.multiplier->margin) : json(nullptr);
  doc["certified"] = report.multiplier ? report.multiplier->certified : false;
  doc["resolution"] = report.optimum.resolution;
  doc["error_bar"] = report.optimum.error_bar;
  if (report.optimum.dual_bound) doc["dual_bound"] = *report.optimum.dual_bound;
  if (!report.optimum.policy.empty()) doc["policy"] = report.optimum.policy;
  auto out = open_output(config.out / "oracle.json");
  out << doc.dump(2) << '\n';
  return report;
}

BoundReport distributed_command(const RunConfig& config) {
  config.validate();
  const ProblemFile file = load(config.problem);
  if (file.kind != ProblemKind::distributed) {
    throw UsageError(std::string("distributed: problem kind is '") + to_string(file.kind) + "'");
  }
  prepare_output(config.out);

  const GraphProblem& graph = file.distributed().graph;
  const Slot horizon = config.horizon();
  const Reference ref = compute_reference(file);
  const DistributedRun run = run_distributed(graph, config.v(), horizon);

  parallel_for(graph.nodes.size(), [&](std::size_t n) {
    auto out = open_output(config.out / ("node_" + std::to_string(n) + ".csv"));
    write_program_trace(out, run.nodes[n]);
  });
  {
    auto out = open_output(config.out / "consensus.csv");
    write_csv_row(out, {"t", "max_pairwise_theta_gap", "sum_objective", "max_constraint_violation"});
    for (Slot t = 1; t <= horizon; ++t) {
      const auto s = consensus_summary(graph, run, t);
      write_csv_row(out, {std::to_string(t), format_number(s.max_pairwise_theta_gap),
                          format_number(s.sum_objective), format_number(s.max_constraint_violation)});
    }
  }

  BoundReport report = make_report(file, ref, config.epsilon, horizon, 1);
  for (Slot t : checkpoints(config.epsilon, horizon)) {
    add_distributed_checks(report, graph, run, file.optimum, config.inner_tolerance, t);
  }
  write_bound_report(report, config.out);
  return report;
}

}  // namespace dpp::cli
