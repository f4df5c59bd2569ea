#include "dpp/cli/problem_file.hpp"

#include <fstream>
#include <algorithm>
#include <sstream>

#include "dpp/csv.hpp"
#include "json.hpp"

namespace dpp::cli {
namespace {

using nlohmann::json;

// A JSON value plus the path it was reached by, for error messages.
class Field {
 public:
  Field(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("field '" + (path_.empty() ? std::string("<root>") : path_) + "': " + what);
  }

  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  Field at(const std::string& key) const {
    if (!value_.is_object()) fail("expected an object");
    const auto it = value_.find(key);
    if (it == value_.end()) fail("missing required key '" + key + "'");
    return Field(*it, join(key));
  }

  std::optional<Field> find(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::vector<Field> elements() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }

  std::size_t index() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0)) {
      fail("expected a nonnegative integer");
    }
    return value_.get<std::size_t>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& e : elements()) out.push_back(e.number());
    return out;
  }

  std::vector<double> numbers(std::size_t expected) const {
    auto out = numbers();
    if (out.size() != expected) {
      fail("expected " + std::to_string(expected) + " entries, got " + std::to_string(out.size()));
    }
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

// Runs a library validation step, re-raising its message with field context.
template <typename Fn>
auto checked(const Field& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    field.fail(e.what());
  }
}

FeasibleSet parse_box(const Field& field, std::size_t dim) {
  const auto lower = field.at("lower").numbers(dim);
  const auto upper = field.at("upper").numbers(dim);
  return checked(field, [&] { return FeasibleSet::box(lower, upper); });
}

FeasibleSet parse_box(const Field& field) {
  const auto lower = field.at("lower").numbers();
  return parse_box(field, lower.size());
}

// {a, b} is affine; {q, a, b} is a diagonal quadratic. "range": [lo, hi] is optional.
ConvexFunction parse_function(const Field& field, std::size_t dim) {
  const auto a = field.at("a").numbers(dim);
  const double b = field.has("b") ? field.at("b").number() : 0.0;
  ConvexFunction f = field.has("q")
                         ? checked(field, [&] {
                             return ConvexFunction::diagonal_quadratic(field.at("q").numbers(dim), a, b);
                           })
                         : ConvexFunction::affine(a, b);
  if (auto range = field.find("range")) {
    const auto r = range->numbers(2);
    if (r[0] > r[1]) range->fail("range must satisfy lo <= hi");
    f.with_range(r[0], r[1]);
  }
  return f;
}

std::vector<ConvexFunction> parse_constraints(const Field& field, std::size_t dim, const char* bound_key,
                                              std::vector<double>& bounds, bool affine_only) {
  std::vector<ConvexFunction> out;
  for (const auto& entry : field.elements()) {
    if (affine_only && entry.has("q")) entry.fail("equality constraints must be affine {a, b}");
    out.push_back(parse_function(entry, dim));
    bounds.push_back(entry.at(bound_key).number());
  }
  return out;
}

ConvexProgram parse_program(const Field& root, FeasibleSet set) {
  const std::size_t dim = set.dimension();
  ConvexProgram program;
  program.set = std::move(set);
  program.f = parse_function(root.at("objective"), dim);
  if (auto g = root.find("constraints")) program.g = parse_constraints(*g, dim, "c", program.c, false);
  if (auto w = root.find("equalities")) program.w = parse_constraints(*w, dim, "d", program.d, true);
  checked(root, [&] { program.validate(); });
  return program;
}

DownlinkModel parse_downlink(const Field& field) {
  DownlinkModel model;
  for (const auto& ch : field.at("channels").elements()) {
    model.channels.push_back({ch.at("id").string(), ch.at("probability").number()});
  }
  for (const auto& a : field.at("arrivals").elements()) {
    if (a.has("bernoulli")) {
      const double p = a.at("bernoulli").number();
      const double amount = a.has("amount") ? a.at("amount").number() : 1.0;
      model.arrivals.push_back(checked(a, [&] { return ArrivalModel::bernoulli(p, amount); }));
    } else {
      const auto amounts = a.at("amounts").numbers();
      model.arrivals.push_back({amounts, a.at("probabilities").numbers(amounts.size())});
    }
  }
  const std::size_t users = model.arrivals.size();
  for (const auto& levels : field.at("power_levels").elements()) model.power_levels.push_back(levels.numbers());
  if (model.power_levels.size() != users) field.at("power_levels").fail("need one alphabet per user");

  if (auto table = field.find("rate_table")) {
    // rate_table.<channel> = [{"power": [...], "rates": [...]}, ...]
    std::vector<std::vector<std::pair<std::vector<double>, std::vector<double>>>> rows;
    for (const auto& ch : model.channels) {
      auto& entries = rows.emplace_back();
      for (const auto& e : table->at(ch.id).elements()) {
        entries.emplace_back(e.at("power").numbers(users), e.at("rates").numbers(users));
      }
    }
    const std::string path = table->path();
    model.rates = [rows, path](std::span<const double> power, std::size_t channel) {
      for (const auto& [p, r] : rows[channel]) {
        if (std::equal(p.begin(), p.end(), power.begin(), power.end())) return r;
      }
      std::string vec;
      for (double v : power) vec += (vec.empty() ? "" : ",") + format_number(v);
      throw SchemaError("field '" + path + "': no entry for power vector [" + vec + "]");
    };
    return model;
  }

  // mu_k = gain[S][k] * p_k, scaled by `interference` when another user transmits.
  const auto gain_field = field.at("gains");
  std::vector<std::vector<double>> gain_table;
  for (const auto& ch : model.channels) gain_table.push_back(gain_field.at(ch.id).numbers(users));
  const double interference = field.has("interference") ? field.at("interference").number() : 1.0;
  model.rates = [gain_table, interference](std::span<const double> power, std::size_t channel) {
    std::vector<double> rates(power.size());
    for (std::size_t k = 0; k < power.size(); ++k) {
      bool others = false;
      for (std::size_t j = 0; j < power.size(); ++j) others = others || (j != k && power[j] > 0.0);
      rates[k] = gain_table[channel][k] * power[k] * (others ? interference : 1.0);
    }
    return rates;
  };
  return model;
}

StochasticProblem parse_stochastic(const Field& root) {
  if (auto downlink = root.find("downlink")) {
    const auto model = parse_downlink(*downlink);
    return checked(*downlink, [&] { return build_downlink_problem(model); });
  }
  StochasticProblem problem;
  problem.c = root.at("c").numbers();
  if (problem.c.empty()) root.at("c").fail("need at least one constraint");
  const std::size_t width = problem.c.size() + 1;
  std::vector<std::string> ids;
  std::vector<double> probs;
  const auto events = root.at("events");
  for (const auto& e : events.elements()) {
    ids.push_back(e.at("id").string());
    probs.push_back(e.at("probability").number());
    std::vector<OptionVector> options;
    for (const auto& o : e.at("options").elements()) options.push_back(o.numbers(width));
    if (options.empty()) e.at("options").fail("need at least one option");
    problem.options.push_back(std::move(options));
  }
  problem.events = checked(events, [&] { return RandomEventModel(ids, probs); });
  checked(root, [&] { problem.validate(); });
  return problem;
}

LinearProgram parse_lp(const Field& root) {
  LinearProgram lp;
  lp.b = root.at("b").numbers();
  const std::size_t n = lp.b.size();
  for (const auto& row : root.at("A").elements()) lp.A.push_back(row.numbers(n));
  lp.c = root.at("c").numbers(lp.A.size());
  lp.x_min = root.at("x_min").numbers(n);
  lp.x_max = root.at("x_max").numbers(n);
  checked(root, [&] { lp.validate(); });
  return lp;
}

DistributedSpec parse_distributed(const Field& root) {
  const auto node_fields = root.at("nodes").elements();
  std::vector<Link> links;
  for (const auto& l : root.at("links").elements()) {
    const auto ends = l.elements();
    if (ends.size() != 2) l.fail("a link is [from, to]");
    links.push_back({ends[0].index(), ends[1].index()});
  }
  const GraphTopology topology =
      checked(root.at("links"), [&] { return GraphTopology(node_fields.size(), links); });

  DistributedSpec spec;
  if (auto shared = root.find("shared_constraint")) {
    // Node programs act on [x^(n), theta]; one summed constraint sum_n g^(n) <= c.
    const FeasibleSet theta_set =
        shared->has("theta_box") ? parse_box(shared->at("theta_box")) : FeasibleSet::box({}, {});
    std::vector<SharedConstraintNode> nodes;
    for (const auto& nf : node_fields) {
      const FeasibleSet local = parse_box(nf.at("box"));
      const std::size_t dim = local.dimension() + theta_set.dimension();
      nodes.push_back({local, parse_function(nf.at("objective"), dim), parse_function(nf.at("constraint"), dim)});
    }
    const double c = shared->at("c").number();
    spec.replicated = checked(*shared, [&] {
      return replicate_shared_constraint(topology, nodes, theta_set, c);
    });
    spec.graph = spec.replicated->problem;
    return spec;
  }

  const std::size_t shared_dim = root.at("shared_dim").index();
  spec.graph.topology = topology;
  for (const auto& nf : node_fields) {
    NodeProgram node;
    node.shared_dim = shared_dim;
    if (nf.has("equalities")) nf.at("equalities").fail("node programs may not declare equality constraints");
    node.program = parse_program(nf, parse_box(nf.at("box")));
    spec.graph.nodes.push_back(std::move(node));
  }
  checked(root, [&] { spec.graph.validate(); });
  return spec;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::stochastic: return "stochastic";
    case ProblemKind::convex: return "convex";
    case ProblemKind::lp: return "lp";
    case ProblemKind::distributed: return "distributed";
  }
  return "unknown";
}

ProblemFile parse_problem_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  const Field root(doc, "");
  ProblemFile file;
  const std::string kind = root.at("kind").string();
  if (root.has("name")) file.name = root.at("name").string();
  if (root.has("optimum")) file.optimum = root.at("optimum").number();
  if (kind == "stochastic") {
    file.kind = ProblemKind::stochastic;
    file.problem = parse_stochastic(root);
  } else if (kind == "convex") {
    file.kind = ProblemKind::convex;
    file.problem = parse_program(root, parse_box(root.at("box")));
  } else if (kind == "lp") {
    file.kind = ProblemKind::lp;
    file.problem = parse_lp(root);
  } else if (kind == "distributed") {
    file.kind = ProblemKind::distributed;
    file.problem = parse_distributed(root);
  } else {
    root.at("kind").fail("unknown problem kind '" + kind + "' (expected stochastic, convex, lp or distributed)");
  }
  return file;
}

ProblemFile parse_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open problem file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problem_text(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace dpp::cli
