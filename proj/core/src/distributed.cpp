#include "dpp/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "dpp/errors.hpp"

namespace dpp {
namespace {

std::string link_name(const Link& link) {
  return "(" + std::to_string(link.from) + "," + std::to_string(link.to) + ")";
}

// Finds the unique message of `kind` on `link`; throws when absent or duplicated.
const RoundMessage& find_message(const std::vector<RoundMessage>& mailbox, std::size_t link,
                                 const Link& endpoints, MessageKind kind, Slot t) {
  const RoundMessage* found = nullptr;
  for (const auto& msg : mailbox) {
    if (msg.link != link || msg.kind != kind) continue;
    if (found != nullptr) {
      throw ProtocolError("round " + std::to_string(t) + ": duplicate message on link " +
                          link_name(endpoints));
    }
    found = &msg;
  }
  if (found == nullptr) {
    const char* what = kind == MessageKind::queue_values ? "queue-value" : "estimate";
    throw ProtocolError("round " + std::to_string(t) + ": missing " + what + " message on link " +
                        link_name(endpoints));
  }
  return *found;
}

}  // namespace

GraphTopology::GraphTopology(std::size_t num_nodes, std::vector<Link> links)
    : num_nodes_(num_nodes), links_(std::move(links)), out_(num_nodes), in_(num_nodes) {
  if (num_nodes_ == 0) throw ValidationError("graph: need at least one node");
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::size_t> parent(num_nodes_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&parent](std::size_t n) {
    while (parent[n] != n) n = parent[n] = parent[parent[n]];
    return n;
  };
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const auto& link = links_[l];
    if (link.from >= num_nodes_ || link.to >= num_nodes_) {
      throw ValidationError("graph: link " + link_name(link) + " references a missing node");
    }
    if (link.from == link.to) throw ValidationError("graph: self-loop " + link_name(link));
    if (!seen.insert({link.from, link.to}).second) {
      throw ValidationError("graph: duplicate link " + link_name(link));
    }
    out_[link.from].push_back(l);
    in_[link.to].push_back(l);
    parent[root(link.from)] = root(link.to);
  }
  for (std::size_t n = 1; n < num_nodes_; ++n) {
    if (root(n) != root(0)) {
      throw ValidationError("graph: undirected version must be connected; node " +
                            std::to_string(n) + " is unreachable from node 0");
    }
  }
}

void GraphProblem::validate() const {
  if (nodes.size() != topology.num_nodes()) {
    throw ValidationError("graph problem: " + std::to_string(nodes.size()) + " node programs for " +
                          std::to_string(topology.num_nodes()) + " nodes");
  }
  const std::size_t g = shared_dim();
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const auto& node = nodes[n];
    node.program.validate();
    if (node.shared_dim != g) {
      throw ValidationError("graph problem: node " + std::to_string(n) +
                            " disagrees on the shared dimension");
    }
    if (node.shared_dim > node.program.dimension()) {
      throw ValidationError("graph problem: node " + std::to_string(n) +
                            " shared dimension exceeds its decision dimension");
    }
    if (node.program.num_eq() != 0) {
      throw ValidationError("graph problem: node " + std::to_string(n) +
                            " may not declare its own equality constraints");
    }
  }
}

std::span<const double> NodeState::outgoing_z(std::size_t out_index, std::size_t shared_dim) const {
  return std::span<const double>(queues.eq).subspan(out_index * shared_dim, shared_dim);
}

NodeDecision node_local_decision(const NodeProgram& program, const NodeState& state,
                                 std::span<const IncomingQueues> incoming, double v,
                                 const InnerSolverParams& inner) {
  const std::size_t g = program.shared_dim;
  const std::size_t offset = program.local_dim();
  if (state.queues.eq.size() % (g == 0 ? 1 : g) != 0) {
    throw ValidationError("node_local_decision: consensus queue layout mismatch");
  }
  QueueState weights(state.queues.ineq.size(), 0);
  weights.ineq = state.queues.ineq;
  ConvexFunction objective = per_slot_objective(program.program, weights, v);

  const std::size_t num_out = g == 0 ? 0 : state.queues.eq.size() / g;
  if (num_out > 0 || !incoming.empty()) {
    std::vector<double> coef(program.dimension(), 0.0);
    for (std::size_t o = 0; o < num_out; ++o) {
      const auto z = state.outgoing_z(o, g);
      for (std::size_t i = 0; i < g; ++i) coef[offset + i] += z[i];
    }
    for (const auto& in : incoming) {
      if (in.z.size() != g) {
        throw ValidationError("node_local_decision: incoming queue vector from node " +
                              std::to_string(in.from) + " has wrong length");
      }
      for (std::size_t i = 0; i < g; ++i) coef[offset + i] -= in.z[i];
    }
    objective = add_linear(objective, coef);
  }

  NodeDecision out;
  try {
    out.inner = inner_minimize(objective, program.program.set, inner);
  } catch (const NumericalError& e) {
    throw NumericalError("node " + std::to_string(state.id) + ": " + e.what());
  }
  out.decision = out.inner.x;
  return out;
}

DistributedState DistributedState::initial(const GraphProblem& problem) {
  problem.validate();
  DistributedState state;
  const std::size_t g = problem.shared_dim();
  for (NodeId n = 0; n < problem.topology.num_nodes(); ++n) {
    NodeState node;
    node.id = n;
    node.decision = problem.nodes[n].program.set.start_point();
    node.queues = QueueState(problem.nodes[n].program.num_ineq(),
                             problem.topology.out_links(n).size() * g);
    state.nodes.push_back(std::move(node));
  }
  return state;
}

RoundOutcome round(const GraphProblem& problem, DistributedState& state, double v,
                   const InnerSolverParams& inner, const MessageFilter& filter) {
  const auto& topo = problem.topology;
  const auto& links = topo.links();
  const std::size_t g = problem.shared_dim();
  const Slot t = state.round;
  RoundOutcome outcome;

  auto deliver = [&](RoundMessage msg) {
    if (!filter || filter(msg)) outcome.messages.push_back(std::move(msg));
  };

  // Phase 1: every link owner n publishes Z^(n,j) to j.
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto& link = links[l];
    const auto& outs = topo.out_links(link.from);
    const std::size_t o = static_cast<std::size_t>(std::find(outs.begin(), outs.end(), l) - outs.begin());
    const auto z = state.nodes[link.from].outgoing_z(o, g);
    deliver({l, link.from, link.to, MessageKind::queue_values, {z.begin(), z.end()}});
  }

  // Phase 2: local decisions from round-start state plus received Z values.
  outcome.decisions.reserve(topo.num_nodes());
  for (NodeId n = 0; n < topo.num_nodes(); ++n) {
    std::vector<IncomingQueues> incoming;
    for (std::size_t l : topo.in_links(n)) {
      const auto& msg = find_message(outcome.messages, l, links[l], MessageKind::queue_values, t);
      incoming.push_back({l, msg.sender, msg.payload});
    }
    try {
      outcome.decisions.push_back(
          node_local_decision(problem.nodes[n], state.nodes[n], incoming, v, inner));
    } catch (const NumericalError& e) {
      throw NumericalError("round " + std::to_string(t) + ": " + e.what());
    }
  }

  // Phase 3: every out-neighbour j returns θ^(j) to the link owner.
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto& link = links[l];
    const auto& decision = outcome.decisions[link.to].decision;
    deliver({l, link.to, link.from, MessageKind::estimate,
             {decision.end() - static_cast<std::ptrdiff_t>(g), decision.end()}});
  }

  // Phase 4: queue updates.
  for (NodeId n = 0; n < topo.num_nodes(); ++n) {
    auto& node = state.nodes[n];
    const auto& program = problem.nodes[n].program;
    const auto& decision = outcome.decisions[n].decision;
    for (std::size_t k = 0; k < program.num_ineq(); ++k) {
      node.queues.ineq[k] = update_inequality(node.queues.ineq[k], program.g[k](decision), program.c[k]);
    }
    const auto& outs = topo.out_links(n);
    const std::size_t offset = problem.nodes[n].local_dim();
    for (std::size_t o = 0; o < outs.size(); ++o) {
      const auto& msg = find_message(outcome.messages, outs[o], links[outs[o]], MessageKind::estimate, t);
      for (std::size_t i = 0; i < g; ++i) {
        auto& z = node.queues.eq[o * g + i];
        z = update_equality(z, decision[offset + i] - msg.payload[i], 0.0);
      }
    }
    node.decision = decision;
  }
  ++state.round;
  return outcome;
}

DistributedRun run_distributed(const GraphProblem& problem, double v, Slot t_max,
                               const InnerSolverParams& inner) {
  if (!(v > 0.0)) throw DomainError("run_distributed: v must be positive");
  if (t_max < 1) throw DomainError("run_distributed: t_max must be >= 1");
  DistributedState state = DistributedState::initial(problem);
  const auto& topo = problem.topology;
  const std::size_t g = problem.shared_dim();

  DistributedRun run;
  for (NodeId n = 0; n < topo.num_nodes(); ++n) {
    const auto& program = problem.nodes[n].program;
    run.nodes.emplace_back(program.num_ineq(), topo.out_links(n).size() * g, program.dimension());
    run.nodes.back().reserve(static_cast<std::size_t>(t_max));
  }

  std::vector<double> y, w;
  for (Slot t = 0; t < t_max; ++t) {
    const RoundOutcome outcome = round(problem, state, v, inner);
    for (NodeId n = 0; n < topo.num_nodes(); ++n) {
      const auto& program = problem.nodes[n].program;
      const auto& decision = outcome.decisions[n].decision;
      run.max_inner_step = std::max(run.max_inner_step, outcome.decisions[n].inner.final_step);
      y.assign(program.num_ineq() + 1, 0.0);
      y[0] = program.f(decision);
      for (std::size_t k = 0; k < program.num_ineq(); ++k) y[k + 1] = program.g[k](decision);
      const auto& outs = topo.out_links(n);
      const std::size_t offset = problem.nodes[n].local_dim();
      w.assign(outs.size() * g, 0.0);
      for (std::size_t o = 0; o < outs.size(); ++o) {
        const auto& neighbour = outcome.decisions[topo.links()[outs[o]].to].decision;
        const std::size_t neighbour_offset = problem.nodes[topo.links()[outs[o]].to].local_dim();
        for (std::size_t i = 0; i < g; ++i) {
          w[o * g + i] = decision[offset + i] - neighbour[neighbour_offset + i];
        }
      }
      run.nodes[n].append(y, w, state.nodes[n].queues, decision);
    }
  }
  return run;
}

ConsensusSummary consensus_summary(const GraphProblem& problem, const DistributedRun& run, Slot t) {
  ConsensusSummary summary;
  summary.t = t;
  const std::size_t g = problem.shared_dim();
  std::vector<std::vector<double>> averages;
  for (std::size_t n = 0; n < run.nodes.size(); ++n) {
    averages.push_back(run.nodes[n].x_bar(t));
    const auto& program = problem.nodes[n].program;
    summary.sum_objective += program.f(averages.back());
    for (std::size_t k = 0; k < program.num_ineq(); ++k) {
      summary.max_constraint_violation = std::max(
          summary.max_constraint_violation, program.g[k](averages.back()) - program.c[k]);
    }
  }
  for (std::size_t n = 0; n < averages.size(); ++n) {
    const std::size_t on = problem.nodes[n].local_dim();
    for (std::size_t m = n + 1; m < averages.size(); ++m) {
      const std::size_t om = problem.nodes[m].local_dim();
      for (std::size_t i = 0; i < g; ++i) {
        summary.max_pairwise_theta_gap = std::max(
            summary.max_pairwise_theta_gap, std::abs(averages[n][on + i] - averages[m][om + i]));
      }
    }
  }
  return summary;
}

std::vector<double> ReplicatedProblem::replica(std::span<const double> decision, NodeId owner) const {
  const auto start = decision.begin() + static_cast<std::ptrdiff_t>(replica_offset.at(owner));
  return {start, start + static_cast<std::ptrdiff_t>(replica_dim.at(owner))};
}

std::vector<double> ReplicatedProblem::theta(std::span<const double> decision) const {
  const auto start = decision.begin() + static_cast<std::ptrdiff_t>(theta_offset);
  return {start, start + static_cast<std::ptrdiff_t>(theta_dim)};
}

ReplicatedProblem replicate_shared_constraint(const GraphTopology& topology,
                                              const std::vector<SharedConstraintNode>& nodes,
                                              const FeasibleSet& theta_set, double c) {
  const std::size_t count = topology.num_nodes();
  if (nodes.size() != count) {
    throw ValidationError("replicate_shared_constraint: need one node description per graph node");
  }
  if (!theta_set.is_box()) {
    throw ValidationError("replicate_shared_constraint: shared set must be a box");
  }
  if (!std::isfinite(c)) throw ValidationError("replicate_shared_constraint: c is not finite");

  ReplicatedProblem out;
  FeasibleSet all = FeasibleSet::box({}, {});
  std::size_t offset = 0;
  for (std::size_t n = 0; n < count; ++n) {
    const auto& node = nodes[n];
    if (!node.local_set.is_box()) {
      throw ValidationError("replicate_shared_constraint: node " + std::to_string(n) +
                            " local set must be a box");
    }
    const std::size_t expected = node.local_set.dimension() + theta_set.dimension();
    if (node.f.dimension() != expected || node.g.dimension() != expected) {
      throw ValidationError("replicate_shared_constraint: node " + std::to_string(n) +
                            " functions must act on [x^(n), theta]");
    }
    out.replica_offset.push_back(offset);
    out.replica_dim.push_back(node.local_set.dimension());
    offset += node.local_set.dimension();
    all = FeasibleSet::product(all, node.local_set);
  }
  out.theta_offset = offset;
  out.theta_dim = theta_set.dimension();
  all = FeasibleSet::product(all, theta_set);
  const std::size_t dim = all.dimension();

  auto indices_for = [&](std::size_t owner) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < out.replica_dim[owner]; ++i) idx.push_back(out.replica_offset[owner] + i);
    for (std::size_t i = 0; i < out.theta_dim; ++i) idx.push_back(out.theta_offset + i);
    return idx;
  };

  std::vector<ConvexFunction> summands;
  for (std::size_t n = 0; n < count; ++n) summands.push_back(embed(nodes[n].g, dim, indices_for(n)));
  std::vector<WeightedTerm> terms;
  for (const auto& s : summands) terms.push_back({1.0, &s});
  ConvexFunction shared_g = weighted_sum(terms);
  {
    // Opaque summands lose their declared ranges in the generic sum; carry the total.
    double lo = 0.0, hi = 0.0;
    bool ranged = true;
    for (const auto& s : summands) {
      if (s.form()) continue;
      if (!s.declared_range()) {
        ranged = false;
        break;
      }
    }
    if (!shared_g.form() && ranged) {
      for (std::size_t n = 0; n < count; ++n) {
        const auto r = summands[n].form() ? summands[n].range_over_box(all.lower(), all.upper())
                                          : summands[n].declared_range();
        lo += r->lo;
        hi += r->hi;
      }
      shared_g.with_range(lo, hi);
    }
  }

  std::vector<NodeProgram> programs;
  for (std::size_t m = 0; m < count; ++m) {
    NodeProgram node;
    node.shared_dim = dim;
    node.program.f = embed(nodes[m].f, dim, indices_for(m));
    node.program.set = all;
    if (m == 0) {
      node.program.g.push_back(shared_g);
      node.program.c.push_back(c);
    }
    programs.push_back(std::move(node));
  }
  out.problem = GraphProblem{topology, std::move(programs)};
  out.problem.validate();
  return out;
}

}  // namespace dpp
