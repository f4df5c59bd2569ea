#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dpp/convex.hpp"
#include "dpp/function.hpp"
#include "dpp/queue.hpp"
#include "dpp/trace.hpp"

namespace dpp {

using NodeId = std::size_t;

struct Link {
  NodeId from;
  NodeId to;
};

/// Directed graph whose undirected version must be connected.
class GraphTopology {
 public:
  GraphTopology() = default;
  /// Throws ValidationError on self-loops, duplicate links, out-of-range ids,
  /// or a disconnected undirected graph.
  GraphTopology(std::size_t num_nodes, std::vector<Link> links);

  std::size_t num_nodes() const { return num_nodes_; }
  const std::vector<Link>& links() const { return links_; }
  /// Indices into links() of links (n, j), in link order.
  const std::vector<std::size_t>& out_links(NodeId n) const { return out_.at(n); }
  /// Indices into links() of links (a, n), in link order.
  const std::vector<std::size_t>& in_links(NodeId n) const { return in_.at(n); }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// A node's local convex program over its decision vector [x^(n), θ^(n)];
/// the trailing `shared_dim` coordinates are the estimate θ^(n) of the
/// common variables. Equality functions are not allowed here: the only
/// equality queues are the consensus queues on links.
struct NodeProgram {
  ConvexProgram program;
  std::size_t shared_dim = 0;

  std::size_t dimension() const { return program.dimension(); }
  std::size_t local_dim() const { return program.dimension() - shared_dim; }
};

struct GraphProblem {
  GraphTopology topology;
  std::vector<NodeProgram> nodes;

  std::size_t shared_dim() const { return nodes.empty() ? 0 : nodes.front().shared_dim; }
  void validate() const;
};

/// State owned by one node: its last decision, its inequality queues Q^(n)
/// and the consensus queues Z^(n,j)_i of its outgoing links (stored in
/// `queues.eq`, out-link order major, component i minor).
struct NodeState {
  NodeId id = 0;
  std::vector<double> decision;
  QueueState queues;

  std::span<const double> outgoing_z(std::size_t out_index, std::size_t shared_dim) const;
};

enum class MessageKind {
  queue_values,  // Z^(n,j) sent n -> j before decisions
  estimate,      // θ^(j) sent j -> n after decisions
};

struct RoundMessage {
  std::size_t link;
  NodeId sender;
  NodeId receiver;
  MessageKind kind;
  std::vector<double> payload;
};

/// Z^(a,n) received by node n over in-link (a, n).
struct IncomingQueues {
  std::size_t link;
  NodeId from;
  std::vector<double> z;
};

struct NodeDecision {
  std::vector<double> decision;
  InnerResult inner;
};

/// Minimizes V f^(n) + Q^(n) g^(n) + sum_i θ_i [sum_out Z_i^(n,j) - sum_in Z_i^(a,n)]
/// using only the node's own program/state and the Z values of its in-links.
NodeDecision node_local_decision(const NodeProgram& program, const NodeState& state,
                                 std::span<const IncomingQueues> incoming, double v,
                                 const InnerSolverParams& inner);

struct DistributedState {
  std::vector<NodeState> nodes;
  Slot round = 0;

  static DistributedState initial(const GraphProblem& problem);
};

/// Return false to drop a message (fault injection in tests).
using MessageFilter = std::function<bool(const RoundMessage&)>;

struct RoundOutcome {
  std::vector<NodeDecision> decisions;
  std::vector<RoundMessage> messages;
};

/// One synchronous round: Z exchange, local decisions, θ exchange, queue
/// updates. Throws ProtocolError naming the link when a message is missing
/// or duplicated.
RoundOutcome round(const GraphProblem& problem, DistributedState& state, double v,
                   const InnerSolverParams& inner, const MessageFilter& filter = {});

struct DistributedRun {
  /// Per-node traces: y = (f^(n), g^(n)...), w = θ^(n) - θ^(j) per out-link
  /// and component, queues = (Q^(n), Z^(n,·)), x = [x^(n), θ^(n)].
  std::vector<Trace> nodes;
  double max_inner_step = 0.0;
};

DistributedRun run_distributed(const GraphProblem& problem, double v, Slot t_max,
                               const InnerSolverParams& inner = {});

struct ConsensusSummary {
  Slot t = 0;
  double max_pairwise_theta_gap = 0.0;  // max over pairs of ||θ̄^(n) - θ̄^(m)||_inf
  double sum_objective = 0.0;           // sum_n f^(n)(x̄^(n), θ̄^(n))
  double max_constraint_violation = 0.0;  // max(0, max_n,k g_k^(n)(x̄^(n), θ̄^(n)) - c_k^(n))
};

ConsensusSummary consensus_summary(const GraphProblem& problem, const DistributedRun& run, Slot t);

// -- single summed constraint via replicated variables ----------------------

/// Node n's original data: x^(n) in local_set, f^(n) and g^(n) over [x^(n), θ].
struct SharedConstraintNode {
  FeasibleSet local_set;
  ConvexFunction f;
  ConvexFunction g;
};

/// Every node m carries replicas x^(n,m) of every node's variables plus θ^(m);
/// all of them are consensus-shared. Node 0 owns the queue for
/// sum_n g^(n)(x^(n,0), θ^(0)) <= c.
struct ReplicatedProblem {
  GraphProblem problem;
  std::vector<std::size_t> replica_offset;  // start of x^(n,·) within a node's vector
  std::vector<std::size_t> replica_dim;
  std::size_t theta_offset = 0;
  std::size_t theta_dim = 0;

  std::vector<double> replica(std::span<const double> decision, NodeId owner) const;
  std::vector<double> theta(std::span<const double> decision) const;
};

ReplicatedProblem replicate_shared_constraint(const GraphTopology& topology,
                                              const std::vector<SharedConstraintNode>& nodes,
                                              const FeasibleSet& theta_set, double c);

}  // namespace dpp
