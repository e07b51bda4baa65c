#include "ergograph/distributed.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ergograph/csv.hpp"

namespace ergograph {
namespace {

struct Inbound {
  int source = 0;  // 1-based sender
  double weight = 0.0;
};

// One node's synchronous update; sees nothing beyond its own state and the
// messages that arrived this round.
NodeState advance_node(const NodeState& prev,
                       const std::vector<std::pair<double, double>>& messages,
                       double self_weight, double lambda1, double gamma_next,
                       double t_next) {
  double received = 0.0;
  for (const auto& [weight, value] : messages) received += weight * value;
  received += self_weight * prev.current;

  NodeState next;
  next.node_id = prev.node_id;
  next.round = prev.round + 1;
  next.current = received / lambda1;
  next.accumulator =
      prev.accumulator * (1.0 - gamma_next) / lambda1 + t_next * next.current;
  return next;
}

}  // namespace

DiffusionTrace simulate_diffusion(const Graph& g, const ShiftOperator& s,
                                  double lambda1, const Eigen::VectorXd& x,
                                  int depth, std::ostream* trace) {
  const int n = g.n;
  if (s.size() != n)
    throw std::invalid_argument("simulate_diffusion: graph/shift size mismatch");
  if (x.size() != n)
    throw std::invalid_argument("simulate_diffusion: signal size mismatch");
  if (depth < 1)
    throw std::invalid_argument("simulate_diffusion: depth must be >= 1");
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("simulate_diffusion: lambda1 must be positive");

  // In-neighbor lists in ascending sender order; weights come from the shift.
  std::vector<std::vector<Inbound>> in(static_cast<size_t>(n) + 1);
  long long directed_edges = 0;
  for (const Edge& e : g.edges) {
    in[static_cast<size_t>(e.target)].push_back(
        {e.source, s.matrix()(e.target - 1, e.source - 1)});
    ++directed_edges;
    if (!g.directed) {
      in[static_cast<size_t>(e.source)].push_back(
          {e.target, s.matrix()(e.source - 1, e.target - 1)});
      ++directed_edges;
    }
  }
  for (auto& list : in)
    std::sort(list.begin(), list.end(),
              [](const Inbound& a, const Inbound& b) { return a.source < b.source; });

  std::vector<NodeState> state(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) state[static_cast<size_t>(k)] = {k + 1, x(k), x(k), 0};

  auto dump_round = [&](int round) {
    if (!trace) return;
    for (int k = 0; k < n; ++k)
      *trace << round << ',' << k + 1 << ','
             << g17(state[static_cast<size_t>(k)].current) << '\n';
  };
  if (trace) *trace << "round,node,current\n";
  dump_round(0);

  double gamma = 1.0, t = 1.0;
  std::vector<NodeState> next(static_cast<size_t>(n));
  std::vector<std::pair<double, double>> messages;
  for (int round = 1; round < depth; ++round) {
    gamma = gamma / (gamma + lambda1);
    t = t * (1.0 - gamma);
    for (int k = 0; k < n; ++k) {
      messages.clear();
      for (const Inbound& ib : in[static_cast<size_t>(k + 1)])
        messages.emplace_back(ib.weight,
                              state[static_cast<size_t>(ib.source - 1)].current);
      next[static_cast<size_t>(k)] =
          advance_node(state[static_cast<size_t>(k)], messages,
                       s.matrix()(k, k), lambda1, gamma, t);
    }
    state.swap(next);
    dump_round(round);
  }

  DiffusionTrace out;
  out.rounds = depth - 1;
  out.messages_sent = static_cast<long long>(depth - 1) * directed_edges;
  out.per_node_estimates.resize(n);
  for (int k = 0; k < n; ++k)
    out.per_node_estimates(k) = state[static_cast<size_t>(k)].accumulator;
  return out;
}

}  // namespace ergograph
