#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "ergograph/graph.hpp"

namespace ergograph {

struct NodeState {
  int node_id = 0;         // 1-based
  double current = 0.0;    // [S^l x]_k / lambda1^l after round l
  double accumulator = 0.0;  // running normalized shift average at this node
  int round = 0;
};

struct DiffusionTrace {
  int rounds = 0;            // depth - 1
  long long messages_sent = 0;  // rounds * (number of directed edges)
  Eigen::VectorXd per_node_estimates;
};

// Synchronous message-passing evaluation of the depth-L shift average: each
// round every node sends its current value to its out-neighbors and updates
// from the received in-neighbor values only.  Edge weights are taken from the
// shift matrix (so normalized shifts work), messages from the graph topology;
// a diagonal shift entry is a local term, not a message.  Neighbor sums run
// in ascending sender order, so results are bit-reproducible.
DiffusionTrace simulate_diffusion(const Graph& g, const ShiftOperator& s,
                                  double lambda1, const Eigen::VectorXd& x,
                                  int depth, std::ostream* trace = nullptr);

}  // namespace ergograph
