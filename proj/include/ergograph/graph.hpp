#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "ergograph/random.hpp"
#include "json.hpp"

namespace ergograph {

// Vertices are 1-based everywhere (including serialized form).
struct Edge {
  int source = 0;
  int target = 0;
  double weight = 1.0;
};

struct Graph {
  int n = 0;
  bool directed = false;
  std::vector<Edge> edges;
};

// How many times a random generator redraws before giving up on connectivity.
inline constexpr int kConnectivityResampleCap = 1000;

bool is_connected(const Graph& g);

// Index range, self loops, duplicates, finite nonzero weights.
void validate_graph(const Graph& g, bool require_positive_weights = true);

// n -> 1+(n mod N) cycle with unit weights.
Graph directed_cycle(int n);

// Undirected G(n, p), resampled until connected.
Graph erdos_renyi(int n, double p, Rng& rng);

// Planted partition: near-equal communities (remainder spread one node per
// community), edge prob p_in within and p_out across, resampled until
// connected.
Graph stochastic_block_model(int n, int communities, double p_in, double p_out,
                             Rng& rng);

struct SensorNetwork {
  Graph graph;
  std::vector<std::array<double, 2>> positions;  // uniform on [0,1]^2
  double alpha = 0.0;
  double beta = 0.0;
  double rho_threshold = 0.0;
};

// Gaussian kernel proximity graph: rho(i,j) = alpha*exp(-beta*d^2) calibrated
// so rho spans [rho_min, rho_max]; keeps pairs with rho >= thres_factor * mean
// rho, weighted by rho, resampled until connected.
SensorNetwork sensor_network(int n, double rho_min, double rho_max,
                             double thres_factor, Rng& rng);

struct CovarianceGraph {
  Graph graph;                // off-diagonal nonzeros of sigma_hat
  Eigen::MatrixXd sigma;      // ground truth behind the training draws
  Eigen::MatrixXd sigma_hat;  // empirical covariance; doubles as the shift
};

// Random positive definite ground truth with spectrum inside (0, 1): a scaled
// identity plus a Wigner bulk, so the induced shift sits in the
// slowly-mixing regime instead of being crushed by a dominant root.
Eigen::MatrixXd random_covariance(int n, Rng& rng);

CovarianceGraph covariance_graph(int n, long n_samples, Rng& rng);
CovarianceGraph covariance_graph_from(const Eigen::MatrixXd& sigma,
                                      long n_samples, Rng& rng);

enum class ShiftKind {
  adjacency,
  normalized_adjacency,
  directed_cycle_adjacency,
  sample_covariance,
};

const char* shift_kind_name(ShiftKind kind);

// Dense matrix plus a sparse view used for repeated applications; entry (i,j)
// is nonzero only if the graph has an edge j -> i.
class ShiftOperator {
 public:
  ShiftOperator() = default;
  ShiftOperator(Eigen::MatrixXd matrix, ShiftKind kind);

  int size() const { return static_cast<int>(matrix_.rows()); }
  ShiftKind kind() const { return kind_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double max_abs() const { return max_abs_; }
  bool is_symmetric(double tol = 1e-12) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;            // S x
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;  // S^T x

 private:
  Eigen::MatrixXd matrix_;
  Eigen::SparseMatrix<double> sparse_;
  ShiftKind kind_ = ShiftKind::adjacency;
  double max_abs_ = 0.0;
};

ShiftOperator adjacency_shift(const Graph& g);
ShiftOperator normalized_adjacency_shift(const Graph& g);
ShiftOperator covariance_shift(const Eigen::MatrixXd& sigma_hat);

// {"n": N, "directed": bool, "edges": [[i, j, w], ...]}; generators with extra
// state add keys ("positions" for sensor layouts, "kind" + "diag" for sample
// covariances) so the shift can be rebuilt exactly.
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);
nlohmann::json sensor_to_json(const SensorNetwork& s);
nlohmann::json covariance_to_json(const CovarianceGraph& c);

// Rebuilds the shift a serialized graph describes: sample covariances from
// edges + diag, everything else from the (optionally normalized) adjacency.
ShiftOperator shift_from_json(const nlohmann::json& j, bool normalized = false);

}  // namespace ergograph
