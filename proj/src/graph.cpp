#include "ergograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace ergograph {
namespace {

using json = nlohmann::json;

std::vector<std::vector<int>> skeleton_adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(g.n) + 1);
  for (const Edge& e : g.edges) {
    adj[static_cast<size_t>(e.source)].push_back(e.target);
    adj[static_cast<size_t>(e.target)].push_back(e.source);
  }
  return adj;
}

// Retries body() until its output is connected; throws after the cap.
template <typename Body>
Graph resample_until_connected(const char* who, Body body) {
  for (int attempt = 0; attempt < kConnectivityResampleCap; ++attempt) {
    Graph g = body();
    if (is_connected(g)) return g;
  }
  throw std::runtime_error(std::string(who) + ": no connected draw in " +
                           std::to_string(kConnectivityResampleCap) +
                           " attempts");
}

}  // namespace

bool is_connected(const Graph& g) {
  if (g.n <= 0) return false;
  if (g.n == 1) return true;
  auto adj = skeleton_adjacency(g);
  std::vector<char> seen(static_cast<size_t>(g.n) + 1, 0);
  std::vector<int> stack{1};
  seen[1] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == g.n;
}

void validate_graph(const Graph& g, bool require_positive_weights) {
  if (g.n < 1) throw std::invalid_argument("graph: n must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : g.edges) {
    if (e.source < 1 || e.source > g.n || e.target < 1 || e.target > g.n)
      throw std::invalid_argument("graph: vertex index out of range");
    if (e.source == e.target)
      throw std::invalid_argument("graph: self loops are not allowed");
    if (!std::isfinite(e.weight) || e.weight == 0.0)
      throw std::invalid_argument("graph: edge weights must be finite and nonzero");
    if (require_positive_weights && e.weight <= 0.0)
      throw std::invalid_argument("graph: edge weights must be positive");
    if (!seen.emplace(e.source, e.target).second)
      throw std::invalid_argument("graph: duplicate edge");
    if (!g.directed && !seen.emplace(e.target, e.source).second)
      throw std::invalid_argument("graph: duplicate edge");
  }
}

Graph directed_cycle(int n) {
  if (n < 2) throw std::invalid_argument("directed_cycle: n must be >= 2");
  Graph g{n, true, {}};
  g.edges.reserve(static_cast<size_t>(n));
  for (int v = 1; v <= n; ++v) g.edges.push_back({v, 1 + v % n, 1.0});
  return g;
}

Graph erdos_renyi(int n, double p, Rng& rng) {
  if (n < 2) throw std::invalid_argument("erdos_renyi: n must be >= 2");
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("erdos_renyi: p must be in (0, 1]");
  std::bernoulli_distribution coin(p);
  return resample_until_connected("erdos_renyi", [&] {
    Graph g{n, false, {}};
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (coin(rng)) g.edges.push_back({i, j, 1.0});
    return g;
  });
}

Graph stochastic_block_model(int n, int communities, double p_in, double p_out,
                             Rng& rng) {
  if (communities < 1)
    throw std::invalid_argument("stochastic_block_model: communities must be >= 1");
  if (n < communities)
    throw std::invalid_argument("stochastic_block_model: need n >= communities");
  if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
    throw std::invalid_argument(
        "stochastic_block_model: need 0 <= p_out <= p_in <= 1");

  // First (n mod c) communities take one extra node.
  std::vector<int> community(static_cast<size_t>(n) + 1, 0);
  int base = n / communities, extra = n % communities, v = 1;
  for (int c = 0; c < communities; ++c) {
    int sz = base + (c < extra ? 1 : 0);
    for (int k = 0; k < sz; ++k) community[static_cast<size_t>(v++)] = c;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return resample_until_connected("stochastic_block_model", [&] {
    Graph g{n, false, {}};
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        double p = community[static_cast<size_t>(i)] ==
                           community[static_cast<size_t>(j)]
                       ? p_in
                       : p_out;
        if (unit(rng) < p) g.edges.push_back({i, j, 1.0});
      }
    return g;
  });
}

SensorNetwork sensor_network(int n, double rho_min, double rho_max,
                             double thres_factor, Rng& rng) {
  if (n < 2) throw std::invalid_argument("sensor_network: n must be >= 2");
  if (!(rho_min > 0.0) || !(rho_max >= rho_min))
    throw std::invalid_argument("sensor_network: need 0 < rho_min <= rho_max");
  if (!(thres_factor > 0.0))
    throw std::invalid_argument("sensor_network: thres_factor must be > 0");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < kConnectivityResampleCap; ++attempt) {
    std::vector<std::array<double, 2>> pos(static_cast<size_t>(n));
    for (auto& p : pos) {
      p[0] = unit(rng);
      p[1] = unit(rng);
    }

    Eigen::MatrixXd d2(n, n);
    double d2_min = std::numeric_limits<double>::infinity(), d2_max = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double dx = pos[i][0] - pos[j][0], dy = pos[i][1] - pos[j][1];
        double d = dx * dx + dy * dy;
        d2(i, j) = d2(j, i) = d;
        d2_min = std::min(d2_min, d);
        d2_max = std::max(d2_max, d);
      }

    double alpha, beta;
    if (d2_max - d2_min < 1e-15) {
      if (std::abs(rho_max - rho_min) > 1e-15)
        throw std::runtime_error(
            "sensor_network: degenerate geometry, all pairwise distances equal");
      beta = 0.0;
      alpha = rho_max;
    } else {
      beta = std::log(rho_max / rho_min) / (d2_max - d2_min);
      alpha = rho_max * std::exp(beta * d2_min);
    }

    double rho_sum = 0.0;
    Eigen::MatrixXd rho(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        rho(i, j) = alpha * std::exp(-beta * d2(i, j));
        rho_sum += rho(i, j);
      }
    double rho_thres = thres_factor * rho_sum / (0.5 * n * (n - 1));

    Graph g{n, false, {}};
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rho(i, j) >= rho_thres) g.edges.push_back({i + 1, j + 1, rho(i, j)});

    if (is_connected(g)) return SensorNetwork{g, pos, alpha, beta, rho_thres};
  }
  throw std::runtime_error("sensor_network: no connected draw in " +
                           std::to_string(kConnectivityResampleCap) +
                           " attempts");
}

Eigen::MatrixXd random_covariance(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_covariance: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  // Hollow Wigner bulk with spectral edge ~ +/- 1, then shifted and scaled so
  // the spectrum of sigma sits around [0.56, 0.94] with the diagonal exact.
  Eigen::MatrixXd w = (g + g.transpose()) / (2.0 * std::sqrt(2.0 * n));
  w.diagonal().setZero();
  Eigen::MatrixXd sigma = 0.25 * w;
  sigma.diagonal().array() += 1.0;
  return 0.75 * sigma;
}

CovarianceGraph covariance_graph_from(const Eigen::MatrixXd& sigma,
                                      long n_samples, Rng& rng) {
  const int n = static_cast<int>(sigma.rows());
  if (n < 1 || sigma.cols() != n)
    throw std::invalid_argument("covariance_graph: sigma must be square");
  if (n_samples < n)
    throw std::invalid_argument(
        "covariance_graph: fewer samples than nodes, empirical covariance "
        "would be rank deficient");

  // Symmetric PSD square root; tolerant of tiny negative eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("covariance_graph: eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd root =
      es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  constexpr long kBlock = 4096;
  Eigen::MatrixXd draws(n, kBlock);
  for (long done = 0; done < n_samples;) {
    long b = std::min(kBlock, n_samples - done);
    for (long t = 0; t < b; ++t)
      for (int i = 0; i < n; ++i) draws(i, t) = normal(rng);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(root * draws.leftCols(b), 1.0);
    done += b;
  }
  Eigen::MatrixXd sigma_hat =
      Eigen::MatrixXd(acc.selfadjointView<Eigen::Lower>()) /
      static_cast<double>(n_samples);

  Graph g{n, false, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sigma_hat(i, j) != 0.0)
        g.edges.push_back({i + 1, j + 1, sigma_hat(i, j)});
  return CovarianceGraph{g, sigma, sigma_hat};
}

CovarianceGraph covariance_graph(int n, long n_samples, Rng& rng) {
  return covariance_graph_from(random_covariance(n, rng), n_samples, rng);
}

const char* shift_kind_name(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::adjacency: return "adjacency";
    case ShiftKind::normalized_adjacency: return "normalized_adjacency";
    case ShiftKind::directed_cycle_adjacency: return "directed_cycle_adjacency";
    case ShiftKind::sample_covariance: return "sample_covariance";
  }
  return "unknown";
}

ShiftOperator::ShiftOperator(Eigen::MatrixXd matrix, ShiftKind kind)
    : matrix_(std::move(matrix)), kind_(kind) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("shift: matrix must be square");
  sparse_ = matrix_.sparseView();
  sparse_.makeCompressed();
  max_abs_ = matrix_.size() ? matrix_.cwiseAbs().maxCoeff() : 0.0;
}

bool ShiftOperator::is_symmetric(double tol) const {
  return (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() <=
         tol * std::max(1.0, max_abs_);
}

Eigen::VectorXd ShiftOperator::apply(const Eigen::VectorXd& x) const {
  return sparse_ * x;
}

Eigen::VectorXd ShiftOperator::apply_transpose(const Eigen::VectorXd& x) const {
  return sparse_.transpose() * x;
}

namespace {

Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const Edge& e : g.edges) {
    a(e.target - 1, e.source - 1) = e.weight;  // edge j->i lands at (i,j)
    if (!g.directed) a(e.source - 1, e.target - 1) = e.weight;
  }
  return a;
}

bool is_directed_cycle(const Graph& g) {
  if (!g.directed || static_cast<int>(g.edges.size()) != g.n) return false;
  std::vector<int> next(static_cast<size_t>(g.n) + 1, 0);
  for (const Edge& e : g.edges) {
    if (next[static_cast<size_t>(e.source)] != 0) return false;
    next[static_cast<size_t>(e.source)] = e.target;
  }
  int v = 1;
  for (int step = 0; step < g.n; ++step) {
    v = next[static_cast<size_t>(v)];
    if (v == 0) return false;
  }
  return v == 1;
}

}  // namespace

ShiftOperator adjacency_shift(const Graph& g) {
  validate_graph(g, /*require_positive_weights=*/false);
  if (g.directed && !is_directed_cycle(g))
    throw std::invalid_argument(
        "adjacency_shift: directed graphs other than the cycle are not supported");
  return ShiftOperator(adjacency_matrix(g), g.directed
                                                ? ShiftKind::directed_cycle_adjacency
                                                : ShiftKind::adjacency);
}

ShiftOperator normalized_adjacency_shift(const Graph& g) {
  validate_graph(g);
  if (g.directed)
    throw std::invalid_argument(
        "normalized_adjacency_shift: defined for undirected graphs only");
  Eigen::MatrixXd a = adjacency_matrix(g);
  Eigen::VectorXd deg = a.rowwise().sum();
  for (int i = 0; i < g.n; ++i)
    if (!(deg(i) > 0.0))
      throw std::invalid_argument(
          "normalized_adjacency_shift: vertex " + std::to_string(i + 1) +
          " has zero degree");
  Eigen::VectorXd dinv = deg.cwiseSqrt().cwiseInverse();
  return ShiftOperator(dinv.asDiagonal() * a * dinv.asDiagonal(),
                       ShiftKind::normalized_adjacency);
}

ShiftOperator covariance_shift(const Eigen::MatrixXd& sigma_hat) {
  if ((sigma_hat - sigma_hat.transpose()).cwiseAbs().maxCoeff() >
      1e-14 * std::max(1.0, sigma_hat.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance_shift: matrix must be symmetric");
  return ShiftOperator(sigma_hat, ShiftKind::sample_covariance);
}

json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.source, e.target, e.weight});
  return json{{"n", g.n}, {"directed", g.directed}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("directed") ||
      !j.contains("edges") || !j["edges"].is_array())
    throw std::invalid_argument(
        "graph json: expected an object with n, directed and edges");
  Graph g;
  g.n = j.at("n").get<int>();
  g.directed = j.at("directed").get<bool>();
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw std::invalid_argument("graph json: edges must be [i, j, w] triples");
    g.edges.push_back(
        {e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  validate_graph(g, /*require_positive_weights=*/false);
  return g;
}

json sensor_to_json(const SensorNetwork& s) {
  json j = graph_to_json(s.graph);
  json pos = json::array();
  for (const auto& p : s.positions) pos.push_back({p[0], p[1]});
  j["positions"] = std::move(pos);
  return j;
}

json covariance_to_json(const CovarianceGraph& c) {
  json j = graph_to_json(c.graph);
  j["kind"] = "sample_covariance";
  json diag = json::array();
  for (int i = 0; i < c.graph.n; ++i) diag.push_back(c.sigma_hat(i, i));
  j["diag"] = std::move(diag);
  return j;
}

ShiftOperator shift_from_json(const json& j, bool normalized) {
  Graph g = graph_from_json(j);
  if (j.value("kind", std::string()) == "sample_covariance") {
    if (!j.contains("diag"))
      throw std::invalid_argument("graph json: sample_covariance needs a diag");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const Edge& e : g.edges) {
      sigma(e.target - 1, e.source - 1) = e.weight;
      sigma(e.source - 1, e.target - 1) = e.weight;
    }
    const auto& diag = j.at("diag");
    if (static_cast<int>(diag.size()) != g.n)
      throw std::invalid_argument("graph json: diag length must equal n");
    for (int i = 0; i < g.n; ++i) sigma(i, i) = diag[i].get<double>();
    return covariance_shift(sigma);
  }
  return normalized ? normalized_adjacency_shift(g) : adjacency_shift(g);
}

}  // namespace ergograph
