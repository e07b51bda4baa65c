#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "ergograph/bounds.hpp"
#include "ergograph/graph.hpp"
#include "ergograph/process.hpp"
#include "json.hpp"

namespace ergograph {

enum class GraphFamily { er, covariance, sbm, gmrf };
enum class EstimatorKind { shift_average, optimal };

const char* family_name(GraphFamily f);
const char* estimator_name(EstimatorKind k);
GraphFamily family_from_name(const std::string& name);
EstimatorKind estimator_from_name(const std::string& name);

struct ExperimentConfig {
  GraphFamily family = GraphFamily::er;
  std::vector<int> sizes = {10, 40, 70, 100};
  int graphs_per_size = 10;
  long trials_per_graph = 10000;
  double mu = 3.0;
  double snr_db = 10.0;
  // Deviation threshold; defaults to 0.1 * 10^(snr_db/10) when unset.
  std::optional<double> epsilon;
  std::vector<EstimatorKind> estimators = {EstimatorKind::shift_average,
                                           EstimatorKind::optimal};
  std::uint64_t master_seed = 1;
  int threads = 1;

  double er_p = 0.2;
  int sbm_communities = 4;
  double sbm_p_in = 0.6;
  double sbm_p_out = 0.1;
  double sensor_rho_min = 0.01;
  double sensor_rho_max = 1.0;
  double sensor_thres_factor = 1.75;
  double gmrf_a_fraction = 0.99;  // a = fraction / lambda1
  long covariance_samples = 100000;
  bool logspace_literal_dc = false;
};

double resolved_epsilon(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Probe vertex: largest Perron entry strictly below 1/sqrt(N); falls back to
// the smallest entry (lowest index wins ties).  1-based.
int select_node(const Eigen::VectorXd& v1);

struct EstimatorOutcome {
  double err_prob = 0.0;       // empirical P(|estimate_k - mean_k| > eps)
  double bound_raw = 0.0;      // variance / eps^2 at the probe node
  double bound_clipped = 0.0;
  double mse = 0.0;            // empirical mean squared error at the probe node
  double variance = 0.0;       // analytic probe-node variance
};

struct GraphRecord {
  int n = 0;
  int graph_index = 0;
  std::uint64_t graph_seed = 0;
  int probe_node = 0;
  double lambda1 = 0.0;
  SpectrumRegimeKind regime = SpectrumRegimeKind::lambda1_equal_one;
  double epsilon = 0.0;
  long trials = 0;
  Eigen::VectorXd psd;            // process p
  Eigen::VectorXd shift_avg_psd;  // q at depth N, kept for auditing
  std::map<EstimatorKind, EstimatorOutcome> outcomes;
};

struct SizeAggregate {
  int n = 0;
  EstimatorKind estimator = EstimatorKind::shift_average;
  double err_prob_mean = 0.0, err_prob_min = 0.0, err_prob_max = 0.0;
  double bound_mean = 0.0, bound_min = 0.0, bound_max = 0.0;
  double mse_mean = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GraphRecord> records;  // ordered by (size, graph index)
  std::vector<SizeAggregate> aggregates;
};

// Monte-Carlo error-probability study: per (size, graph draw), build the
// family's graph and process, bound the probe-node deviation analytically,
// and estimate it empirically over seeded trials.  Deterministic for a given
// master seed regardless of thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// family,N,estimator,err_prob_mean,err_prob_min,err_prob_max,bound_mean,
// bound_min,bound_max,mse_mean,seed
void write_experiment_csv(std::ostream& os, const ExperimentReport& report);

struct GmrfDemoOptions {
  double a_fraction = 0.99;
  double mu = 3.0;
  double snr_db = 10.0;
  bool noiseless = false;  // zero psd: the draw equals the ensemble mean
};

struct GmrfDemoResult {
  SensorNetwork network;
  double lambda1 = 0.0;
  double a = 0.0, a0 = 0.0;
  Eigen::VectorXd raw;        // one field draw
  Eigen::VectorXd averaged;   // depth-N shift average of the draw
  Eigen::VectorXd true_mean;  // mu * v1
  double rel_err_raw = 0.0, rel_err_avg = 0.0;
};

// One diffusion-field realization on a random sensor layout.
GmrfDemoResult gmrf_field_demo(int n, std::uint64_t seed,
                               const GmrfDemoOptions& opt = {});

struct GmrfSweepConfig {
  int networks_per_size = 50;
  int realizations = 1000;
  double mu = 3.0;
  double snr_db = 10.0;
  double a_fraction = 0.99;
  double sensor_rho_min = 0.01;
  double sensor_rho_max = 1.0;
  double sensor_thres_factor = 1.75;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

struct MseNetworkStats {
  double mse_emp = 0.0;       // mean over realizations of ||est - mean||^2 / N
  double mse_analytic = 0.0;  // sum(q) / N
  double stderr_emp = 0.0;    // standard error of mse_emp
};

MseNetworkStats gmrf_mse_network(int n, std::uint64_t graph_seed,
                                 std::uint64_t trial_seed,
                                 const GmrfSweepConfig& cfg);

struct MseSweepPoint {
  int n = 0;
  double mse_mean = 0.0;
  double mse_analytic_mean = 0.0;
};

std::vector<MseSweepPoint> gmrf_mse_sweep(const std::vector<int>& sizes,
                                          const GmrfSweepConfig& cfg);

}  // namespace ergograph
