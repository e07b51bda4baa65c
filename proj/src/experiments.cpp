#include "ergograph/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ergograph/csv.hpp"
#include "ergograph/estimators.hpp"

namespace ergograph {
namespace {

constexpr int kGraphAttemptCap = 25;
constexpr int kTrialBlock = 512;

void parallel_for(int units, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, units));
  if (threads <= 1) {
    for (int i = 0; i < units; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < units; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct BuiltGraph {
  ShiftOperator shift;
  std::uint64_t seed = 0;
};

// Draws the family's graph, retrying fresh seeds when connectivity gives up.
BuiltGraph build_graph(const ExperimentConfig& cfg, int n, int index) {
  std::string last_error;
  for (int attempt = 0; attempt < kGraphAttemptCap; ++attempt) {
    std::uint64_t seed = derive_seed(cfg.master_seed, SeedStream::graph,
                                     static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(index),
                                     static_cast<std::uint64_t>(attempt));
    Rng rng(seed);
    try {
      switch (cfg.family) {
        case GraphFamily::er:
          return {adjacency_shift(erdos_renyi(n, cfg.er_p, rng)), seed};
        case GraphFamily::sbm:
          return {adjacency_shift(stochastic_block_model(
                      n, cfg.sbm_communities, cfg.sbm_p_in, cfg.sbm_p_out, rng)),
                  seed};
        case GraphFamily::covariance:
          return {covariance_shift(
                      covariance_graph(n, cfg.covariance_samples, rng).sigma_hat),
                  seed};
        case GraphFamily::gmrf:
          return {adjacency_shift(
                      sensor_network(n, cfg.sensor_rho_min, cfg.sensor_rho_max,
                                     cfg.sensor_thres_factor, rng)
                          .graph),
                  seed};
      }
      throw std::logic_error("build_graph: unknown family");
    } catch (const std::runtime_error& e) {
      last_error = e.what();  // connectivity give-up: redraw with a new seed
    }
  }
  throw std::runtime_error("run_experiment: graph construction failed after " +
                           std::to_string(kGraphAttemptCap) +
                           " attempts: " + last_error);
}

Eigen::VectorXd family_psd(const ExperimentConfig& cfg,
                           const SpectralDecomposition& d, double p1) {
  switch (cfg.family) {
    case GraphFamily::er:
    case GraphFamily::sbm:
      return logspace_psd(d.size(), p1, cfg.logspace_literal_dc);
    case GraphFamily::covariance:
      return Eigen::VectorXd::Constant(d.size(), p1);
    case GraphFamily::gmrf: {
      double a = cfg.gmrf_a_fraction / d.lambda1();
      return gmrf_psd(d, a, gmrf_calibrate_a0(d, a, p1));
    }
  }
  throw std::logic_error("family_psd: unknown family");
}

GraphRecord run_one_graph(const ExperimentConfig& cfg, int n, int index) {
  BuiltGraph built = build_graph(cfg, n, index);
  auto d = std::make_shared<const SpectralDecomposition>(decompose(built.shift));

  double p1 = snr_to_p1(cfg.mu, cfg.snr_db);
  Eigen::VectorXd p = family_psd(cfg, *d, p1);
  WssProcess proc(d, cfg.mu, p);

  GraphRecord rec;
  rec.n = n;
  rec.graph_index = index;
  rec.graph_seed = built.seed;
  rec.probe_node = select_node(d->perron_vector());
  rec.lambda1 = d->lambda1();
  rec.regime = classify_spectrum(*d, 0.5).regime;
  rec.epsilon = resolved_epsilon(cfg);
  rec.trials = cfg.trials_per_graph;
  rec.psd = p;
  rec.shift_avg_psd = estimator_psd(p, d->eigenvalues(), d->lambda1(), n);

  // Probe-node weight vectors: estimate_k = w . x.  The shift average row
  // comes from running the average on the probe indicator (symmetric shift).
  const int k = rec.probe_node - 1;
  std::vector<EstimatorKind> kinds = cfg.estimators;
  std::vector<Eigen::VectorXd> weights;
  for (EstimatorKind kind : kinds) {
    if (kind == EstimatorKind::shift_average) {
      Eigen::VectorXd ek = Eigen::VectorXd::Zero(n);
      ek(k) = 1.0;
      weights.push_back(graph_shift_average(built.shift, d->lambda1(), ek, n));
    } else {
      weights.push_back(d->perron_vector()(k) * d->perron_vector());
    }
  }

  for (size_t e = 0; e < kinds.size(); ++e) {
    Eigen::VectorXd spectrum =
        kinds[e] == EstimatorKind::shift_average
            ? rec.shift_avg_psd
            : filtered_psd(p, optimal_logdet_response(n, 1.0).freq_response.value());
    EstimatorOutcome out;
    out.variance = node_variance(spectrum, *d, rec.probe_node);
    ChebyshevBound b = chebyshev_bound(out.variance, rec.epsilon);
    out.bound_raw = b.raw;
    out.bound_clipped = b.clipped;
    rec.outcomes[kinds[e]] = out;
  }

  const double target = cfg.mu * d->perron_vector()(k);
  std::vector<long> err_counts(kinds.size(), 0);
  std::vector<double> sq_sums(kinds.size(), 0.0);
  Rng trial_rng(derive_seed(cfg.master_seed, SeedStream::trials,
                            static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(index)));
  for (long done = 0; done < cfg.trials_per_graph;) {
    int block = static_cast<int>(
        std::min<long>(kTrialBlock, cfg.trials_per_graph - done));
    Eigen::MatrixXd x = proc.sample_block(trial_rng, block);
    for (size_t e = 0; e < kinds.size(); ++e) {
      Eigen::RowVectorXd scores = weights[e].transpose() * x;
      for (int t = 0; t < block; ++t) {
        double dev = scores(t) - target;
        if (std::abs(dev) > rec.epsilon) ++err_counts[e];
        sq_sums[e] += dev * dev;
      }
    }
    done += block;
  }
  for (size_t e = 0; e < kinds.size(); ++e) {
    EstimatorOutcome& out = rec.outcomes[kinds[e]];
    out.err_prob = static_cast<double>(err_counts[e]) /
                   static_cast<double>(cfg.trials_per_graph);
    out.mse = sq_sums[e] / static_cast<double>(cfg.trials_per_graph);
  }
  return rec;
}

}  // namespace

const char* family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::er: return "er";
    case GraphFamily::covariance: return "covariance";
    case GraphFamily::sbm: return "sbm";
    case GraphFamily::gmrf: return "gmrf";
  }
  return "unknown";
}

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::shift_average: return "shift_average";
    case EstimatorKind::optimal: return "optimal";
  }
  return "unknown";
}

GraphFamily family_from_name(const std::string& name) {
  if (name == "er") return GraphFamily::er;
  if (name == "covariance") return GraphFamily::covariance;
  if (name == "sbm") return GraphFamily::sbm;
  if (name == "gmrf") return GraphFamily::gmrf;
  throw std::invalid_argument("unknown graph family: " + name);
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "shift_average") return EstimatorKind::shift_average;
  if (name == "optimal") return EstimatorKind::optimal;
  throw std::invalid_argument("unknown estimator: " + name);
}

double resolved_epsilon(const ExperimentConfig& cfg) {
  if (cfg.epsilon) {
    if (!(*cfg.epsilon > 0.0))
      throw std::invalid_argument("experiment: epsilon must be > 0");
    return *cfg.epsilon;
  }
  return 0.1 * std::pow(10.0, cfg.snr_db / 10.0);
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("sizes")) cfg.sizes = j["sizes"].get<std::vector<int>>();
  cfg.graphs_per_size = j.value("graphs_per_size", cfg.graphs_per_size);
  cfg.trials_per_graph = j.value("trials_per_graph", cfg.trials_per_graph);
  cfg.mu = j.value("mu", cfg.mu);
  cfg.snr_db = j.value("snr_db", cfg.snr_db);
  if (j.contains("epsilon") && !j["epsilon"].is_null())
    cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& e : j["estimators"])
      cfg.estimators.push_back(estimator_from_name(e.get<std::string>()));
  }
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.er_p = j.value("er_p", cfg.er_p);
  cfg.sbm_communities = j.value("sbm_communities", cfg.sbm_communities);
  cfg.sbm_p_in = j.value("sbm_p_in", cfg.sbm_p_in);
  cfg.sbm_p_out = j.value("sbm_p_out", cfg.sbm_p_out);
  cfg.sensor_rho_min = j.value("sensor_rho_min", cfg.sensor_rho_min);
  cfg.sensor_rho_max = j.value("sensor_rho_max", cfg.sensor_rho_max);
  cfg.sensor_thres_factor = j.value("sensor_thres_factor", cfg.sensor_thres_factor);
  cfg.gmrf_a_fraction = j.value("gmrf_a_fraction", cfg.gmrf_a_fraction);
  cfg.covariance_samples = j.value("covariance_samples", cfg.covariance_samples);
  cfg.logspace_literal_dc = j.value("logspace_literal_dc", cfg.logspace_literal_dc);
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"family", family_name(cfg.family)},
                   {"sizes", cfg.sizes},
                   {"graphs_per_size", cfg.graphs_per_size},
                   {"trials_per_graph", cfg.trials_per_graph},
                   {"mu", cfg.mu},
                   {"snr_db", cfg.snr_db},
                   {"master_seed", cfg.master_seed},
                   {"threads", cfg.threads},
                   {"er_p", cfg.er_p},
                   {"sbm_communities", cfg.sbm_communities},
                   {"sbm_p_in", cfg.sbm_p_in},
                   {"sbm_p_out", cfg.sbm_p_out},
                   {"sensor_rho_min", cfg.sensor_rho_min},
                   {"sensor_rho_max", cfg.sensor_rho_max},
                   {"sensor_thres_factor", cfg.sensor_thres_factor},
                   {"gmrf_a_fraction", cfg.gmrf_a_fraction},
                   {"covariance_samples", cfg.covariance_samples},
                   {"logspace_literal_dc", cfg.logspace_literal_dc}};
  if (cfg.epsilon) j["epsilon"] = *cfg.epsilon;
  nlohmann::json ests = nlohmann::json::array();
  for (EstimatorKind k : cfg.estimators) ests.push_back(estimator_name(k));
  j["estimators"] = std::move(ests);
  return j;
}

int select_node(const Eigen::VectorXd& v1) {
  const int n = static_cast<int>(v1.size());
  if (n < 1) throw std::invalid_argument("select_node: empty vector");
  const double thresh = 1.0 / std::sqrt(static_cast<double>(n));
  int best = -1;
  for (int k = 0; k < n; ++k)
    if (v1(k) < thresh && (best < 0 || v1(k) > v1(best))) best = k;
  if (best >= 0) return best + 1;
  int argmin = 0;
  for (int k = 1; k < n; ++k)
    if (v1(k) < v1(argmin)) argmin = k;
  return argmin + 1;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.sizes.empty())
    throw std::invalid_argument("experiment: need at least one size");
  for (int n : cfg.sizes)
    if (n < 2) throw std::invalid_argument("experiment: sizes must be >= 2");
  if (cfg.graphs_per_size < 1)
    throw std::invalid_argument("experiment: graphs_per_size must be >= 1");
  if (cfg.trials_per_graph < 1)
    throw std::invalid_argument("experiment: trials_per_graph must be >= 1");
  if (cfg.estimators.empty())
    throw std::invalid_argument("experiment: need at least one estimator");
  resolved_epsilon(cfg);  // validates

  ExperimentReport report;
  report.config = cfg;
  const int units = static_cast<int>(cfg.sizes.size()) * cfg.graphs_per_size;
  report.records.resize(static_cast<size_t>(units));
  parallel_for(units, cfg.threads, [&](int u) {
    int size_idx = u / cfg.graphs_per_size;
    int graph_idx = u % cfg.graphs_per_size;
    report.records[static_cast<size_t>(u)] =
        run_one_graph(cfg, cfg.sizes[static_cast<size_t>(size_idx)], graph_idx);
  });

  for (size_t s = 0; s < cfg.sizes.size(); ++s) {
    for (EstimatorKind kind : cfg.estimators) {
      SizeAggregate agg;
      agg.n = cfg.sizes[s];
      agg.estimator = kind;
      agg.err_prob_min = agg.bound_min = std::numeric_limits<double>::infinity();
      agg.err_prob_max = agg.bound_max = -std::numeric_limits<double>::infinity();
      for (int g = 0; g < cfg.graphs_per_size; ++g) {
        const GraphRecord& rec =
            report.records[s * static_cast<size_t>(cfg.graphs_per_size) +
                           static_cast<size_t>(g)];
        const EstimatorOutcome& out = rec.outcomes.at(kind);
        agg.err_prob_mean += out.err_prob;
        agg.err_prob_min = std::min(agg.err_prob_min, out.err_prob);
        agg.err_prob_max = std::max(agg.err_prob_max, out.err_prob);
        agg.bound_mean += out.bound_raw;
        agg.bound_min = std::min(agg.bound_min, out.bound_raw);
        agg.bound_max = std::max(agg.bound_max, out.bound_raw);
        agg.mse_mean += out.mse;
      }
      agg.err_prob_mean /= cfg.graphs_per_size;
      agg.bound_mean /= cfg.graphs_per_size;
      agg.mse_mean /= cfg.graphs_per_size;
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

void write_experiment_csv(std::ostream& os, const ExperimentReport& report) {
  os << "family,N,estimator,err_prob_mean,err_prob_min,err_prob_max,"
        "bound_mean,bound_min,bound_max,mse_mean,seed\n";
  for (const SizeAggregate& a : report.aggregates)
    os << family_name(report.config.family) << ',' << a.n << ','
       << estimator_name(a.estimator) << ',' << g17(a.err_prob_mean) << ','
       << g17(a.err_prob_min) << ',' << g17(a.err_prob_max) << ','
       << g17(a.bound_mean) << ',' << g17(a.bound_min) << ','
       << g17(a.bound_max) << ',' << g17(a.mse_mean) << ','
       << report.config.master_seed << '\n';
}

GmrfDemoResult gmrf_field_demo(int n, std::uint64_t seed,
                               const GmrfDemoOptions& opt) {
  Rng graph_rng(derive_seed(seed, SeedStream::graph,
                            static_cast<std::uint64_t>(n), 0));
  GmrfDemoResult res;
  res.network = sensor_network(n, 0.01, 1.0, 1.75, graph_rng);
  ShiftOperator s = adjacency_shift(res.network.graph);
  auto d = std::make_shared<const SpectralDecomposition>(decompose(s));
  res.lambda1 = d->lambda1();
  res.a = opt.a_fraction / d->lambda1();
  double p1 = snr_to_p1(opt.mu, opt.snr_db);
  res.a0 = gmrf_calibrate_a0(*d, res.a, p1);
  Eigen::VectorXd p = opt.noiseless ? Eigen::VectorXd::Zero(n).eval()
                                    : gmrf_psd(*d, res.a, res.a0);
  WssProcess proc(d, opt.mu, p);

  Rng trial_rng(derive_seed(seed, SeedStream::trials,
                            static_cast<std::uint64_t>(n), 0));
  res.raw = proc.sample(trial_rng);
  res.averaged = graph_shift_average(s, d->lambda1(), res.raw, n);
  res.true_mean = proc.ensemble_mean();
  double scale = std::max(res.true_mean.norm(), 1e-300);
  res.rel_err_raw = (res.raw - res.true_mean).norm() / scale;
  res.rel_err_avg = (res.averaged - res.true_mean).norm() / scale;
  return res;
}

MseNetworkStats gmrf_mse_network(int n, std::uint64_t graph_seed,
                                 std::uint64_t trial_seed,
                                 const GmrfSweepConfig& cfg) {
  Rng graph_rng(graph_seed);
  SensorNetwork net =
      sensor_network(n, cfg.sensor_rho_min, cfg.sensor_rho_max,
                     cfg.sensor_thres_factor, graph_rng);
  ShiftOperator s = adjacency_shift(net.graph);
  auto d = std::make_shared<const SpectralDecomposition>(decompose(s));
  double a = cfg.a_fraction / d->lambda1();
  double p1 = snr_to_p1(cfg.mu, cfg.snr_db);
  Eigen::VectorXd p = gmrf_psd(*d, a, gmrf_calibrate_a0(*d, a, p1));
  WssProcess proc(d, cfg.mu, p);
  Eigen::VectorXd mean = proc.ensemble_mean();

  Rng trial_rng(trial_seed);
  double acc = 0.0, acc_sq = 0.0;
  for (int t = 0; t < cfg.realizations; ++t) {
    Eigen::VectorXd x = proc.sample(trial_rng);
    Eigen::VectorXd est = graph_shift_average(s, d->lambda1(), x, n);
    double err = (est - mean).squaredNorm() / n;
    acc += err;
    acc_sq += err * err;
  }
  MseNetworkStats stats;
  stats.mse_emp = acc / cfg.realizations;
  double var = std::max(0.0, acc_sq / cfg.realizations -
                                 stats.mse_emp * stats.mse_emp);
  stats.stderr_emp = std::sqrt(var / cfg.realizations);
  stats.mse_analytic =
      estimator_psd(p, d->eigenvalues(), d->lambda1(), n).sum() / n;
  return stats;
}

std::vector<MseSweepPoint> gmrf_mse_sweep(const std::vector<int>& sizes,
                                          const GmrfSweepConfig& cfg) {
  if (sizes.empty())
    throw std::invalid_argument("gmrf_mse_sweep: need at least one size");
  if (cfg.networks_per_size < 1 || cfg.realizations < 1)
    throw std::invalid_argument("gmrf_mse_sweep: counts must be >= 1");

  const int units = static_cast<int>(sizes.size()) * cfg.networks_per_size;
  std::vector<MseNetworkStats> stats(static_cast<size_t>(units));
  parallel_for(units, cfg.threads, [&](int u) {
    int size_idx = u / cfg.networks_per_size;
    int net_idx = u % cfg.networks_per_size;
    int n = sizes[static_cast<size_t>(size_idx)];
    stats[static_cast<size_t>(u)] = gmrf_mse_network(
        n,
        derive_seed(cfg.master_seed, SeedStream::graph,
                    static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(net_idx)),
        derive_seed(cfg.master_seed, SeedStream::trials,
                    static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(net_idx)),
        cfg);
  });

  std::vector<MseSweepPoint> out;
  for (size_t s = 0; s < sizes.size(); ++s) {
    MseSweepPoint pt;
    pt.n = sizes[s];
    for (int g = 0; g < cfg.networks_per_size; ++g) {
      const MseNetworkStats& st =
          stats[s * static_cast<size_t>(cfg.networks_per_size) +
                static_cast<size_t>(g)];
      pt.mse_mean += st.mse_emp;
      pt.mse_analytic_mean += st.mse_analytic;
    }
    pt.mse_mean /= cfg.networks_per_size;
    pt.mse_analytic_mean /= cfg.networks_per_size;
    out.push_back(pt);
  }
  return out;
}

}  // namespace ergograph
