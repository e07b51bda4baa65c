// Command-line surface for the library: graph generation, spectral
// decomposition, process sampling, estimation (centralized or via the
// message-passing simulator), Chebyshev bound reports, the Monte-Carlo
// experiment harness, and the sensor-field demo.  CSV output carries 17
// significant digits; randomized subcommands require an explicit --seed and
// log the resolved seed on the diagnostic stream.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ergograph/bounds.hpp"
#include "ergograph/csv.hpp"
#include "ergograph/distributed.hpp"
#include "ergograph/estimators.hpp"
#include "ergograph/experiments.hpp"
#include "ergograph/graph.hpp"
#include "ergograph/process.hpp"
#include "ergograph/random.hpp"
#include "ergograph/spectral.hpp"
#include "json.hpp"

namespace {

using namespace ergograph;
using nlohmann::json;

// ERGOGRAPH_LOG: quiet < info (default) < debug.
int log_level() {
  const char* env = std::getenv("ERGOGRAPH_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_line(int at_least, const std::string& msg) {
  if (log_level() >= at_least) std::cerr << msg << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  out << text;
}

struct LoadedGraph {
  Graph graph;
  ShiftOperator shift;
};

LoadedGraph load_graph(const std::string& path, bool normalized) {
  json j = read_json_file(path);
  return {graph_from_json(j), shift_from_json(j, normalized)};
}

Eigen::VectorXd signal_from_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "node,value")
    throw std::invalid_argument(path + ": expected header node,value");
  Eigen::VectorXd x(n);
  std::vector<bool> seen(static_cast<size_t>(n), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int node = 0;
    double value = 0.0;
    if (std::sscanf(line.c_str(), "%d,%lf", &node, &value) != 2)
      throw std::invalid_argument(path + ": malformed row '" + line + "'");
    if (node < 1 || node > n)
      throw std::invalid_argument(path + ": node index out of range");
    if (seen[static_cast<size_t>(node - 1)])
      throw std::invalid_argument(path + ": duplicate node " +
                                  std::to_string(node));
    seen[static_cast<size_t>(node - 1)] = true;
    x(node - 1) = value;
  }
  for (int k = 0; k < n; ++k)
    if (!seen[static_cast<size_t>(k)])
      throw std::invalid_argument(path + ": missing node " +
                                  std::to_string(k + 1));
  return x;
}

std::string signal_to_csv(const Eigen::VectorXd& x, const char* value_header) {
  std::ostringstream os;
  os << "node," << value_header << '\n';
  for (int k = 0; k < x.size(); ++k) os << k + 1 << ',' << g17(x(k)) << '\n';
  return os.str();
}

// Per-family PSD used by the sample and bound subcommands.
Eigen::VectorXd build_psd(const SpectralDecomposition& d, const std::string& kind,
                          double mu, double snr_db, bool literal_dc,
                          double a_fraction) {
  double p1 = snr_to_p1(mu, snr_db);
  if (kind == "logspace") return logspace_psd(d.size(), p1, literal_dc);
  if (kind == "flat") return Eigen::VectorXd::Constant(d.size(), p1);
  if (kind == "gmrf") {
    double a = a_fraction / d.lambda1();
    return gmrf_psd(d, a, gmrf_calibrate_a0(d, a, p1));
  }
  throw std::invalid_argument("unknown psd kind '" + kind +
                              "' (expected logspace, flat or gmrf)");
}

// ---------------------------------------------------------------------------

struct GraphArgs {
  std::string family = "er";
  int n = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double p = 0.2;
  int communities = 4;
  double p_in = 0.6, p_out = 0.1;
  double rho_min = 0.01, rho_max = 1.0, thres = 1.75;
  long samples = 100000;
  std::string out;
};

int run_graph(const GraphArgs& a) {
  json j;
  if (a.family == "cycle") {
    j = graph_to_json(directed_cycle(a.n));
  } else {
    if (!a.seed_set)
      throw std::invalid_argument("--seed is required for random families");
    log_line(1, "seed: " + std::to_string(a.seed));
    Rng rng(a.seed);
    if (a.family == "er") {
      j = graph_to_json(erdos_renyi(a.n, a.p, rng));
    } else if (a.family == "sbm") {
      j = graph_to_json(
          stochastic_block_model(a.n, a.communities, a.p_in, a.p_out, rng));
    } else if (a.family == "sensor") {
      j = sensor_to_json(sensor_network(a.n, a.rho_min, a.rho_max, a.thres, rng));
    } else if (a.family == "covariance") {
      j = covariance_to_json(covariance_graph(a.n, a.samples, rng));
    } else {
      throw std::invalid_argument("unknown family '" + a.family + "'");
    }
  }
  write_output(a.out, j.dump(2) + "\n");
  return 0;
}

struct SpectrumArgs {
  std::string graph_path;
  bool normalized = false;
  bool vectors = false;
  double ratio_threshold = 0.9;
  std::string out;
};

int run_spectrum(const SpectrumArgs& a) {
  LoadedGraph lg = load_graph(a.graph_path, a.normalized);
  SpectralDecomposition d = decompose(lg.shift);
  json j = decomposition_to_json(d, a.vectors);
  SpectrumRegime regime = classify_spectrum(d, a.ratio_threshold);
  j["regime"] = regime_name(regime.regime);
  j["flagged"] = regime.flagged;
  j["perron_near_degenerate"] = regime.perron_near_degenerate;
  log_line(2, std::string("regime: ") + regime_name(regime.regime));
  write_output(a.out, j.dump(2) + "\n");
  return 0;
}

struct SampleArgs {
  std::string graph_path;
  bool normalized = false;
  std::uint64_t seed = 0;
  double mu = 3.0, snr_db = 10.0;
  std::string psd = "logspace";
  bool literal_dc = false;
  double a_fraction = 0.99;
  int draws = 1;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  log_line(1, "seed: " + std::to_string(a.seed));
  LoadedGraph lg = load_graph(a.graph_path, a.normalized);
  auto d = std::make_shared<const SpectralDecomposition>(decompose(lg.shift));
  WssProcess proc(d, a.mu,
                  build_psd(*d, a.psd, a.mu, a.snr_db, a.literal_dc, a.a_fraction));
  Rng rng(a.seed);
  Eigen::MatrixXd x = proc.sample_block(rng, a.draws);
  std::ostringstream os;
  if (a.draws == 1) {
    os << signal_to_csv(x.col(0), "value");
  } else {
    os << "node";
    for (int t = 1; t <= a.draws; ++t) os << ",draw_" << t;
    os << '\n';
    for (int k = 0; k < x.rows(); ++k) {
      os << k + 1;
      for (int t = 0; t < a.draws; ++t) os << ',' << g17(x(k, t));
      os << '\n';
    }
  }
  write_output(a.out, os.str());
  return 0;
}

struct EstimateArgs {
  std::string graph_path;
  std::string signal_path;
  bool normalized = false;
  std::string estimator = "shift_average";
  int depth = 0;  // 0: defaults to n
  std::string filter_path;
  bool distributed = false;
  std::string trace_path;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  LoadedGraph lg = load_graph(a.graph_path, a.normalized);
  SpectralDecomposition d = decompose(lg.shift);
  Eigen::VectorXd x = signal_from_csv(a.signal_path, d.size());
  int depth = a.depth > 0 ? a.depth : d.size();

  Eigen::VectorXd z;
  if (!a.filter_path.empty()) {
    if (a.distributed)
      throw std::invalid_argument(
          "--distributed only applies to the shift-average estimator");
    z = filtered_estimator(d, filter_from_json(read_json_file(a.filter_path)), x);
  } else if (a.estimator == "optimal") {
    if (a.distributed)
      throw std::invalid_argument(
          "--distributed only applies to the shift-average estimator");
    z = optimal_mse_estimator(d, x);
  } else if (a.estimator == "shift_average") {
    if (a.distributed) {
      std::ofstream trace;
      std::ostream* trace_os = nullptr;
      if (!a.trace_path.empty()) {
        trace.open(a.trace_path);
        if (!trace) throw std::invalid_argument("cannot write " + a.trace_path);
        trace_os = &trace;
      }
      DiffusionTrace t =
          simulate_diffusion(lg.graph, lg.shift, d.lambda1(), x, depth, trace_os);
      log_line(1, "rounds=" + std::to_string(t.rounds) +
                      " messages=" + std::to_string(t.messages_sent));
      z = t.per_node_estimates;
    } else {
      z = graph_shift_average(lg.shift, d.lambda1(), x, depth);
    }
  } else {
    throw std::invalid_argument("unknown estimator '" + a.estimator +
                                "' (expected shift_average or optimal)");
  }
  write_output(a.out, signal_to_csv(z, "estimate"));
  return 0;
}

struct BoundArgs {
  std::string graph_path;
  bool normalized = false;
  double mu = 3.0, snr_db = 10.0;
  std::string psd = "logspace";
  bool literal_dc = false;
  double a_fraction = 0.99;
  std::string estimator = "shift_average";
  int depth = 0;
  std::optional<double> epsilon;
  int node = -1;  // -1: probe node; 0: every node
  std::string out;
};

int run_bound(const BoundArgs& a) {
  LoadedGraph lg = load_graph(a.graph_path, a.normalized);
  SpectralDecomposition d = decompose(lg.shift);
  Eigen::VectorXd p =
      build_psd(d, a.psd, a.mu, a.snr_db, a.literal_dc, a.a_fraction);
  int depth = a.depth > 0 ? a.depth : d.size();
  double eps = a.epsilon ? *a.epsilon : 0.1 * std::pow(10.0, a.snr_db / 10.0);

  Eigen::VectorXd q;
  if (a.estimator == "shift_average")
    q = estimator_psd(p, d.eigenvalues(), d.lambda1(), depth);
  else if (a.estimator == "optimal")
    q = filtered_psd(p, *optimal_logdet_response(d.size(), 1.0).freq_response);
  else
    throw std::invalid_argument("unknown estimator '" + a.estimator +
                                "' (expected shift_average or optimal)");

  std::vector<BoundReport> reports;
  if (a.node == 0) {
    for (int k = 1; k <= d.size(); ++k)
      reports.push_back(node_bound_report(q, d, k, eps));
  } else {
    int k = a.node > 0 ? a.node : select_node(d.perron_vector());
    reports.push_back(node_bound_report(q, d, k, eps));
  }
  std::ostringstream os;
  write_bound_csv(os, reports);
  write_output(a.out, os.str());
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  std::string family;
  std::string sizes;
  int graphs = -1;
  long trials = -1;
  double mu = std::numeric_limits<double>::quiet_NaN();
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> epsilon;
  std::string estimators;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  std::string out;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config_path.empty()) cfg = config_from_json(read_json_file(a.config_path));
  // Flags override the config file.
  if (!a.family.empty()) cfg.family = family_from_name(a.family);
  if (!a.sizes.empty()) {
    cfg.sizes.clear();
    std::istringstream is(a.sizes);
    std::string tok;
    while (std::getline(is, tok, ',')) cfg.sizes.push_back(std::stoi(tok));
  }
  if (a.graphs >= 0) cfg.graphs_per_size = a.graphs;
  if (a.trials >= 0) cfg.trials_per_graph = a.trials;
  if (!std::isnan(a.mu)) cfg.mu = a.mu;
  if (!std::isnan(a.snr_db)) cfg.snr_db = a.snr_db;
  if (a.epsilon) cfg.epsilon = a.epsilon;
  if (!a.estimators.empty()) {
    cfg.estimators.clear();
    std::istringstream is(a.estimators);
    std::string tok;
    while (std::getline(is, tok, ','))
      cfg.estimators.push_back(estimator_from_name(tok));
  }
  if (a.seed_set) cfg.master_seed = a.seed;
  if (a.threads > 0) cfg.threads = a.threads;

  log_line(1, "seed: " + std::to_string(cfg.master_seed));
  ExperimentReport report = run_experiment(cfg);
  if (log_level() >= 2)
    for (const SizeAggregate& agg : report.aggregates)
      std::cerr << "N=" << agg.n << ' ' << estimator_name(agg.estimator)
                << " err_prob_mean=" << g17(agg.err_prob_mean) << '\n';
  std::ostringstream os;
  write_experiment_csv(os, report);
  write_output(a.out, os.str());
  return 0;
}

struct GmrfDemoArgs {
  int n = 1000;
  std::uint64_t seed = 0;
  double a_fraction = 0.99;
  double mu = 3.0, snr_db = 10.0;
  bool noiseless = false;
  std::string out;
};

int run_gmrf_demo(const GmrfDemoArgs& a) {
  log_line(1, "seed: " + std::to_string(a.seed));
  GmrfDemoOptions opt;
  opt.a_fraction = a.a_fraction;
  opt.mu = a.mu;
  opt.snr_db = a.snr_db;
  opt.noiseless = a.noiseless;
  GmrfDemoResult res = gmrf_field_demo(a.n, a.seed, opt);
  log_line(1, "rel_err_raw=" + g17(res.rel_err_raw) +
                  " rel_err_avg=" + g17(res.rel_err_avg));
  std::ostringstream os;
  os << "node,pos_x,pos_y,raw,shift_average,true_mean\n";
  for (int k = 0; k < a.n; ++k)
    os << k + 1 << ',' << g17(res.network.positions[static_cast<size_t>(k)][0])
       << ',' << g17(res.network.positions[static_cast<size_t>(k)][1]) << ','
       << g17(res.raw(k)) << ',' << g17(res.averaged(k)) << ','
       << g17(res.true_mean(k)) << '\n';
  write_output(a.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic mean estimation on graph processes"};
  app.require_subcommand(1);

  GraphArgs ga;
  CLI::App* graph = app.add_subcommand("graph", "Generate a graph as JSON");
  graph->add_option("--family", ga.family,
                    "cycle, er, sbm, sensor or covariance");
  graph->add_option("--n", ga.n, "Number of vertices")->required();
  graph->add_option("--seed", ga.seed, "RNG seed (required unless cycle)")
      ->each([&ga](const std::string&) { ga.seed_set = true; });
  graph->add_option("--p", ga.p, "Edge probability (er)");
  graph->add_option("--communities", ga.communities, "Community count (sbm)");
  graph->add_option("--p-in", ga.p_in, "Intra-community probability (sbm)");
  graph->add_option("--p-out", ga.p_out, "Inter-community probability (sbm)");
  graph->add_option("--rho-min", ga.rho_min, "Kernel floor (sensor)");
  graph->add_option("--rho-max", ga.rho_max, "Kernel ceiling (sensor)");
  graph->add_option("--thres", ga.thres, "Threshold factor (sensor)");
  graph->add_option("--samples", ga.samples, "Training draws (covariance)");
  graph->add_option("--out", ga.out, "Output path (default stdout)");

  SpectrumArgs sa;
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "Decompose a graph shift as JSON");
  spectrum->add_option("--graph", sa.graph_path, "Graph JSON path")->required();
  spectrum->add_flag("--normalized", sa.normalized,
                     "Use the degree-normalized adjacency");
  spectrum->add_flag("--vectors", sa.vectors, "Include the eigenvector basis");
  spectrum->add_option("--ratio-threshold", sa.ratio_threshold,
                       "Flag tail roots at or above this |lambda|/lambda1");
  spectrum->add_option("--out", sa.out, "Output path (default stdout)");

  SampleArgs pa;
  CLI::App* sample =
      app.add_subcommand("sample", "Draw process realizations as CSV");
  sample->add_option("--graph", pa.graph_path, "Graph JSON path")->required();
  sample->add_flag("--normalized", pa.normalized,
                   "Use the degree-normalized adjacency");
  sample->add_option("--seed", pa.seed, "RNG seed")->required();
  sample->add_option("--mu", pa.mu, "Mean scale");
  sample->add_option("--snr", pa.snr_db, "SNR in dB fixing the DC power");
  sample->add_option("--psd", pa.psd, "logspace, flat or gmrf");
  sample->add_flag("--literal-dc", pa.literal_dc,
                   "Let the DC entry follow the logspace ramp");
  sample->add_option("--a-fraction", pa.a_fraction,
                     "Diffusion coefficient as a fraction of 1/lambda1 (gmrf)");
  sample->add_option("--draws", pa.draws, "Number of realizations");
  sample->add_option("--out", pa.out, "Output path (default stdout)");

  EstimateArgs ea;
  CLI::App* estimate =
      app.add_subcommand("estimate", "Estimate the ensemble mean from a signal");
  estimate->add_option("--graph", ea.graph_path, "Graph JSON path")->required();
  estimate->add_option("--signal", ea.signal_path, "Signal CSV (node,value)")
      ->required();
  estimate->add_flag("--normalized", ea.normalized,
                     "Use the degree-normalized adjacency");
  estimate->add_option("--estimator", ea.estimator,
                       "shift_average or optimal");
  estimate->add_option("--depth", ea.depth,
                       "Diffusion depth L (default: graph size)");
  estimate->add_option("--filter", ea.filter_path,
                       "Filter JSON overriding --estimator");
  estimate->add_flag("--distributed", ea.distributed,
                     "Run the synchronous message-passing protocol");
  estimate->add_option("--trace", ea.trace_path,
                       "Write per-round node values (distributed only)");
  estimate->add_option("--out", ea.out, "Output path (default stdout)");

  BoundArgs ba;
  CLI::App* bound =
      app.add_subcommand("bound", "Chebyshev deviation bounds as CSV");
  bound->add_option("--graph", ba.graph_path, "Graph JSON path")->required();
  bound->add_flag("--normalized", ba.normalized,
                  "Use the degree-normalized adjacency");
  bound->add_option("--mu", ba.mu, "Mean scale");
  bound->add_option("--snr", ba.snr_db, "SNR in dB fixing the DC power");
  bound->add_option("--psd", ba.psd, "logspace, flat or gmrf");
  bound->add_flag("--literal-dc", ba.literal_dc,
                  "Let the DC entry follow the logspace ramp");
  bound->add_option("--a-fraction", ba.a_fraction,
                    "Diffusion coefficient as a fraction of 1/lambda1 (gmrf)");
  bound->add_option("--estimator", ba.estimator, "shift_average or optimal");
  bound->add_option("--depth", ba.depth,
                    "Diffusion depth L (default: graph size)");
  double bound_eps = std::numeric_limits<double>::quiet_NaN();
  bound->add_option("--epsilon", bound_eps,
                    "Deviation threshold (default 0.1 * 10^(snr/10))");
  bound->add_option("--node", ba.node,
                    "1-based vertex; 0 for all (default: probe node)");
  bound->add_option("--out", ba.out, "Output path (default stdout)");

  ExperimentArgs xa;
  CLI::App* experiment =
      app.add_subcommand("experiment", "Monte-Carlo error-probability study");
  experiment->add_option("--config", xa.config_path, "Config JSON path");
  experiment->add_option("--family", xa.family, "er, sbm, covariance or gmrf");
  experiment->add_option("--sizes", xa.sizes, "Comma-separated graph sizes");
  experiment->add_option("--graphs", xa.graphs, "Graphs per size");
  experiment->add_option("--trials", xa.trials, "Trials per graph");
  experiment->add_option("--mu", xa.mu, "Mean scale");
  experiment->add_option("--snr", xa.snr_db, "SNR in dB");
  double exp_eps = std::numeric_limits<double>::quiet_NaN();
  experiment->add_option("--epsilon", exp_eps, "Deviation threshold");
  experiment->add_option("--estimators", xa.estimators,
                         "Comma-separated estimator names");
  experiment->add_option("--seed", xa.seed, "Master seed")
      ->each([&xa](const std::string&) { xa.seed_set = true; });
  experiment->add_option("--threads", xa.threads, "Worker threads");
  experiment->add_option("--out", xa.out, "Output path (default stdout)");

  GmrfDemoArgs da;
  CLI::App* demo =
      app.add_subcommand("gmrf-demo", "Sensor-field realization and its average");
  demo->add_option("--n", da.n, "Number of sensors");
  demo->add_option("--seed", da.seed, "RNG seed")->required();
  demo->add_option("--a-fraction", da.a_fraction,
                   "Diffusion coefficient as a fraction of 1/lambda1");
  demo->add_option("--mu", da.mu, "Mean scale");
  demo->add_option("--snr", da.snr_db, "SNR in dB");
  demo->add_flag("--noiseless", da.noiseless, "Draw the ensemble mean itself");
  demo->add_option("--out", da.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (!std::isnan(bound_eps)) ba.epsilon = bound_eps;
    if (!std::isnan(exp_eps)) xa.epsilon = exp_eps;
    if (graph->parsed()) return run_graph(ga);
    if (spectrum->parsed()) return run_spectrum(sa);
    if (sample->parsed()) return run_sample(pa);
    if (estimate->parsed()) return run_estimate(ea);
    if (bound->parsed()) return run_bound(ba);
    if (experiment->parsed()) return run_experiment_cmd(xa);
    if (demo->parsed()) return run_gmrf_demo(da);
    return 1;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
