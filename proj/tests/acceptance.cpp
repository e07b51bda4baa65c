// Acceptance harness: twelve end-to-end checks of the library's headline
// behaviors, each printed as one [PASS]/[FAIL] line with the measured values
// and elapsed time.  The exit status is the number of failed checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ergograph/bounds.hpp"
#include "ergograph/distributed.hpp"
#include "ergograph/estimators.hpp"
#include "ergograph/experiments.hpp"
#include "ergograph/graph.hpp"
#include "ergograph/process.hpp"
#include "ergograph/random.hpp"
#include "ergograph/spectral.hpp"

using namespace ergograph;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // 0 = no runtime requirement
};

std::vector<Verdict> verdicts;

void record(int id, std::string name, bool pass, std::string detail,
            double seconds, double budget = 0.0) {
  if (budget > 0.0 && seconds >= budget) pass = false;
  verdicts.push_back(
      {id, std::move(name), pass, std::move(detail), seconds, budget});
  std::cerr << "  finished check " << id << " (" << num(seconds) << " s)\n";
}

// Componentwise and per-node power dominance of the averaged spectrum,
// accumulated across every graph the suite constructs.
struct DominanceAudit {
  long checks = 0;
  long violations = 0;

  void inspect(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
               const SpectralDecomposition& d) {
    for (int i = 0; i < p.size(); ++i) {
      ++checks;
      if (q(i) > p(i)) ++violations;
    }
    for (int k = 1; k <= d.size(); ++k) {
      ++checks;
      if (node_variance(q, d, k) > node_variance(p, d, k)) ++violations;
    }
  }

  void inspect_depth(const Eigen::VectorXd& p, const SpectralDecomposition& d,
                     int depth) {
    inspect(p, estimator_psd(p, d.eigenvalues(), d.lambda1(), depth), d);
  }
};

DominanceAudit audit;

Eigen::VectorXd gaussian_vector(Rng& rng, int n, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = normal(rng);
  return x;
}

Graph connected_er(int n, double p, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    Graph g = erdos_renyi(n, p, rng);
    if (is_connected(g)) return g;
  }
}

// ---------------------------------------------------------------------------
// 1. On the directed cycle, the depth-N shift average is the arithmetic mean.

void check_cycle_exactness() {
  Timer t;
  double worst = 0.0;
  Rng rng(derive_seed(101, {0}));
  for (int n : {4, 16, 64}) {
    ShiftOperator s = adjacency_shift(directed_cycle(n));
    double lambda1 = decompose(s).lambda1();
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd x = gaussian_vector(rng, n, 2.0);
      Eigen::VectorXd est = graph_shift_average(s, lambda1, x, n);
      worst = std::max(
          worst, (est.array() - x.mean()).abs().maxCoeff());
    }
  }
  record(1, "cycle average equals the arithmetic mean", worst <= 1e-10,
         "worst |avg - mean| = " + num(worst) + " over 300 signals",
         t.seconds(), 1.0);
}

// ---------------------------------------------------------------------------
// 2. estimator_psd agrees with the dense sandwich diag(V^H M C M^H V).
// The 50 spectra are kept for reuse by the filtered-mse check.

struct SpectrumConfig {
  Eigen::VectorXd psd;
  int n = 0;
};

std::vector<SpectrumConfig> psd_configs;

void check_psd_oracle() {
  Timer t;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    int n = 8 + (7 * i) % 25;
    Graph g;
    ShiftOperator s;
    int depth;
    if (i % 5 == 0) {
      g = directed_cycle(n);
      s = adjacency_shift(g);
      depth = 3;
      while (std::gcd(depth, n) != 1) ++depth;
    } else {
      g = connected_er(n, 0.3 + 0.1 * (i % 3), derive_seed(202, {(std::uint64_t)i}));
      s = (i % 5 < 3) ? normalized_adjacency_shift(g) : adjacency_shift(g);
      depth = 3 + 2 * (i % 4);
    }
    SpectralDecomposition d = decompose(s);
    Eigen::VectorXd p(n);
    for (int j = 0; j < n; ++j) p(j) = 0.5 + 2.0 * j / (n - 1.0);
    Eigen::VectorXd q = estimator_psd(p, d.eigenvalues(), d.lambda1(), depth);
    audit.inspect(p, q, d);
    psd_configs.push_back({p, n});

    // Dense reference: M = (sum_l S^l) / (sum_l lambda1^l), C = V diag(p) V^H.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    double weight = 1.0, lpow = 1.0;
    for (int l = 1; l < depth; ++l) {
      power = s.matrix() * power;
      acc += power;
      lpow *= d.lambda1();
      weight += lpow;
    }
    Eigen::MatrixXcd m = (acc / weight).cast<std::complex<double>>();
    const Eigen::MatrixXcd& v = d.eigenvectors();
    Eigen::MatrixXcd c = v * p.cast<std::complex<double>>().asDiagonal() *
                         v.adjoint();
    Eigen::MatrixXcd sandwich = v.adjoint() * m * c * m.adjoint() * v;
    for (int j = 0; j < n; ++j) {
      double ref = sandwich(j, j).real();
      double rel = std::abs(q(j) - ref) / std::max(std::abs(ref), 1e-300);
      worst = std::max(worst, rel);
    }
  }
  record(2, "averaged spectrum matches the dense sandwich", worst <= 1e-8,
         "worst relative gap " + num(worst) + " over 50 graphs", t.seconds(),
         30.0);
}

// ---------------------------------------------------------------------------
// 3/4/8 share one ER sweep; 7 runs the covariance family.  The records from
// both feed the dominance audit (check 5) after rebuilding each graph
// from its stored seed.

ExperimentReport er_report;

const SizeAggregate& aggregate(const ExperimentReport& rep, int n,
                               EstimatorKind k) {
  for (const SizeAggregate& a : rep.aggregates)
    if (a.n == n && a.estimator == k) return a;
  throw std::logic_error("missing aggregate");
}

void check_bound_containment() {
  Timer t;
  ExperimentConfig cfg;  // defaults: ER, {10,40,70,100}, 10 graphs, 1e4 trials
  cfg.threads = 8;
  er_report = run_experiment(cfg);
  double worst_excess = -1e300;
  for (const GraphRecord& rec : er_report.records) {
    for (const auto& [kind, out] : rec.outcomes) {
      double se = std::sqrt(
          std::max(out.err_prob * (1.0 - out.err_prob), 0.0) / rec.trials);
      worst_excess =
          std::max(worst_excess, out.err_prob - out.bound_clipped - 4.0 * se);
    }
  }
  record(3, "empirical error stays within the analytic bound",
         worst_excess <= 0.0,
         "worst err - (bound + 4 se) = " + num(worst_excess) + " over " +
             std::to_string(er_report.records.size() * 2) + " points",
         t.seconds(), 300.0);
}

struct SizeStat {
  double mean = 0.0;
  double se = 0.0;
};

SizeStat size_stat(const ExperimentReport& rep, int n, EstimatorKind k) {
  std::vector<double> vals;
  for (const GraphRecord& rec : rep.records)
    if (rec.n == n) vals.push_back(rec.outcomes.at(k).err_prob);
  double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (vals.size() - 1.0));
  return {mean, sd / std::sqrt(static_cast<double>(vals.size()))};
}

void check_wlln_trend() {
  Timer t;
  const std::vector<int> sizes = {10, 40, 70, 100};
  std::vector<SizeStat> stats;
  std::ostringstream seq;
  for (int n : sizes) {
    stats.push_back(size_stat(er_report, n, EstimatorKind::shift_average));
    seq << (n == 10 ? "" : ", ") << num(stats.back().mean);
  }
  int inversions = 0;
  bool inversions_small = true;
  for (size_t i = 0; i + 1 < stats.size(); ++i) {
    if (stats[i + 1].mean > stats[i].mean) {
      ++inversions;
      double se = std::hypot(stats[i].se, stats[i + 1].se);
      if (stats[i + 1].mean - stats[i].mean > 2.0 * se)
        inversions_small = false;
    }
  }
  bool pass = stats.back().mean < stats.front().mean && inversions <= 1 &&
              inversions_small;
  record(4, "error probability decays with graph size", pass,
         "means over {10,40,70,100}: " + seq.str() + "; inversions " +
             std::to_string(inversions),
         t.seconds());
}

void check_er_coincidence() {
  Timer t;
  std::ostringstream detail;
  bool pass = true;
  for (int n : {40, 100}) {
    double avg = aggregate(er_report, n, EstimatorKind::shift_average)
                     .err_prob_mean;
    double opt = aggregate(er_report, n, EstimatorKind::optimal).err_prob_mean;
    double lo = std::min(avg, opt), hi = std::max(avg, opt);
    bool ok = (lo == 0.0 && hi == 0.0) || (lo > 0.0 && hi <= 2.0 * lo);
    pass = pass && ok;
    detail << (n == 40 ? "" : "; ") << "N=" << n << ": " << num(avg) << " vs "
           << num(opt);
  }
  record(8, "both estimators coincide on er graphs", pass, detail.str(),
         t.seconds());
}

ExperimentReport cov_report;

void check_covariance_separation() {
  Timer t;
  ExperimentConfig cfg;
  cfg.family = GraphFamily::covariance;
  cfg.sizes = {60};
  cfg.threads = 8;
  cov_report = run_experiment(cfg);
  double avg =
      aggregate(cov_report, 60, EstimatorKind::shift_average).err_prob_mean;
  double opt = aggregate(cov_report, 60, EstimatorKind::optimal).err_prob_mean;
  bool pass = avg > 0.0 && 10.0 * opt <= avg;
  record(7, "optimal filtering beats the shift average on covariance graphs",
         pass, "mean err prob " + num(avg) + " (shift avg) vs " + num(opt) +
                   " (optimal)",
         t.seconds(), 180.0);
}

// Rebuild every experiment graph from its recorded seed and audit dominance
// of the depth-N averaged spectrum stored in the record.
void check_dominance() {
  Timer t;
  long rebuilt = 0;
  bool rebuild_ok = true;
  auto sweep = [&](const ExperimentReport& rep) {
    const ExperimentConfig& cfg = rep.config;
    for (const GraphRecord& rec : rep.records) {
      Rng rng(rec.graph_seed);
      ShiftOperator s =
          cfg.family == GraphFamily::er
              ? adjacency_shift(erdos_renyi(rec.n, cfg.er_p, rng))
              : covariance_shift(
                    covariance_graph(rec.n, cfg.covariance_samples, rng)
                        .sigma_hat);
      SpectralDecomposition d = decompose(s);
      if (d.lambda1() != rec.lambda1) {
        rebuild_ok = false;
        continue;
      }
      audit.inspect(rec.psd, rec.shift_avg_psd, d);
      ++rebuilt;
    }
  };
  sweep(er_report);
  sweep(cov_report);
  bool pass = rebuild_ok && audit.violations == 0 && audit.checks > 0;
  record(5, "averaging never amplifies spectral power or node variance", pass,
         std::to_string(audit.violations) + " violations in " +
             std::to_string(audit.checks) + " checks (" +
             std::to_string(rebuilt) + " experiment graphs rebuilt)",
         t.seconds());
}

// ---------------------------------------------------------------------------
// 6. The Perron spike minimizes the filtered mse, which then equals p_1.

void check_filtered_mse() {
  Timer t;
  Rng rng(derive_seed(606, {0}));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_spike_gap = 0.0;
  long violations = 0, draws = 0;
  for (const SpectrumConfig& cfgd : psd_configs) {
    const Eigen::VectorXd& p = cfgd.psd;
    Eigen::VectorXcd spike = Eigen::VectorXcd::Zero(cfgd.n);
    spike(0) = 1.0;
    double base = mse(filtered_psd(p, spike));
    worst_spike_gap = std::max(worst_spike_gap, std::abs(base - p(0)));
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXcd ht(cfgd.n);
      for (int j = 0; j < cfgd.n; ++j)
        ht(j) = std::complex<double>(normal(rng), normal(rng));
      if (std::abs(ht(0)) < 1e-3) ht(0) = 1.0;
      ++draws;
      if (mse(filtered_psd(p, ht)) < base) ++violations;
    }
  }
  bool pass = worst_spike_gap <= 1e-12 && violations == 0;
  record(6, "the Perron spike response minimizes the filtered mse", pass,
         "spike mse off p1 by " + num(worst_spike_gap) + "; " +
             std::to_string(violations) + " of " + std::to_string(draws) +
             " random responses beat it",
         t.seconds());
}

// ---------------------------------------------------------------------------
// 9. Message passing reproduces the centralized average with an exact
// message count.

void check_distributed_equivalence() {
  Timer t;
  double worst = 0.0;
  bool messages_exact = true;
  Rng rng(derive_seed(909, {0}));
  for (int i = 0; i < 50; ++i) {
    Graph g;
    ShiftOperator s;
    if (i == 0) {
      g = connected_er(200, 0.05, derive_seed(909, {1000}));
      s = adjacency_shift(g);
    } else if (i % 7 == 0) {
      g = directed_cycle(5 + i % 23);
      s = adjacency_shift(g);
    } else if (i % 7 == 3) {
      Rng grng(derive_seed(909, {(std::uint64_t)i, 2}));
      g = covariance_graph(8 + i % 12, 4000, grng).graph;
      Rng again(derive_seed(909, {(std::uint64_t)i, 2}));
      s = covariance_shift(covariance_graph(8 + i % 12, 4000, again).sigma_hat);
    } else {
      g = connected_er(8 + (i * 5) % 50, 0.3, derive_seed(909, {(std::uint64_t)i}));
      s = (i % 2) ? adjacency_shift(g) : normalized_adjacency_shift(g);
    }
    SpectralDecomposition d = decompose(s);
    int depth = 1 + i % 20;
    Eigen::VectorXd x = gaussian_vector(rng, g.n, 2.0);
    Eigen::VectorXd central = graph_shift_average(s, d.lambda1(), x, depth);
    DiffusionTrace trace = simulate_diffusion(g, s, d.lambda1(), x, depth);
    double scale = std::max(1.0, central.cwiseAbs().maxCoeff());
    worst = std::max(
        worst,
        (trace.per_node_estimates - central).cwiseAbs().maxCoeff() / scale);
    long long dir_edges =
        g.directed ? (long long)g.edges.size() : 2LL * g.edges.size();
    if (trace.messages_sent != (depth - 1) * dir_edges) messages_exact = false;
    audit.inspect_depth(logspace_psd(g.n, 0.9), d, depth);
  }
  record(9, "message passing reproduces the centralized average",
         worst <= 1e-12 && messages_exact,
         "worst relative gap " + num(worst) + "; message counts " +
             (messages_exact ? "exact" : "WRONG") + " on 50 runs",
         t.seconds(), 10.0);
}

// ---------------------------------------------------------------------------
// 10. Averaging a diffusion field reduces the relative estimation error.

void check_field_demo() {
  Timer t;
  GmrfDemoResult big = gmrf_field_demo(1000, 20260814);
  bool big_ok = big.rel_err_avg < big.rel_err_raw;
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GmrfDemoResult r = gmrf_field_demo(100, derive_seed(1010, {seed}));
    if (r.rel_err_avg < r.rel_err_raw) ++wins;
  }
  record(10, "field-demo averaging reduces the relative error",
         big_ok && wins >= 18,
         "N=1000: raw " + num(big.rel_err_raw) + " vs avg " +
             num(big.rel_err_avg) + "; N=100: " + std::to_string(wins) +
             "/20 improved",
         t.seconds(), 60.0);
}

// ---------------------------------------------------------------------------
// 11. Both estimators are unbiased for the ensemble mean.

void check_unbiasedness() {
  Timer t;
  const int n = 30, trials = 10000;
  Graph g = connected_er(n, 0.2, derive_seed(1111, {0}));
  ShiftOperator s = adjacency_shift(g);
  auto d = std::make_shared<SpectralDecomposition>(decompose(s));
  WssProcess proc(d, 3.0, logspace_psd(n, snr_to_p1(3.0, 10.0)));
  Eigen::VectorXd truth = proc.ensemble_mean();

  Eigen::VectorXd mean_avg = Eigen::VectorXd::Zero(n),
                  m2_avg = Eigen::VectorXd::Zero(n),
                  mean_opt = Eigen::VectorXd::Zero(n),
                  m2_opt = Eigen::VectorXd::Zero(n);
  Rng rng(derive_seed(1111, {1}));
  for (int trial = 1; trial <= trials; ++trial) {
    Eigen::VectorXd x = proc.sample(rng);
    Eigen::VectorXd est_avg = graph_shift_average(s, d->lambda1(), x, n);
    Eigen::VectorXd est_opt = optimal_mse_estimator(*d, x);
    Eigen::VectorXd delta = est_avg - mean_avg;
    mean_avg += delta / trial;
    m2_avg += delta.cwiseProduct(est_avg - mean_avg);
    delta = est_opt - mean_opt;
    mean_opt += delta / trial;
    m2_opt += delta.cwiseProduct(est_opt - mean_opt);
  }
  double worst_sigmas = 0.0;
  for (int k = 0; k < n; ++k) {
    double se_avg = std::sqrt(m2_avg(k) / (trials - 1.0) / trials);
    double se_opt = std::sqrt(m2_opt(k) / (trials - 1.0) / trials);
    worst_sigmas = std::max(
        {worst_sigmas, std::abs(mean_avg(k) - truth(k)) / se_avg,
         std::abs(mean_opt(k) - truth(k)) / se_opt});
  }
  record(11, "both estimators are unbiased for the ensemble mean",
         worst_sigmas <= 4.0,
         "worst |mean - mu v1| = " + num(worst_sigmas) +
             " standard errors over 60 node checks",
         t.seconds(), 20.0);
}

// ---------------------------------------------------------------------------
// 12. Transform invariants hold and the Perron direction is the smoothest.

void check_spectral_sanity() {
  Timer t;
  double worst_parseval = 0.0, worst_recon = 0.0;
  bool tv_minimal = true;
  Rng rng(derive_seed(1212, {0}));
  for (int i = 0; i < 100; ++i) {
    int n = 8 + (i * 3) % 33;
    ShiftOperator s;
    std::uint64_t seed = derive_seed(1212, {(std::uint64_t)i + 1});
    switch (i % 5) {
      case 0:
        s = adjacency_shift(connected_er(n, 0.35, seed));
        break;
      case 1:
        s = normalized_adjacency_shift(connected_er(n, 0.35, seed));
        break;
      case 2: {
        Rng grng(seed);
        s = adjacency_shift(
            stochastic_block_model(std::max(n, 12), 4, 0.7, 0.15, grng));
        break;
      }
      case 3: {
        for (std::uint64_t attempt = 0;; ++attempt) {
          Rng grng(derive_seed(seed, {attempt}));
          SensorNetwork net = sensor_network(std::max(n, 12), 0.01, 1.0, 1.75,
                                             grng);
          if (is_connected(net.graph)) {
            s = adjacency_shift(net.graph);
            break;
          }
        }
        break;
      }
      default: {
        Rng grng(seed);
        s = covariance_shift(
            covariance_graph(8 + n % 12, 20000, grng).sigma_hat);
        break;
      }
    }
    SpectralDecomposition d = decompose(s);
    Eigen::VectorXd x = gaussian_vector(rng, d.size(), 1.5);
    Eigen::VectorXcd xt = gft(d, x);
    worst_parseval = std::max(
        worst_parseval, std::abs(xt.norm() - x.norm()) / std::max(1.0, x.norm()));
    worst_recon = std::max(
        worst_recon, (igft(d, xt).real() - x).cwiseAbs().maxCoeff() /
                         std::max(1.0, x.cwiseAbs().maxCoeff()));
    double tv1 = total_variation(s, d.lambda1(), d.perron_vector());
    const Eigen::MatrixXd& v = d.eigenvectors_real();
    for (int j = 1; j < d.size(); ++j)
      if (total_variation(s, d.lambda1(), v.col(j)) <= tv1) tv_minimal = false;
    Eigen::VectorXd p(d.size());
    for (int j = 0; j < d.size(); ++j) p(j) = 0.4 + 0.1 * j;
    audit.inspect_depth(p, d, 4);
  }
  bool pass = worst_parseval <= 1e-10 && worst_recon <= 1e-10 && tv_minimal;
  record(12, "transform invariants hold and the Perron direction is smoothest",
         pass,
         "worst Parseval gap " + num(worst_parseval) + ", reconstruction " +
             num(worst_recon) + ", tv(v1) minimal on all 100 graphs",
         t.seconds(), 10.0);
}

}  // namespace

int main() {
  Timer total;
  std::cerr << "running acceptance checks...\n";
  check_cycle_exactness();
  check_psd_oracle();
  check_bound_containment();
  check_wlln_trend();
  check_covariance_separation();
  check_er_coincidence();
  check_dominance();
  check_filtered_mse();
  check_distributed_equivalence();
  check_field_demo();
  check_unbiasedness();
  check_spectral_sanity();

  std::sort(verdicts.begin(), verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int failures = 0;
  for (const Verdict& v : verdicts) {
    if (!v.pass) ++failures;
    std::string budget =
        v.budget > 0.0 ? ", budget " + num(v.budget) + " s" : "";
    std::printf("[%s] %2d %s: %s (%.2f s%s)\n", v.pass ? "PASS" : "FAIL", v.id,
                v.name.c_str(), v.detail.c_str(), v.seconds, budget.c_str());
  }
  std::printf("acceptance: %d/12 passed in %.1f s\n", 12 - failures,
              total.seconds());
  return failures;
}
