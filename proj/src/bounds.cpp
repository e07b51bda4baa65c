#include "ergograph/bounds.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ergograph/csv.hpp"

namespace ergograph {
namespace {

std::complex<double> geometric_sum(std::complex<double> lam, int depth) {
  if (std::abs(lam - 1.0) <= 1e-9) {
    std::complex<double> acc = 0.0, pw = 1.0;
    for (int l = 0; l < depth; ++l) {
      acc += pw;
      pw *= lam;
    }
    return acc;
  }
  return (std::pow(lam, depth) - 1.0) / (lam - 1.0);
}

}  // namespace

std::complex<double> diffusion_gain(std::complex<double> lam, double lambda1,
                                    int depth) {
  if (depth < 1)
    throw std::invalid_argument("diffusion_gain: depth must be >= 1");
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("diffusion_gain: lambda1 must be positive");
  if (depth == 1) return 1.0;

  if (lambda1 >= 1.0 - 1e-9) {
    if (depth * std::log(lambda1) < 600.0) {
      // Nothing can overflow: plain running-product partial sums.  Keeping
      // the powers as products preserves exact cancellations (e.g. the full
      // circulation of a cycle sums fourth roots of unity to exactly zero).
      std::complex<double> num = 0.0, pw = 1.0;
      double den = 0.0, l1 = 1.0;
      for (int l = 0; l < depth; ++l) {
        num += pw;
        den += l1;
        pw *= lam;
        l1 *= lambda1;
      }
      return num / den;
    }
    // lambda1^depth overflows; evaluate each term scaled by
    // lambda1^(depth-1), which keeps everything in [0, 1].
    std::complex<double> ratio = lam / lambda1;
    double s1 = 0.0;
    std::complex<double> t = 0.0;
    for (int l = 0; l < depth; ++l) {
      s1 += std::pow(lambda1, static_cast<double>(-l));
      t += std::pow(ratio, static_cast<double>(l)) *
           std::pow(lambda1, static_cast<double>(l + 1 - depth));
    }
    return t / s1;
  }
  return geometric_sum(lam, depth) / geometric_sum(lambda1, depth);
}

Eigen::VectorXd estimator_psd(const Eigen::VectorXd& p,
                              const Eigen::VectorXcd& eigenvalues,
                              double lambda1, int depth) {
  const int n = static_cast<int>(p.size());
  if (eigenvalues.size() != n)
    throw std::invalid_argument("estimator_psd: psd/spectrum length mismatch");
  if (p.size() && p.minCoeff() < 0.0)
    throw std::invalid_argument("estimator_psd: psd must be nonnegative");
  Eigen::VectorXd q(n);
  if (n == 0) return q;
  q(0) = p(0);
  // |gain| <= 1 holds analytically (|lambda| <= lambda1); clamp so rounding
  // never lets the averaged spectrum exceed the input spectrum.
  for (int i = 1; i < n; ++i) {
    double g2 = std::norm(diffusion_gain(eigenvalues(i), lambda1, depth));
    q(i) = p(i) * std::min(g2, 1.0);
  }
  return q;
}

Eigen::VectorXd filtered_psd(const Eigen::VectorXd& p,
                             const Eigen::VectorXcd& ht) {
  const int n = static_cast<int>(p.size());
  if (ht.size() != n)
    throw std::invalid_argument("filtered_psd: psd/response length mismatch");
  if (p.size() && p.minCoeff() < 0.0)
    throw std::invalid_argument("filtered_psd: psd must be nonnegative");
  double scale = ht.cwiseAbs().maxCoeff();
  double h1 = std::norm(ht(0));
  if (std::sqrt(h1) <= 1e-12 * std::max(scale, 1e-300))
    throw std::invalid_argument(
        "filtered_psd: response at the Perron frequency is zero");
  Eigen::VectorXd r(n);
  r(0) = p(0);
  for (int i = 1; i < n; ++i) r(i) = p(i) * std::norm(ht(i)) / h1;
  return r;
}

double node_variance(const Eigen::VectorXd& spectrum_psd,
                     const SpectralDecomposition& d, int node) {
  if (spectrum_psd.size() != d.size())
    throw std::invalid_argument("node_variance: psd length mismatch");
  if (node < 1 || node > d.size())
    throw std::invalid_argument("node_variance: node index out of range");
  double acc = 0.0;
  for (int i = 0; i < d.size(); ++i)
    acc += spectrum_psd(i) * std::norm(d.eigenvectors()(node - 1, i));
  return acc;
}

ChebyshevBound chebyshev_bound(double variance, double epsilon) {
  if (variance < 0.0)
    throw std::invalid_argument("chebyshev_bound: variance must be >= 0");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("chebyshev_bound: epsilon must be > 0");
  double raw = variance / (epsilon * epsilon);
  return {raw, std::min(raw, 1.0)};
}

double mse(const Eigen::VectorXd& spectrum_psd) {
  if (spectrum_psd.size() && spectrum_psd.minCoeff() < 0.0)
    throw std::invalid_argument("mse: psd must be nonnegative");
  return spectrum_psd.sum();
}

double log_det(const Eigen::VectorXd& spectrum_psd) {
  double acc = 0.0;
  for (int i = 0; i < spectrum_psd.size(); ++i) {
    if (!(spectrum_psd(i) > 0.0))
      return -std::numeric_limits<double>::infinity();
    acc += std::log(spectrum_psd(i));
  }
  return acc;
}

double consensus_limit(double p1, double v_k1, double epsilon) {
  if (p1 < 0.0) throw std::invalid_argument("consensus_limit: p1 must be >= 0");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("consensus_limit: epsilon must be > 0");
  return p1 * v_k1 * v_k1 / (epsilon * epsilon);
}

BoundReport node_bound_report(const Eigen::VectorXd& spectrum_psd,
                              const SpectralDecomposition& d, int node,
                              double epsilon) {
  BoundReport r;
  r.node = node;
  r.epsilon = epsilon;
  r.variance = node_variance(spectrum_psd, d, node);
  r.bound = chebyshev_bound(r.variance, epsilon);
  r.spectrum_psd = spectrum_psd;
  return r;
}

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << "node,epsilon,variance,bound_raw,bound_clipped\n";
  for (const BoundReport& r : reports)
    os << r.node << ',' << g17(r.epsilon) << ',' << g17(r.variance) << ','
       << g17(r.bound.raw) << ',' << g17(r.bound.clipped) << '\n';
}

}  // namespace ergograph
