#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "ergograph/spectral.hpp"

namespace ergograph {

// (sum_{l<depth} lam^l) / (sum_{l<depth} lambda1^l), evaluated so neither sum
// overflows: terms are rescaled by lambda1^(depth-1) when lambda1 >= 1, and
// the plain geometric closed form is used when lambda1 < 1 (direct summation
// within 1e-9 of lambda = 1).
std::complex<double> diffusion_gain(std::complex<double> lam, double lambda1,
                                    int depth);

// Spectrum of the depth-L shift average: q_n = p_n |gain_n|^2 with q_1 = p_1
// exactly.
Eigen::VectorXd estimator_psd(const Eigen::VectorXd& p,
                              const Eigen::VectorXcd& eigenvalues,
                              double lambda1, int depth);

// Spectrum of a filtered estimate: r_n = p_n |ht_n|^2 / |ht_1|^2, r_1 = p_1.
Eigen::VectorXd filtered_psd(const Eigen::VectorXd& p,
                             const Eigen::VectorXcd& ht);

// Var[x_k] = sum_n psd_n |v_{k,n}|^2 for a 1-based vertex k.
double node_variance(const Eigen::VectorXd& spectrum_psd,
                     const SpectralDecomposition& d, int node);

struct ChebyshevBound {
  double raw = 0.0;      // variance / epsilon^2
  double clipped = 0.0;  // min(raw, 1): probabilities never exceed 1
};

ChebyshevBound chebyshev_bound(double variance, double epsilon);

// Total estimator MSE, the trace of its covariance.
double mse(const Eigen::VectorXd& spectrum_psd);

// sum_n log psd_n; -inf when any component vanishes.
double log_det(const Eigen::VectorXd& spectrum_psd);

// Error-probability floor p1 v_k1^2 / eps^2 that survives unbounded depth.
double consensus_limit(double p1, double v_k1, double epsilon);

struct BoundReport {
  int node = 0;
  double epsilon = 0.0;
  double variance = 0.0;
  ChebyshevBound bound;
  Eigen::VectorXd spectrum_psd;
};

BoundReport node_bound_report(const Eigen::VectorXd& spectrum_psd,
                              const SpectralDecomposition& d, int node,
                              double epsilon);

// Header + one row per report: node,epsilon,variance,bound_raw,bound_clipped.
void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports);

}  // namespace ergograph
