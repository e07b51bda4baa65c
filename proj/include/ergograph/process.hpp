#pragma once

#include <Eigen/Dense>
#include <memory>

#include "ergograph/random.hpp"
#include "ergograph/spectral.hpp"
#include "json.hpp"

namespace ergograph {

// Wide-sense stationary process on a graph: mean mu * v1, covariance
// V diag(psd) V^H.  Immutable once built; sampling only mutates the
// caller-owned rng, so one process can serve many threads.
class WssProcess {
 public:
  WssProcess(std::shared_ptr<const SpectralDecomposition> d, double mu,
             Eigen::VectorXd psd);

  const SpectralDecomposition& decomposition() const { return *d_; }
  std::shared_ptr<const SpectralDecomposition> decomposition_ptr() const {
    return d_;
  }
  double mu() const { return mu_; }
  const Eigen::VectorXd& psd() const { return psd_; }

  Eigen::VectorXd ensemble_mean() const;  // mu * v1
  Eigen::MatrixXcd covariance() const;    // V diag(psd) V^H

  // mu * v1 + B w with w iid standard normal and B the symmetric PSD square
  // root of the covariance; requires a real covariance (conjugate-symmetric
  // psd when the basis is complex).
  Eigen::VectorXd sample(Rng& rng) const;
  // One draw per column; identical draw sequence as repeated sample() calls.
  Eigen::MatrixXd sample_block(Rng& rng, int draws) const;

 private:
  std::shared_ptr<const SpectralDecomposition> d_;
  double mu_ = 0.0;
  Eigen::VectorXd psd_;
  Eigen::MatrixXd root_;
  double root_residual_ = 0.0;  // | imag part | of V diag(sqrt psd) V^H
};

// p1 = mu^2 * 10^(-snr_db/10), from SNR = 10 log10(mu^2 / p1).
double snr_to_p1(double mu, double snr_db);

// p_n = p1 * 10^(3(n-1)/(N-1) + 1) for n >= 2.  The DC entry stays at p1
// unless literal_dc makes it follow the same expression (value 10*p1).
Eigen::VectorXd logspace_psd(int n, double p1, bool literal_dc = false);

// Diffusion spectrum p_n = a0^2 / |1 - a*lambda_n|^2; rejects a*lambda_n
// within 1e-12 of 1.
Eigen::VectorXd gmrf_psd(const SpectralDecomposition& d, double a, double a0);

// The a0 that makes gmrf_psd hit a prescribed DC value.
double gmrf_calibrate_a0(const SpectralDecomposition& d, double a,
                         double p1_target);

struct WssReport {
  double mean_alignment = 0.0;   // residual of sample mean off span(v1)
  double offdiag_energy = 0.0;   // off-diagonal mass of V^H C V
  bool pass = false;
};

WssReport verify_wss(const Eigen::VectorXd& sample_mean,
                     const Eigen::MatrixXd& sample_cov,
                     const SpectralDecomposition& d, double tol);

nlohmann::json process_to_json(const WssProcess& p);

}  // namespace ergograph
