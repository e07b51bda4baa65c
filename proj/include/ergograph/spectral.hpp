#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ergograph/graph.hpp"
#include "json.hpp"

namespace ergograph {

// Eigendecomposition S = V diag(lambda) V^H with unitary V.  Ordering: the
// Perron root (real, dominant modulus) first, the rest by decreasing modulus
// with ties resolved by increasing |arg|, positive imaginary part first, then
// original solver order.  v1 is real with its sign fixed so the entry sum is
// positive.
class SpectralDecomposition {
 public:
  int size() const { return static_cast<int>(lambda_.size()); }
  ShiftKind source_kind() const { return source_kind_; }
  bool real() const { return real_; }

  const Eigen::VectorXcd& eigenvalues() const { return lambda_; }
  double lambda1() const { return lambda1_; }
  const Eigen::VectorXd& perron_vector() const { return v1_; }
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }
  // Only available for symmetric sources.
  const Eigen::MatrixXd& eigenvectors_real() const;

 private:
  friend SpectralDecomposition decompose(const ShiftOperator& s);
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd vectors_;
  Eigen::MatrixXd vectors_real_;
  Eigen::VectorXd v1_;
  double lambda1_ = 0.0;
  bool real_ = false;
  ShiftKind source_kind_ = ShiftKind::adjacency;
};

// Symmetric shifts use a self-adjoint solver; the directed cycle uses the
// analytic DFT basis v_n[k] = exp(2*pi*i*(k-1)*(n-1)/N)/sqrt(N).  Anything
// else (non-symmetric, non-cycle) is rejected.
SpectralDecomposition decompose(const ShiftOperator& s);

Eigen::VectorXcd gft(const SpectralDecomposition& d, const Eigen::VectorXd& x);
Eigen::VectorXcd gft(const SpectralDecomposition& d, const Eigen::VectorXcd& x);
Eigen::VectorXcd igft(const SpectralDecomposition& d, const Eigen::VectorXcd& xt);
// Round trip for real signals; throws if the imaginary residual exceeds tol
// relative to the signal norm.
Eigen::VectorXd igft_real(const SpectralDecomposition& d,
                          const Eigen::VectorXcd& xt, double tol = 1e-8);

// ||x - S x / lambda1||_1
double total_variation(const ShiftOperator& s, double lambda1,
                       const Eigen::VectorXd& x);

enum class SpectrumRegimeKind {
  lambda1_equal_one,
  lambda1_above_one,
  lambda1_below_one,
};

const char* regime_name(SpectrumRegimeKind k);

struct SpectrumRegime {
  double lambda1 = 0.0;
  Eigen::VectorXd ratios;        // |lambda_n| / lambda1 for n >= 2
  SpectrumRegimeKind regime = SpectrumRegimeKind::lambda1_equal_one;
  std::vector<int> flagged;      // spectral indices n >= 2 with ratio >= threshold
  bool perron_near_degenerate = false;  // |lambda_2| within 1e-12*lambda1
};

SpectrumRegime classify_spectrum(const SpectralDecomposition& d,
                                 double ratio_threshold);

nlohmann::json decomposition_to_json(const SpectralDecomposition& d,
                                     bool include_vectors = false);

}  // namespace ergograph
