#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ergograph/spectral.hpp"
#include "json.hpp"

namespace ergograph {

// A linear shift-invariant filter, described by polynomial taps h (so
// H = sum_l h_l S^l), a frequency response evaluated on the graph spectrum,
// or both.
struct FilterSpec {
  std::optional<Eigen::VectorXd> taps;
  std::optional<Eigen::VectorXcd> freq_response;
};

void validate_filter(const FilterSpec& f);
nlohmann::json filter_to_json(const FilterSpec& f);
FilterSpec filter_from_json(const nlohmann::json& j);

// h evaluated on each eigenvalue (Horner).
Eigen::VectorXcd frequency_response(const Eigen::VectorXd& taps,
                                    const Eigen::VectorXcd& eigenvalues);

// Unbiased diffusion average (sum_{l<L} S^l x) / (sum_{l<L} lambda1^l),
// computed with L-1 sparse shift applications and running normalization so
// nothing overflows when lambda1^L would.
Eigen::VectorXd graph_shift_average(const ShiftOperator& s, double lambda1,
                                    const Eigen::VectorXd& x, int depth);

// Unbiased filtered estimate V diag(ht) V^H x / ht_1; uses freq_response when
// present, otherwise evaluates the taps on the spectrum.
Eigen::VectorXd filtered_estimator(const SpectralDecomposition& d,
                                   const FilterSpec& f,
                                   const Eigen::VectorXd& x);

// MSE-optimal unbiased filter: project onto the Perron direction.
Eigen::VectorXd optimal_mse_estimator(const SpectralDecomposition& d,
                                      const Eigen::VectorXd& x);

// Log-det-optimal response under the power budget ht_1^2 <= nu_max:
// (sqrt(nu_max), 0, ..., 0).
FilterSpec optimal_logdet_response(int n, double nu_max);

struct TapSynthesis {
  Eigen::VectorXd taps;
  double residual = 0.0;   // ||Psi h - target||_2
  double condition = 0.0;  // Vandermonde singular value ratio
  bool ill_conditioned = false;
};

// Least-squares inversion of the spectral Vandermonde system; rejects
// repeated eigenvalues and targets that would need complex taps.
TapSynthesis synthesize_taps(const Eigen::VectorXcd& eigenvalues,
                             const Eigen::VectorXcd& target);

}  // namespace ergograph
