#include "ergograph/process.hpp"

#include <cmath>
#include <stdexcept>

namespace ergograph {

WssProcess::WssProcess(std::shared_ptr<const SpectralDecomposition> d,
                       double mu, Eigen::VectorXd psd)
    : d_(std::move(d)), mu_(mu), psd_(std::move(psd)) {
  if (!d_) throw std::invalid_argument("process: missing decomposition");
  if (psd_.size() != d_->size())
    throw std::invalid_argument("process: psd length must match graph size");
  if (!psd_.allFinite())
    throw std::invalid_argument("process: psd must be finite");
  if (psd_.minCoeff() < -1e-10)
    throw std::invalid_argument("process: psd must be nonnegative");

  Eigen::VectorXd clamped = psd_.cwiseMax(0.0);
  if (d_->real()) {
    const Eigen::MatrixXd& v = d_->eigenvectors_real();
    Eigen::MatrixXd scaled = v * clamped.cwiseSqrt().asDiagonal();
    root_ = scaled * v.transpose();
    root_residual_ = 0.0;
  } else {
    Eigen::MatrixXcd scaled =
        d_->eigenvectors() *
        clamped.cwiseSqrt().cast<std::complex<double>>().asDiagonal();
    Eigen::MatrixXcd root = scaled * d_->eigenvectors().adjoint();
    root_ = root.real();
    double scale = std::max(1.0, root_.cwiseAbs().maxCoeff());
    root_residual_ = root.imag().cwiseAbs().maxCoeff() / scale;
  }
}

Eigen::VectorXd WssProcess::ensemble_mean() const {
  return mu_ * d_->perron_vector();
}

Eigen::MatrixXcd WssProcess::covariance() const {
  return d_->eigenvectors() *
         psd_.cast<std::complex<double>>().asDiagonal() *
         d_->eigenvectors().adjoint();
}

Eigen::VectorXd WssProcess::sample(Rng& rng) const {
  return sample_block(rng, 1).col(0);
}

Eigen::MatrixXd WssProcess::sample_block(Rng& rng, int draws) const {
  if (draws < 1) throw std::invalid_argument("sample: draws must be >= 1");
  if (root_residual_ > 1e-10)
    throw std::invalid_argument(
        "sample: covariance is not real (psd is not conjugate-symmetric)");
  const int n = d_->size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(n, draws);
  for (int t = 0; t < draws; ++t)
    for (int i = 0; i < n; ++i) w(i, t) = normal(rng);
  Eigen::MatrixXd x = root_ * w;
  x.colwise() += ensemble_mean();
  return x;
}

double snr_to_p1(double mu, double snr_db) {
  if (mu == 0.0)
    throw std::invalid_argument("snr_to_p1: mu must be nonzero");
  return mu * mu * std::pow(10.0, -snr_db / 10.0);
}

Eigen::VectorXd logspace_psd(int n, double p1, bool literal_dc) {
  if (n < 2) throw std::invalid_argument("logspace_psd: need n >= 2");
  if (p1 < 0.0) throw std::invalid_argument("logspace_psd: p1 must be >= 0");
  Eigen::VectorXd p(n);
  p(0) = literal_dc ? 10.0 * p1 : p1;
  for (int i = 1; i < n; ++i)
    p(i) = p1 * std::pow(10.0, 3.0 * i / (n - 1) + 1.0);
  return p;
}

Eigen::VectorXd gmrf_psd(const SpectralDecomposition& d, double a, double a0) {
  const int n = d.size();
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> den = 1.0 - a * d.eigenvalues()(i);
    if (std::abs(den) < 1e-12)
      throw std::invalid_argument(
          "gmrf_psd: a*lambda hits 1, diffusion operator is singular");
    p(i) = a0 * a0 / std::norm(den);
  }
  return p;
}

double gmrf_calibrate_a0(const SpectralDecomposition& d, double a,
                         double p1_target) {
  if (p1_target < 0.0)
    throw std::invalid_argument("gmrf_calibrate_a0: target must be >= 0");
  std::complex<double> den = 1.0 - a * d.eigenvalues()(0);
  if (std::abs(den) < 1e-12)
    throw std::invalid_argument(
        "gmrf_calibrate_a0: a*lambda1 hits 1, diffusion operator is singular");
  return std::sqrt(p1_target) * std::abs(den);
}

WssReport verify_wss(const Eigen::VectorXd& sample_mean,
                     const Eigen::MatrixXd& sample_cov,
                     const SpectralDecomposition& d, double tol) {
  if (sample_mean.size() != d.size() || sample_cov.rows() != d.size() ||
      sample_cov.cols() != d.size())
    throw std::invalid_argument("verify_wss: size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("verify_wss: tol must be > 0");

  WssReport r;
  const Eigen::VectorXd& v1 = d.perron_vector();
  Eigen::VectorXd residual = sample_mean - v1 * v1.dot(sample_mean);
  r.mean_alignment = residual.norm() / std::max(sample_mean.norm(), tol);

  Eigen::MatrixXcd ct = d.eigenvectors().adjoint() *
                        sample_cov.cast<std::complex<double>>() *
                        d.eigenvectors();
  double total = ct.norm();
  Eigen::MatrixXcd off = ct;
  off.diagonal().setZero();
  r.offdiag_energy = off.norm() / std::max(total, 1e-300);
  r.pass = r.mean_alignment <= tol && r.offdiag_energy <= tol;
  return r;
}

nlohmann::json process_to_json(const WssProcess& p) {
  nlohmann::json psd = nlohmann::json::array();
  for (int i = 0; i < p.psd().size(); ++i) psd.push_back(p.psd()(i));
  return nlohmann::json{{"mu", p.mu()},
                        {"psd", std::move(psd)},
                        {"shift", shift_kind_name(p.decomposition().source_kind())}};
}

}  // namespace ergograph
