#include "ergograph/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ergograph {

void validate_filter(const FilterSpec& f) {
  if (!f.taps && !f.freq_response)
    throw std::invalid_argument(
        "filter: need taps, a frequency response, or both");
  if (f.taps && f.taps->size() < 1)
    throw std::invalid_argument("filter: taps must be nonempty");
  if (f.freq_response && f.freq_response->size() < 1)
    throw std::invalid_argument("filter: frequency response must be nonempty");
}

nlohmann::json filter_to_json(const FilterSpec& f) {
  validate_filter(f);
  nlohmann::json j = nlohmann::json::object();
  if (f.taps) {
    nlohmann::json taps = nlohmann::json::array();
    for (int i = 0; i < f.taps->size(); ++i) taps.push_back((*f.taps)(i));
    j["taps"] = std::move(taps);
  }
  if (f.freq_response) {
    nlohmann::json fr = nlohmann::json::array();
    for (int i = 0; i < f.freq_response->size(); ++i)
      fr.push_back({(*f.freq_response)(i).real(), (*f.freq_response)(i).imag()});
    j["freq_response"] = std::move(fr);
  }
  return j;
}

FilterSpec filter_from_json(const nlohmann::json& j) {
  FilterSpec f;
  if (j.contains("taps")) {
    Eigen::VectorXd taps(j["taps"].size());
    for (size_t i = 0; i < j["taps"].size(); ++i)
      taps(static_cast<int>(i)) = j["taps"][i].get<double>();
    f.taps = std::move(taps);
  }
  if (j.contains("freq_response")) {
    Eigen::VectorXcd fr(j["freq_response"].size());
    for (size_t i = 0; i < j["freq_response"].size(); ++i) {
      const auto& c = j["freq_response"][i];
      if (!c.is_array() || c.size() != 2)
        throw std::invalid_argument(
            "filter json: freq_response entries must be [re, im] pairs");
      fr(static_cast<int>(i)) = {c[0].get<double>(), c[1].get<double>()};
    }
    f.freq_response = std::move(fr);
  }
  validate_filter(f);
  return f;
}

Eigen::VectorXcd frequency_response(const Eigen::VectorXd& taps,
                                    const Eigen::VectorXcd& eigenvalues) {
  if (taps.size() < 1)
    throw std::invalid_argument("frequency_response: taps must be nonempty");
  Eigen::VectorXcd out(eigenvalues.size());
  for (int i = 0; i < eigenvalues.size(); ++i) {
    std::complex<double> lam = eigenvalues(i), acc = taps(taps.size() - 1);
    for (int l = static_cast<int>(taps.size()) - 2; l >= 0; --l)
      acc = acc * lam + taps(l);
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXd graph_shift_average(const ShiftOperator& s, double lambda1,
                                    const Eigen::VectorXd& x, int depth) {
  if (depth < 1)
    throw std::invalid_argument("graph_shift_average: depth must be >= 1");
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("graph_shift_average: lambda1 must be positive");
  if (x.size() != s.size())
    throw std::invalid_argument("graph_shift_average: size mismatch");

  // acc after j rounds equals (sum_{l<=j} S^l x) / (sum_{l<=j} lambda1^l);
  // gamma tracks 1 / sum_{l<=j} lambda1^l without ever forming the sum.
  Eigen::VectorXd acc = x;
  double gamma = 1.0;
  for (int j = 1; j < depth; ++j) {
    gamma = gamma / (gamma + lambda1);
    acc = gamma * x + ((1.0 - gamma) / lambda1) * s.apply(acc);
  }
  return acc;
}

Eigen::VectorXd filtered_estimator(const SpectralDecomposition& d,
                                   const FilterSpec& f,
                                   const Eigen::VectorXd& x) {
  validate_filter(f);
  if (x.size() != d.size())
    throw std::invalid_argument("filtered_estimator: size mismatch");
  Eigen::VectorXcd ht;
  if (f.freq_response) {
    ht = *f.freq_response;
    if (ht.size() != d.size())
      throw std::invalid_argument(
          "filtered_estimator: frequency response length must match graph size");
  } else {
    ht = frequency_response(*f.taps, d.eigenvalues());
  }
  double scale = ht.cwiseAbs().maxCoeff();
  if (std::abs(ht(0)) <= 1e-12 * std::max(scale, 1e-300))
    throw std::invalid_argument(
        "filtered_estimator: response at the Perron frequency is zero, "
        "estimator cannot be normalized");

  Eigen::VectorXcd zt = gft(d, x).cwiseProduct(ht) / ht(0);
  return igft_real(d, zt);
}

Eigen::VectorXd optimal_mse_estimator(const SpectralDecomposition& d,
                                      const Eigen::VectorXd& x) {
  if (x.size() != d.size())
    throw std::invalid_argument("optimal_mse_estimator: size mismatch");
  const Eigen::VectorXd& v1 = d.perron_vector();
  return v1 * v1.dot(x);
}

FilterSpec optimal_logdet_response(int n, double nu_max) {
  if (n < 1) throw std::invalid_argument("optimal_logdet_response: n must be >= 1");
  if (!(nu_max > 0.0))
    throw std::invalid_argument("optimal_logdet_response: nu_max must be > 0");
  Eigen::VectorXcd fr = Eigen::VectorXcd::Zero(n);
  fr(0) = std::sqrt(nu_max);
  return FilterSpec{std::nullopt, fr};
}

TapSynthesis synthesize_taps(const Eigen::VectorXcd& eigenvalues,
                             const Eigen::VectorXcd& target) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 1) throw std::invalid_argument("synthesize_taps: empty spectrum");
  if (target.size() != n)
    throw std::invalid_argument("synthesize_taps: target length mismatch");

  double scale = eigenvalues.cwiseAbs().maxCoeff();
  double gap_tol = 1e-9 * std::max(scale, 1e-300);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(eigenvalues(i) - eigenvalues(j)) <= gap_tol)
        throw std::invalid_argument(
            "synthesize_taps: repeated eigenvalues at spectral indices " +
            std::to_string(i + 1) + " and " + std::to_string(j + 1) +
            ", Vandermonde system is rank deficient");

  Eigen::MatrixXcd psi(n, n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> pw = 1.0;
    for (int l = 0; l < n; ++l) {
      psi(i, l) = pw;
      pw *= eigenvalues(i);
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(psi,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXcd h = svd.solve(target);

  TapSynthesis out;
  out.residual = (psi * h - target).norm();
  double smin = svd.singularValues()(n - 1);
  out.condition = smin > 0.0 ? svd.singularValues()(0) / smin
                             : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition <= 1e12);
  if (h.imag().cwiseAbs().maxCoeff() >
      1e-8 * std::max(1.0, h.real().cwiseAbs().maxCoeff()))
    throw std::invalid_argument(
        "synthesize_taps: target response requires complex taps");
  out.taps = h.real();
  return out;
}

}  // namespace ergograph
