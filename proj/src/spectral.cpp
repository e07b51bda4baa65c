#include "ergograph/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace ergograph {
namespace {

// Sort key for everything after the Perron root.
std::tuple<double, double, double, int> tail_key(std::complex<double> lam,
                                                 int index) {
  return {-std::abs(lam), std::abs(std::arg(lam)), -lam.imag(), index};
}

void fix_perron_sign(Eigen::MatrixXcd& v, Eigen::MatrixXd* vr) {
  Eigen::VectorXd col = v.col(0).real();
  double s = col.sum();
  bool flip = s < 0.0;
  if (s == 0.0) {
    for (int i = 0; i < col.size(); ++i)
      if (col(i) != 0.0) {
        flip = col(i) < 0.0;
        break;
      }
  }
  if (flip) {
    v.col(0) = -v.col(0);
    if (vr) vr->col(0) = -vr->col(0);
  }
}

struct DecompositionParts {
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd vectors;
  Eigen::MatrixXd vectors_real;
  Eigen::VectorXd v1;
  double lambda1 = 0.0;
  bool real = false;
};

DecompositionParts decompose_cycle(const ShiftOperator& s) {
  const int n = s.size();
  DecompositionParts d;
  d.real = false;

  // Enumerate eigenpairs: column j holds frequency +j, eigenvalue e^{-2*pi*i*j/n}.
  // Frequencies j and n-j are exact conjugates so conjugate-symmetric spectra
  // produce bit-real covariances.
  Eigen::VectorXcd lam(n);
  Eigen::MatrixXcd v(n, n);
  const double step = 2.0 * std::numbers::pi / n;
  for (int j = 0; j <= n / 2; ++j) {
    lam(j) = std::polar(1.0, -step * j);
    for (int k = 0; k < n; ++k) v(k, j) = std::polar(1.0, step * k * j);
    if (j > 0 && j + j < n) {
      lam(n - j) = std::conj(lam(j));
      v.col(n - j) = v.col(j).conjugate();
    }
  }
  lam(0) = 1.0;
  if (n % 2 == 0) lam(n / 2) = -1.0;
  v /= std::sqrt(static_cast<double>(n));

  // All moduli are one, so the tail sorts by |angle| with the positive
  // imaginary partner first: (n-1, 1), (n-2, 2), ...; the angles are known
  // analytically, no float comparisons needed.
  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  order.push_back(0);
  for (int m = 1; m + m <= n; ++m) {
    if (m + m < n) order.push_back(n - m);  // e^{+i 2 pi m / n}
    order.push_back(m);                     // e^{-i 2 pi m / n}
  }

  d.lambda.resize(n);
  d.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    d.lambda(i) = lam(order[static_cast<size_t>(i)]);
    d.vectors.col(i) = v.col(order[static_cast<size_t>(i)]);
  }
  d.lambda1 = 1.0;
  fix_perron_sign(d.vectors, nullptr);
  d.v1 = d.vectors.col(0).real();
  return d;
}

DecompositionParts decompose_symmetric(const ShiftOperator& s) {
  const int n = s.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("decompose: eigensolver failed to converge");
  const Eigen::VectorXd& lam = es.eigenvalues();   // ascending
  const Eigen::MatrixXd& v = es.eigenvectors();

  int perron = 0;
  for (int i = 1; i < n; ++i)
    if (lam(i) > lam(perron)) perron = i;
  double scale = lam.cwiseAbs().maxCoeff();
  if (lam(perron) < scale * (1.0 - 1e-10))
    throw std::invalid_argument(
        "decompose: largest-modulus eigenvalue is negative; shift has no "
        "Perron root");

  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  order.push_back(perron);
  for (int i = 0; i < n; ++i)
    if (i != perron) order.push_back(i);
  std::sort(order.begin() + 1, order.end(), [&](int a, int b) {
    return tail_key(lam(a), a) < tail_key(lam(b), b);
  });

  DecompositionParts d;
  d.real = true;
  d.lambda.resize(n);
  d.vectors_real.resize(n, n);
  for (int i = 0; i < n; ++i) {
    d.lambda(i) = lam(order[static_cast<size_t>(i)]);
    d.vectors_real.col(i) = v.col(order[static_cast<size_t>(i)]);
  }
  d.vectors = d.vectors_real.cast<std::complex<double>>();
  d.lambda1 = lam(perron);
  fix_perron_sign(d.vectors, &d.vectors_real);
  d.v1 = d.vectors_real.col(0);
  return d;
}

}  // namespace

const Eigen::MatrixXd& SpectralDecomposition::eigenvectors_real() const {
  if (!real_)
    throw std::logic_error(
        "eigenvectors_real: decomposition has a complex basis");
  return vectors_real_;
}

SpectralDecomposition decompose(const ShiftOperator& s) {
  if (s.size() < 1) throw std::invalid_argument("decompose: empty shift");
  DecompositionParts parts;
  if (s.kind() == ShiftKind::directed_cycle_adjacency) {
    parts = decompose_cycle(s);
  } else if (s.is_symmetric(1e-12)) {
    parts = decompose_symmetric(s);
  } else {
    throw std::invalid_argument(
        "decompose: non-symmetric shifts other than the directed cycle are "
        "not supported");
  }
  SpectralDecomposition d;
  d.lambda_ = std::move(parts.lambda);
  d.vectors_ = std::move(parts.vectors);
  d.vectors_real_ = std::move(parts.vectors_real);
  d.v1_ = std::move(parts.v1);
  d.lambda1_ = parts.lambda1;
  d.real_ = parts.real;
  d.source_kind_ = s.kind();
  return d;
}

Eigen::VectorXcd gft(const SpectralDecomposition& d, const Eigen::VectorXd& x) {
  if (x.size() != d.size()) throw std::invalid_argument("gft: size mismatch");
  if (d.real())
    return (d.eigenvectors_real().transpose() * x).cast<std::complex<double>>();
  return d.eigenvectors().adjoint() * x.cast<std::complex<double>>();
}

Eigen::VectorXcd gft(const SpectralDecomposition& d, const Eigen::VectorXcd& x) {
  if (x.size() != d.size()) throw std::invalid_argument("gft: size mismatch");
  return d.eigenvectors().adjoint() * x;
}

Eigen::VectorXcd igft(const SpectralDecomposition& d,
                      const Eigen::VectorXcd& xt) {
  if (xt.size() != d.size()) throw std::invalid_argument("igft: size mismatch");
  return d.eigenvectors() * xt;
}

Eigen::VectorXd igft_real(const SpectralDecomposition& d,
                          const Eigen::VectorXcd& xt, double tol) {
  Eigen::VectorXcd x = igft(d, xt);
  double scale = std::max(1.0, x.norm());
  if (x.imag().norm() > tol * scale)
    throw std::invalid_argument(
        "igft_real: spectral coefficients do not describe a real signal");
  return x.real();
}

double total_variation(const ShiftOperator& s, double lambda1,
                       const Eigen::VectorXd& x) {
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("total_variation: lambda1 must be positive");
  if (x.size() != s.size())
    throw std::invalid_argument("total_variation: size mismatch");
  return (x - s.apply(x) / lambda1).lpNorm<1>();
}

const char* regime_name(SpectrumRegimeKind k) {
  switch (k) {
    case SpectrumRegimeKind::lambda1_equal_one: return "lambda1_equal_one";
    case SpectrumRegimeKind::lambda1_above_one: return "lambda1_above_one";
    case SpectrumRegimeKind::lambda1_below_one: return "lambda1_below_one";
  }
  return "unknown";
}

SpectrumRegime classify_spectrum(const SpectralDecomposition& d,
                                 double ratio_threshold) {
  const int n = d.size();
  if (!(d.lambda1() > 0.0))
    throw std::invalid_argument("classify_spectrum: lambda1 must be positive");
  SpectrumRegime r;
  r.lambda1 = d.lambda1();
  if (std::abs(r.lambda1 - 1.0) <= 1e-12)
    r.regime = SpectrumRegimeKind::lambda1_equal_one;
  else
    r.regime = r.lambda1 > 1.0 ? SpectrumRegimeKind::lambda1_above_one
                               : SpectrumRegimeKind::lambda1_below_one;
  r.ratios.resize(n - 1);
  for (int i = 1; i < n; ++i) {
    r.ratios(i - 1) = std::abs(d.eigenvalues()(i)) / r.lambda1;
    if (r.ratios(i - 1) >= ratio_threshold) r.flagged.push_back(i + 1);
  }
  r.perron_near_degenerate =
      n >= 2 && r.lambda1 - std::abs(d.eigenvalues()(1)) <= 1e-12 * r.lambda1;
  return r;
}

nlohmann::json decomposition_to_json(const SpectralDecomposition& d,
                                     bool include_vectors) {
  nlohmann::json j;
  nlohmann::json lam = nlohmann::json::array();
  for (int i = 0; i < d.size(); ++i)
    lam.push_back({d.eigenvalues()(i).real(), d.eigenvalues()(i).imag()});
  j["eigenvalues"] = std::move(lam);
  j["lambda1"] = d.lambda1();
  nlohmann::json v1 = nlohmann::json::array();
  for (int i = 0; i < d.size(); ++i) v1.push_back(d.perron_vector()(i));
  j["v1"] = std::move(v1);
  if (include_vectors) {
    nlohmann::json cols = nlohmann::json::array();
    for (int c = 0; c < d.size(); ++c) {
      nlohmann::json col = nlohmann::json::array();
      for (int r = 0; r < d.size(); ++r)
        col.push_back({d.eigenvectors()(r, c).real(),
                       d.eigenvectors()(r, c).imag()});
      cols.push_back(std::move(col));
    }
    j["vectors"] = std::move(cols);
  }
  return j;
}

}  // namespace ergograph
