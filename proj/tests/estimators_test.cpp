#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "ergograph/estimators.hpp"
#include "ergograph/graph.hpp"
#include "ergograph/spectral.hpp"

using namespace ergograph;
using namespace std::complex_literals;

namespace {

ShiftOperator k3_shift() {
  return adjacency_shift(
      Graph{3, false, {{1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}}});
}

Eigen::VectorXd randn(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = normal(rng);
  return x;
}

}  // namespace

TEST_CASE("triangle shift average, depth 3: hand-computed (13, 14, 15)/7") {
  ShiftOperator s = k3_shift();
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  Eigen::VectorXd avg = graph_shift_average(s, 2.0, x, 3);
  CHECK(avg(0) == doctest::Approx(13.0 / 7.0).epsilon(1e-14));
  CHECK(avg(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(avg(2) == doctest::Approx(15.0 / 7.0).epsilon(1e-14));
  // Depth 1 is the identity.
  CHECK((graph_shift_average(s, 2.0, x, 1) - x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(graph_shift_average(s, 2.0, x, 0), std::invalid_argument);
  CHECK_THROWS_AS(graph_shift_average(s, 0.0, x, 3), std::invalid_argument);
}

TEST_CASE("deep diffusion on a hot spectrum stays normalized") {
  Rng rng(89);
  Graph g = erdos_renyi(40, 0.3, rng);
  ShiftOperator s = adjacency_shift(g);
  SpectralDecomposition d = decompose(s);
  Eigen::VectorXd x = randn(40, rng);
  // lambda1 ~ 12, so the raw numerator/denominator would overflow long
  // before depth 1000; the running normalization must not.
  Eigen::VectorXd avg = graph_shift_average(s, d.lambda1(), x, 1000);
  CHECK(avg.allFinite());
  // The v1 component passes with unit gain at every depth and the rest decays
  // geometrically, so the deep limit is the Perron projection.
  Eigen::VectorXd limit = d.perron_vector() * d.perron_vector().dot(x);
  CHECK((avg - limit).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("shift average equals the all-ones polynomial filter") {
  Rng rng(97);
  Graph g = erdos_renyi(15, 0.35, rng);
  ShiftOperator s = adjacency_shift(g);
  SpectralDecomposition d = decompose(s);
  Eigen::VectorXd x = randn(15, rng);
  for (int depth : {1, 2, 5, 15}) {
    FilterSpec ones{Eigen::VectorXd::Ones(depth), std::nullopt};
    Eigen::VectorXd via_filter = filtered_estimator(d, ones, x);
    Eigen::VectorXd via_recurrence = graph_shift_average(s, d.lambda1(), x, depth);
    CHECK((via_filter - via_recurrence).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  // Same identity on a complex (cycle) basis.
  ShiftOperator cyc = adjacency_shift(directed_cycle(8));
  SpectralDecomposition dc = decompose(cyc);
  Eigen::VectorXd xc = randn(8, rng);
  FilterSpec ones{Eigen::VectorXd::Ones(6), std::nullopt};
  CHECK((filtered_estimator(dc, ones, xc) - graph_shift_average(cyc, 1.0, xc, 6))
            .lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("all-pass response returns the input") {
  Rng rng(101);
  Graph g = erdos_renyi(12, 0.4, rng);
  SpectralDecomposition d = decompose(adjacency_shift(g));
  Eigen::VectorXd x = randn(12, rng);
  FilterSpec all_pass{std::nullopt, Eigen::VectorXcd::Ones(12)};
  CHECK((filtered_estimator(d, all_pass, x) - x).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("optimal estimator is the Perron projection") {
  Rng rng(103);
  Graph g = erdos_renyi(14, 0.4, rng);
  SpectralDecomposition d = decompose(adjacency_shift(g));
  Eigen::VectorXd x = randn(14, rng);
  Eigen::VectorXd z = optimal_mse_estimator(d, x);
  CHECK((z - d.perron_vector() * d.perron_vector().dot(x))
            .lpNorm<Eigen::Infinity>() == 0.0);
  // Same result through the spectral-response path e_1.
  FilterSpec spike = optimal_logdet_response(14, 4.0);
  CHECK((filtered_estimator(d, spike, x) - z).lpNorm<Eigen::Infinity>() < 1e-12);
  // Fixed point: a signal already aligned with v1 passes through.
  Eigen::VectorXd aligned = 2.5 * d.perron_vector();
  CHECK((optimal_mse_estimator(d, aligned) - aligned).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("log-det response concentrates the budget at the Perron frequency") {
  FilterSpec f = optimal_logdet_response(5, 9.0);
  REQUIRE(f.freq_response);
  CHECK((*f.freq_response)(0) == 3.0);
  for (int i = 1; i < 5; ++i) CHECK((*f.freq_response)(i) == 0.0);
  CHECK_THROWS_AS(optimal_logdet_response(5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_logdet_response(0, 1.0), std::invalid_argument);
}

TEST_CASE("filter normalization rejects a dead Perron frequency") {
  SpectralDecomposition d = decompose(k3_shift());
  Eigen::VectorXcd dead = Eigen::VectorXcd::Ones(3);
  dead(0) = 0.0;
  CHECK_THROWS_AS(
      filtered_estimator(d, FilterSpec{std::nullopt, dead}, Eigen::VectorXd::Ones(3)),
      std::invalid_argument);
  CHECK_THROWS_AS(validate_filter(FilterSpec{}), std::invalid_argument);
}

TEST_CASE("frequency response evaluates the tap polynomial") {
  Eigen::VectorXd taps(3);
  taps << 1.0, 2.0, 3.0;
  Eigen::VectorXcd lam(2);
  lam << 2.0, 1.0i;
  Eigen::VectorXcd h = frequency_response(taps, lam);
  CHECK(std::abs(h(0) - 17.0) < 1e-14);
  CHECK(std::abs(h(1) - (-2.0 + 2.0i)) < 1e-14);
}

TEST_CASE("tap synthesis inverts the spectral Vandermonde system") {
  Graph path{3, false, {{1, 2, 1.0}, {2, 3, 1.0}}};
  SpectralDecomposition d = decompose(adjacency_shift(path));
  Eigen::VectorXcd target(3);
  target << 1.0, 0.25, -0.5;
  TapSynthesis syn = synthesize_taps(d.eigenvalues(), target);
  CHECK(syn.residual < 1e-12);
  CHECK_FALSE(syn.ill_conditioned);
  Eigen::VectorXcd back = frequency_response(syn.taps, d.eigenvalues());
  CHECK((back - target).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tap synthesis rejects degenerate or complex-tap targets") {
  SpectralDecomposition k3 = decompose(k3_shift());
  Eigen::VectorXcd target = Eigen::VectorXcd::Ones(3);
  // Repeated eigenvalue -1 sits at spectral indices 2 and 3.
  CHECK_THROWS_WITH_AS(synthesize_taps(k3.eigenvalues(), target),
                       doctest::Contains("indices 2 and 3"),
                       std::invalid_argument);

  Eigen::VectorXcd lam(2);
  lam << 1.0, -1.0;
  Eigen::VectorXcd needs_complex(2);
  needs_complex << 1.0i, 1.0i;
  CHECK_THROWS_AS(synthesize_taps(lam, needs_complex), std::invalid_argument);
}

TEST_CASE("filter json round trip") {
  Eigen::VectorXd taps(2);
  taps << 0.5, -1.5;
  Eigen::VectorXcd fr(2);
  fr << 1.0 + 2.0i, -3.0;
  FilterSpec f{taps, fr};
  FilterSpec back = filter_from_json(filter_to_json(f));
  REQUIRE(back.taps);
  REQUIRE(back.freq_response);
  CHECK((*back.taps - taps).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((*back.freq_response - fr).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(filter_from_json(nlohmann::json::object()),
                  std::invalid_argument);
}
