#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/fgauss.hpp"

using namespace roughheat;

TEST_CASE("fBm covariance") {
  for (double H : {0.3, 0.4, 0.5, 0.7}) {
    CHECK(fbm_cov(1.0, 1.0, H) == doctest::Approx(1.0));
    CHECK(fbm_cov(0.3, 0.3, H) == doctest::Approx(std::pow(0.3, 2 * H)));
  }
  CHECK(fbm_cov(0.25, 0.75, 0.5) == doctest::Approx(0.25));
  CHECK(fbm_cov(0.9, 0.2, 0.5) == doctest::Approx(0.2));
}

TEST_CASE("Hurst parsing keeps rational forms") {
  const auto h = Hurst::parse("2/5");
  CHECK(h.value == doctest::Approx(0.4));
  REQUIRE(h.rational.has_value());
  CHECK(h.to_string() == "2/5");
  CHECK(h.depth() == 2);
  CHECK(Hurst::parse("0.3").depth() == 3);
  CHECK_THROWS_AS(Hurst::parse("1.5"), Error);
  CHECK_THROWS_AS(Hurst::parse("abc"), Error);
}

TEST_CASE("Cameron-Martin norm of multiples of R(1, .)") {
  const Hurst h(2, 5);
  std::vector<double> knots{0.25, 0.5, 1.0};
  for (double xi : {1.0, -2.5}) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 3);
    c(0, 2) = xi;
    CHECK(cm_norm_sq(CMElement(h, knots, c)) == doctest::Approx(xi * xi));
  }
  CHECK(cm_norm_sq(CMElement::zero(h, 2, knots)) == 0.0);
}

TEST_CASE("increment-Gram inner product reproduces the covariance") {
  const Hurst h(3, 10);
  const int M = 16;
  const auto gram = increment_gram(FbmSpec(h, 1, M));
  auto indicator = [&](int k) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(M, 1);
    f.topRows(k).setOnes();
    return f;
  };
  CHECK(htilde_inner(indicator(M), indicator(M), gram) == doctest::Approx(1.0));
  CHECK(htilde_inner(indicator(4), indicator(12), gram) == doctest::Approx(fbm_cov(0.25, 0.75, h.value)));

  // H = 1/2: plain L2 pairing of step functions
  const auto bm = increment_gram(FbmSpec(Hurst(1, 2), 1, M));
  RandomStream rng(9, 0);
  Eigen::MatrixXd f(M, 1), g(M, 1);
  for (int k = 0; k < M; ++k) f(k, 0) = rng.normal(), g(k, 0) = rng.normal();
  CHECK(htilde_inner(f, g, bm) == doctest::Approx(f.col(0).dot(g.col(0)) / M));
  CHECK(htilde_inner(f, f, gram) >= 0.0);
}

TEST_CASE("step functions and kernel elements carry the same norm") {
  const Hurst h(2, 5);
  const int M = 8;
  const auto grid = uniform_grid(M);
  std::vector<double> knots(grid.begin() + 1, grid.end());
  RandomStream rng(10, 0);
  Eigen::MatrixXd a(1, M);
  for (int k = 0; k < M; ++k) a(0, k) = rng.normal();
  // f = sum_k a_k 1_[0, t_k] as cell values
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(M, 1);
  for (int k = 0; k < M; ++k) f.topRows(k + 1).array() += a(0, k);
  const double lhs = htilde_inner(f, f, increment_gram(FbmSpec(h, 1, M)));
  CHECK(std::abs(lhs - cm_norm_sq(CMElement(h, knots, a))) < 1e-10);
}

TEST_CASE("Paley-Wiener pairing") {
  const Hurst h(2, 5);
  FbmSampler s(FbmSpec(h, 1, 64));
  const auto w = s.path(5, 0);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 1);
  c(0, 0) = 1.0;
  CHECK(paley_wiener(CMElement(h, {1.0}, c), w) == doctest::Approx(w.values(64, 0)));
  CHECK(paley_wiener(CMElement::zero(h, 1, {1.0}), w) == 0.0);
}

TEST_CASE("sampler variance and Paley-Wiener isometry by Monte Carlo") {
  const Hurst h(2, 5);
  const int n = 20000;
  const auto paths = sample_fbm(FbmSpec(h, 1, 32), n, 12);
  Eigen::MatrixXd c(1, 2);
  c << 0.7, -0.4;
  const CMElement g(h, {0.5, 1.0}, c);
  const double target = cm_norm_sq(g);
  double v1 = 0.0, v2 = 0.0;
  for (const auto& p : paths) {
    v1 += p.values(32, 0) * p.values(32, 0);
    const double pw = paley_wiener(g, p);
    v2 += pw * pw;
  }
  v1 /= n;
  v2 /= n;
  CHECK(std::abs(v1 - 1.0) <= 4 * std::sqrt(2.0 / n));
  CHECK(std::abs(v2 - target) <= 4 * target * std::sqrt(2.0 / n));
}

TEST_CASE("sampling does not depend on the worker count") {
  const FbmSpec spec(Hurst(3, 10), 2, 32);
  const auto a = sample_fbm(spec, 50, 77, 1);
  const auto b = sample_fbm(spec, 50, 77, 3);
  for (int i = 0; i < 50; ++i) CHECK((a[i].values - b[i].values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Volterra factor") {
  const auto bm = volterra_checks(Hurst(1, 2), 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j <= i; ++j) CHECK(bm.kernel(i, j) == doctest::Approx(std::sqrt(1.0 / 16)));
  CHECK(bm.reconstruction_residual <= 1e-10);
  const auto r = volterra_checks(Hurst(2, 5), 256);
  CHECK(r.reconstruction_residual <= 1e-8);
  CHECK(r.corner == doctest::Approx(1.0));
}
