#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/malliavin.hpp"
#include "roughheat/rde.hpp"
#include "roughheat/vector_fields.hpp"

using namespace roughheat;
using rh_test::vec;

TEST_CASE("constant unit integrand has covariance R(1,1)") {
  for (const Hurst& h : {Hurst(3, 10), Hurst(2, 5), Hurst(1, 2)}) {
    const auto gram = increment_gram(FbmSpec(h, 1, 32));
    const std::vector<Eigen::MatrixXd> A(32, Eigen::MatrixXd::Ones(1, 1));
    const auto Q = malliavin_Q(A, gram);
    CHECK(Q.m(0, 0) == doctest::Approx(1.0));
    CHECK(Q.min_eigenvalue() == doctest::Approx(1.0));
  }
}

TEST_CASE("covariance is symmetric and nonnegative") {
  RandomStream rng(41, 0);
  const auto gram = increment_gram(FbmSpec(Hurst(2, 5), 2, 16));
  std::vector<Eigen::MatrixXd> A(16, Eigen::MatrixXd(3, 2));
  for (auto& m : A)
    for (int i = 0; i < 6; ++i) m(i % 3, i / 3) = rng.normal();
  const auto Q = malliavin_Q(A, gram);
  CHECK(Q.symmetry_defect() <= 1e-14);
  CHECK(Q.min_eigenvalue() > 0.0);
}

TEST_CASE("reduced covariance") {
  const auto bridge = make_bridge1d();
  const auto drv = pair_with_time(lift_grid_path(rh_test::line_path(vec({0.0}), 16), 2), 0.0);
  const auto sol = solve_rde(*bridge, vec({0.0}), drv);
  CHECK(reduced_cov_C(sol, *bridge).m(0, 0) == doctest::Approx(1.0));

  RandomStream rng(42, 0);
  const auto heis = make_heisenberg();
  const auto hs = solve_rde(*heis, vec({0.2, 0.1, 0.0}),
                            pair_with_time(lift_grid_path(rh_test::random_polyline(rng, 32, 2, 1.0), 2), 0.0));
  const auto C = reduced_cov_C(hs, *heis, 0.5);
  const Eigen::VectorXd v = vec({0.3, -1.0, 0.6});
  CHECK(reduced_quadratic_form(hs, *heis, v, 0.5) == doctest::Approx(v.dot(C.m * v)).epsilon(1e-12));
}

TEST_CASE("Hormander rank") {
  const auto h = hormander_rank(*make_heisenberg(), Eigen::VectorXd::Zero(3), 1);
  REQUIRE(h.rank_by_depth.size() == 2);
  CHECK(h.rank_by_depth[0] == 2);
  CHECK(h.rank_by_depth[1] == 3);
  CHECK(h.total_rank == 3);
  CHECK(hormander_rank(*make_elliptic(3), vec({1.0, 2.0, 3.0}), 0).total_rank == 3);

  const FdField fd("fd", 1, 1, false, [](int, const Eigen::VectorXd& y) { return y; });
  CHECK_THROWS_AS(hormander_rank(fd, vec({1.0}), 4), Error);
}

TEST_CASE("eigenvalue tail of deterministic identities") {
  CovMatrix I;
  I.m = Eigen::MatrixXd::Identity(2, 2);
  const std::vector<std::vector<CovMatrix>> s{std::vector<CovMatrix>(600, I), std::vector<CovMatrix>(600, I)};
  const auto rep = eigen_tail(s, {0.5, 0.25});
  for (const auto& row : rep.rows) {
    CHECK(row.mean_inverse == doctest::Approx(1.0));
    for (double q : row.quantiles) CHECK(q == doctest::Approx(1.0));
  }
  CHECK(std::abs(rep.mu_hat) < 1e-12);
  CHECK_THROWS_AS(eigen_tail({std::vector<CovMatrix>(10, I)}, {0.5}), Error);
}
