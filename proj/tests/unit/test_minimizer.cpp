#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/minimizer.hpp"
#include "roughheat/vector_fields.hpp"

using namespace roughheat;
using rh_test::vec;

namespace {

double sup_error(const CMElement& g, int coord, double scale, const Hurst& h) {
  double e = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = k / 200.0;
    e = std::max(e, std::abs(g.eval(t)[coord] - scale * fbm_cov(1.0, t, h.value)));
  }
  return e;
}

}  // namespace

TEST_CASE("Heisenberg minimizer is a multiple of R(1, .)") {
  for (const Hurst& h : {Hurst(7, 20), Hurst(1, 2)}) {
    const auto r = minimize_energy(*make_heisenberg(), Eigen::VectorXd::Zero(3), vec({1.0, 0.5, 0.0}), h);
    CHECK(r.converged);
    CHECK(sup_error(r.gamma_bar, 0, 1.0, h) <= 1e-3);
    CHECK(sup_error(r.gamma_bar, 1, 0.5, h) <= 1e-3);
    CHECK(r.energy == doctest::Approx(0.625).epsilon(1e-4));
    CHECK(r.constraint_residual <= 1e-8);
    CHECK_FALSE(r.rank_deficient);
  }
}

TEST_CASE("rotated Heisenberg target has multiplier along the first axis") {
  const double xi = 1.2;
  const auto r = minimize_energy(*make_heisenberg(), Eigen::VectorXd::Zero(3), vec({xi, 0.0, 0.0}), Hurst(2, 5));
  CHECK((r.nu_bar - vec({xi, 0.0, 0.0})).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("one-dimensional bridge") {
  const Hurst h(2, 5);
  const double xi = -0.8;
  auto r = minimize_energy(*make_bridge1d(), vec({0.0}), vec({xi}), h);
  CHECK(sup_error(r.gamma_bar, 0, xi, h) <= 1e-3);
  CHECK(r.energy == doctest::Approx(xi * xi / 2).epsilon(1e-6));
  CHECK(r.nu_bar[0] == doctest::Approx(xi).epsilon(1e-6));
  CHECK(r.Q_at_min.m(0, 0) == doctest::Approx(1.0));

  const auto m = multiplier_identity_check(r, 200, 3);
  CHECK(m.max_residual <= 1e-8);

  const auto hc = hessian_check(*make_bridge1d(), r, 4, 5);
  for (double s : hc.second_differences) CHECK(s > 0.0);
  CHECK(hc.min_second_difference > 0.0);
  for (double q : hc.doubled_ratio) CHECK(q == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("lognormal reduces to the bridge") {
  const Hurst h(2, 5);
  const double sigma = 0.5;
  const auto r = minimize_energy(*make_lognormal(sigma), vec({1.0}), vec({1.5}), h);
  const double xi = std::log(1.5) / sigma;
  CHECK(sup_error(r.gamma_bar, 0, xi, h) <= 1e-3);
  CHECK(r.energy == doctest::Approx(xi * xi / 2).epsilon(1e-4));
}

TEST_CASE("multi-start selection is independent of the worker count") {
  MinimizerOptions o;
  o.workers = 1;
  const auto a = minimize_energy(*make_heisenberg(), Eigen::VectorXd::Zero(3), vec({0.5, 0.5, 0.2}), Hurst(2, 5), o);
  o.workers = 3;
  const auto b = minimize_energy(*make_heisenberg(), Eigen::VectorXd::Zero(3), vec({0.5, 0.5, 0.2}), Hurst(2, 5), o);
  CHECK(a.energy == b.energy);
  CHECK((a.gamma_bar.coeffs - b.gamma_bar.coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.start_energies.size() == 5);
}

TEST_CASE("target equal to the start is rejected") {
  CHECK_THROWS_AS(minimize_energy(*make_bridge1d(), vec({0.3}), vec({0.3}), Hurst(1, 2)), Error);
}
