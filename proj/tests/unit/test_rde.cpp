#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/rde.hpp"
#include "roughheat/vector_fields.hpp"

using namespace roughheat;
using rh_test::vec;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kDiagnostic;
}

CMElement bump(const Hurst& h, int d, double scale) {
  Eigen::MatrixXd c(d, 2);
  for (int i = 0; i < d; ++i) c(i, 0) = scale * (i + 1), c(i, 1) = -0.5 * scale;
  return CMElement(h, {0.5, 1.0}, c);
}

}  // namespace

TEST_CASE("zero driver without drift keeps the state and identity flows") {
  const auto vf = make_heisenberg();
  const Eigen::VectorXd a = vec({0.3, -0.2, 1.1});
  const auto drv = pair_with_time(lift_grid_path(rh_test::line_path(vec({0.0, 0.0}), 16), 2), 1.0);
  const auto sol = solve_rde(*vf, a, drv);
  for (int k = 0; k <= 16; ++k) {
    CHECK((sol.y.row(k).transpose() - a).norm() == 0.0);
    CHECK((sol.J[k] - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
    CHECK((sol.K[k] - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  }
}

TEST_CASE("Heisenberg scheme reproduces the closed-form solution") {
  RandomStream rng(31, 0);
  const auto vf = make_heisenberg();
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = rh_test::random_polyline(rng, 32, 2, 0.5);
    const Eigen::VectorXd a = vec({rng.normal(), rng.normal(), rng.normal()});
    const auto rp = lift_grid_path(x, 2);
    const auto sol = solve_rde(*vf, a, pair_with_time(rp, 0.0));
    for (int k = 0; k <= 32; ++k) {
      const auto& S = rp.prefix(k);
      const double y3 = a[2] + 2 * (a[1] * S.at(0) - a[0] * S.at(1)) + 2 * (S.at(1, 0) - S.at(0, 1));
      CHECK(std::abs(sol.y(k, 2) - y3) <= 1e-10);
      CHECK(std::abs(sol.y(k, 0) - a[0] - S.at(0)) <= 1e-12);
    }
  }
}

TEST_CASE("Jacobian and inverse Jacobian stay inverse") {
  RandomStream rng(32, 0);
  const auto vf = make_lognormal(0.7, 0.2, true);
  const auto sol = solve_rde(*vf, vec({1.0}), pair_with_time(lift_grid_path(rh_test::random_polyline(rng, 64, 1, 1.0), 3), 1.0));
  for (int k = 0; k <= 64; ++k) CHECK(sol.J[k](0, 0) * sol.K[k](0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("blow-up is reported with the cell index") {
  const auto vf = parse_polynomial_field("n = 1\nd = 1\nV1 = y1^2\n", "quadratic");
  const auto drv = pair_with_time(lift_grid_path(rh_test::line_path(vec({50.0}), 64), 3), 0.0);
  CHECK(kind_of([&] { solve_rde(*vf, vec({1.0}), drv); }) == ErrorKind::kBlowUp);
}

TEST_CASE("scaled shifted solve at the endpoints of its parameter range") {
  const Hurst h(2, 5);
  const auto vf = make_heisenberg();
  const Eigen::VectorXd a = vec({0.1, 0.2, 0.3});
  const auto gamma = bump(h, 2, 0.8);
  FbmSampler s(FbmSpec(h, 2, 32));
  const auto w = lift_grid_path(s.path(3, 0), 2);

  const auto at_zero = solve_scaled_shifted(*vf, a, w, gamma, 0.0, h);
  const auto sk = solve_skeleton(*vf, a, gamma, uniform_grid(32), 2);
  CHECK((at_zero.endpoint() - sk.endpoint()).cwiseAbs().maxCoeff() <= 1e-12);

  const auto plain = solve_scaled_shifted(*vf, a, w, CMElement::zero(h, 2, {1.0}), 1.0, h);
  const auto direct = solve_rde(*vf, a, pair_with_time(w, 1.0));
  CHECK((plain.y - direct.y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("skeleton with zero control stays at the start") {
  const auto sk = solve_skeleton(*make_heisenberg(), vec({1.0, 2.0, 3.0}), CMElement::zero(Hurst(1, 2), 2, {1.0}),
                                 uniform_grid(16), 2);
  for (int k = 0; k <= 16; ++k) CHECK((sk.y.row(k).transpose() - vec({1.0, 2.0, 3.0})).norm() == 0.0);
}

TEST_CASE("skeleton gradient") {
  const Hurst h(2, 5);
  const auto grid = uniform_grid(32);
  SolveOptions sens;
  sens.sensitivity = true;
  SUBCASE("unit diffusion gives a constant integrand") {
    const auto sk = solve_skeleton(*make_bridge1d(), vec({0.0}), bump(h, 1, 1.0), grid, 2, sens);
    for (const auto& A : skeleton_gradient(sk)) CHECK(A(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("directional derivative has second-order error") {
    const auto vf = make_heisenberg();
    const Eigen::VectorXd a = vec({0.0, 0.0, 0.0});
    const auto g = bump(h, 2, 1.0);
    Eigen::MatrixXd hc(2, 2);
    hc << 0.3, -0.2, 0.5, 0.4;
    const CMElement dir(h, {0.5, 1.0}, hc);
    const auto A = skeleton_gradient(solve_skeleton(*vf, a, g, grid, 2, sens));
    const Eigen::VectorXd lin = linear_response(A, dir.render(grid).increments());
    const Eigen::VectorXd base = solve_skeleton(*vf, a, g, grid, 2).endpoint();
    double err[2];
    int i = 0;
    for (double s : {1e-2, 1e-3}) {
      const CMElement moved(h, {0.5, 1.0}, g.coeffs + s * hc);
      err[i++] = (solve_skeleton(*vf, a, moved, grid, 2).endpoint() - base - s * lin).norm();
    }
    CHECK(err[1] <= 0.02 * err[0] + 1e-13);
    // first component is the first coordinate of h at time one
    CHECK(lin[0] == doctest::Approx(dir.eval(1.0)[0]));
  }
}

TEST_CASE("expansion terms") {
  const Hurst h(2, 5);
  const double sigma = 0.5;
  const auto vf = make_lognormal(sigma);
  FbmSampler s(FbmSpec(h, 1, 32));
  const auto w = s.path(8, 0);
  const auto x = lift_grid_path(w, 2);

  SUBCASE("frozen coefficients at zero control") {
    const auto t = expansion_terms(*vf, vec({1.0}), CMElement::zero(h, 1, {1.0}), x, h, 1.0);
    REQUIRE(t.kappas.size() >= 2);
    CHECK(t.kappas[1].value == doctest::Approx(1.0));
    for (int k = 0; k <= 32; ++k) {
      CHECK(t.phi[0].values(k, 0) == doctest::Approx(1.0));
      CHECK(t.phi[1].values(k, 0) == doctest::Approx(sigma * w.values(k, 0)));
    }
  }
  SUBCASE("zeroth term is the skeleton and the lognormal first term is explicit") {
    const auto g = bump(h, 1, 0.7);
    const auto t = expansion_terms(*vf, vec({1.0}), g, x, h, 1.0);
    const auto sk = solve_skeleton(*vf, vec({1.0}), g, uniform_grid(32), 2);
    CHECK((t.phi[0].values - sk.y).cwiseAbs().maxCoeff() <= 1e-9);
    // y = exp(sigma (eps w + gamma)) so phi^1 = sigma w exp(sigma gamma)
    const auto gr = g.render(uniform_grid(32));
    for (int k = 0; k <= 32; ++k)
      CHECK(t.phi[1].values(k, 0) ==
            doctest::Approx(sigma * w.values(k, 0) * std::exp(sigma * gr.values(k, 0))).epsilon(1e-4));
  }
  SUBCASE("remainder vanishes at eps = 0") {
    const auto r = remainder(*vf, vec({1.0}), bump(h, 1, 0.7), x, 0.0, 1, h);
    CHECK(r.values.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("high orders need analytic derivatives") {
    const FdField fd("fd-lognormal", 1, 1, false, [&](int i, const Eigen::VectorXd& y) {
      return i == 0 ? Eigen::VectorXd::Zero(1).eval() : (sigma * y).eval();
    });
    const Hurst half(1, 2);
    const auto xh = lift_grid_path(FbmSampler(FbmSpec(half, 1, 16)).path(1, 0), 2);
    CHECK(kind_of([&] { expansion_terms(fd, vec({1.0}), CMElement::zero(half, 1, {1.0}), xh, half, 4.0); }) ==
          ErrorKind::kCapability);
  }
}
