#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/roughlift.hpp"

using namespace roughheat;
using rh_test::vec;

TEST_CASE("lift of a straight line") {
  const Eigen::VectorXd v = vec({0.6, -1.1});
  const auto x = lift_grid_path(rh_test::line_path(v, 8), 3);
  CHECK(max_abs_diff(x.prefix(8), segment_signature(v, 3)) < 1e-14);
  CHECK(x.prefix(8).at(0, 1) == doctest::Approx(v[0] * v[1] / 2));
  CHECK(x.prefix(8).at(1, 1, 0) == doctest::Approx(v[1] * v[1] * v[0] / 6));
}

TEST_CASE("unit square loop encloses area one") {
  Eigen::MatrixXd v(5, 2);
  v << 0, 0, 1, 0, 1, 1, 0, 1, 0, 0;
  const auto x = lift_grid_path(GridPath(uniform_grid(4), v), 2);
  const auto& S = x.prefix(4);
  CHECK(std::abs(S.at(0)) < 1e-15);
  CHECK(std::abs(S.at(1)) < 1e-15);
  CHECK(0.5 * (S.at(0, 1) - S.at(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("zero path lifts to identities") {
  const auto x = lift_grid_path(rh_test::line_path(vec({0.0, 0.0}), 4), 3);
  for (int k = 0; k <= 4; ++k) CHECK(max_abs_diff(x.prefix(k), identity_signature(2, 3)) == 0.0);
}

TEST_CASE("prefixes satisfy Chen and are group-like") {
  RandomStream rng(21, 0);
  const auto x = lift_grid_path(rh_test::random_polyline(rng, 32, 3, 1.0), 3);
  for (int k = 0; k < 32; ++k) {
    CHECK(max_abs_diff(x.prefix(k + 1), chen_mul(x.prefix(k), x.cell(k))) < 1e-10);
    const auto& S = x.prefix(k + 1);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(S.at(i, j) + S.at(j, i) == doctest::Approx(S.at(i) * S.at(j)));
  }
  CHECK(max_abs_diff(x.increment(5, 20), chen_mul(inverse(x.prefix(5)), x.prefix(20))) < 1e-12);
}

TEST_CASE("pairing with time") {
  const double v = 0.8, c = 1.5;
  const auto x = lift_grid_path(rh_test::line_path(vec({v}), 16), 2);
  const auto zero = pair_with_time(x, 0.0).prefix(16);
  CHECK(zero.at(1) == 0.0);
  CHECK(zero.at(0, 1) == 0.0);
  CHECK(zero.at(1, 0) == 0.0);
  const auto S = pair_with_time(x, c).prefix(16);
  CHECK(S.at(1) == doctest::Approx(c));
  CHECK(S.at(1, 1) == doctest::Approx(c * c / 2));
  // int_0^1 lambda_t dx_t with lambda_t = c t and dx = v dt
  CHECK(S.at(1, 0) == doctest::Approx(c * v / 2));
}

TEST_CASE("Young translation") {
  RandomStream rng(22, 0);
  const auto x = rh_test::random_polyline(rng, 16, 2, 0.5);
  const auto g = rh_test::random_polyline(rng, 16, 2, 0.5);
  const auto zero = rh_test::line_path(vec({0.0, 0.0}), 16);
  const auto lg = lift_grid_path(g, 3), lx = lift_grid_path(x, 3);

  const auto from_zero = young_translate(lift_grid_path(zero, 3), g);
  const auto unchanged = young_translate(lx, zero);
  const auto shifted = young_translate(lx, g);
  const auto direct = lift_grid_path(x + g, 3);
  for (int k = 0; k <= 16; ++k) {
    CHECK(max_abs_diff(from_zero.prefix(k), lg.prefix(k)) < 1e-12);
    CHECK(max_abs_diff(unchanged.prefix(k), lx.prefix(k)) < 1e-12);
    CHECK(max_abs_diff(shifted.prefix(k), direct.prefix(k)) < 1e-8);
    for (int i = 0; i < 2; ++i) CHECK(shifted.prefix(k).at(i) == doctest::Approx(x.values(k, i) + g.values(k, i)));
  }
}

TEST_CASE("translations compose") {
  RandomStream rng(23, 0);
  const auto x = lift_grid_path(rh_test::random_polyline(rng, 16, 2, 0.5), 3);
  const auto g1 = rh_test::random_polyline(rng, 16, 2, 0.3);
  const auto g2 = rh_test::random_polyline(rng, 16, 2, 0.3);
  const auto twice = young_translate(young_translate(x, g1), g2);
  const auto once = young_translate(x, g1 + g2);
  CHECK(max_abs_diff(twice.prefix(16), once.prefix(16)) < 1e-6);
}
