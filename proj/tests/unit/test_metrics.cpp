#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/metrics.hpp"

using namespace roughheat;
using rh_test::vec;

namespace {

RoughPathGrid scalar_path(std::vector<double> v, int depth = 2) {
  const int M = static_cast<int>(v.size()) - 1;
  Eigen::MatrixXd m(M + 1, 1);
  for (int k = 0; k <= M; ++k) m(k, 0) = v[k];
  return lift_grid_path(GridPath(uniform_grid(M), m), depth);
}

}  // namespace

TEST_CASE("p-variation of a monotone path is its total increment") {
  const auto x = scalar_path({0.0, 0.1, 0.5, 0.6, 1.7});
  for (double p : {1.0, 2.0, 3.5}) CHECK(pvar_norm(x, 1, p) == doctest::Approx(1.7));
}

TEST_CASE("1-variation of a zigzag is the total variation") {
  CHECK(pvar_norm(scalar_path({0.0, 1.0, 0.0, 1.0}), 1, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("dynamic programme matches brute force over all partitions") {
  RandomStream rng(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = lift_grid_path(rh_test::random_polyline(rng, 6, 2, 1.0), 2);
    const double p = 2.5;
    double best = 0.0;
    for (int mask = 0; mask < 32; ++mask) {
      int prev = 0;
      double acc = 0.0;
      for (int k = 1; k <= 6; ++k) {
        if (k < 6 && !(mask & (1 << (k - 1)))) continue;
        acc += std::pow(level_norm(x.increment(prev, k), 1), p);
        prev = k;
      }
      best = std::max(best, acc);
    }
    CHECK(pvar_norm(x, 1, p) == doctest::Approx(std::pow(best, 1.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("p-variation does not decrease on larger intervals") {
  RandomStream rng(4, 0);
  const auto x = lift_grid_path(rh_test::random_polyline(rng, 16, 2, 1.0), 2);
  CHECK(pvar_norm(x, 1, 2.5, 0.25, 0.5) <= pvar_norm(x, 1, 2.5, 0.125, 0.75) + 1e-15);
  CHECK(pvar_norm(x, 2, 2.5, 0.25, 0.5) <= pvar_norm(x, 2, 2.5, 0.0, 1.0) + 1e-15);
}

TEST_CASE("off-grid interval endpoints are rejected") {
  const auto x = scalar_path({0.0, 1.0, 0.0, 1.0});
  CHECK_THROWS_AS(pvar_norm(x, 1, 2.0, 0.1, 1.0), Error);
}

TEST_CASE("Holder norm of a line is its speed") {
  const auto x = lift_grid_path(rh_test::line_path(vec({3.0, 4.0}), 16), 2);
  CHECK(holder_norm(x, 1, 1.0) == doctest::Approx(5.0));
  CHECK(holder_norm(lift_grid_path(rh_test::line_path(vec({0.0, 0.0}), 16), 2), 1, 0.5) == 0.0);
}

TEST_CASE("norms are homogeneous under dilation") {
  RandomStream rng(5, 0);
  const auto x = lift_grid_path(rh_test::random_polyline(rng, 16, 2, 1.0), 2);
  const double c = -1.7;
  const auto y = dilate(x, c);
  for (int i = 1; i <= 2; ++i) {
    const double f = std::pow(std::abs(c), i);
    CHECK(holder_norm(y, i, 0.4) == doctest::Approx(f * holder_norm(x, i, 0.4)));
    CHECK(pvar_norm(y, i, 2.5) == doctest::Approx(f * pvar_norm(x, i, 2.5)));
    CHECK(besov_norm(y, i, 0.4, 6.0) == doctest::Approx(f * besov_norm(x, i, 0.4, 6.0)));
  }
}

TEST_CASE("Besov norm of a line matches the analytic double integral") {
  const double alpha = 0.3, m = 12.0;
  const auto x = lift_grid_path(rh_test::line_path(vec({1.0}), 32), 2);
  // int_{s<t} (t-s)^{m-1-alpha m} = 1 / ((m - alpha m)(m - alpha m + 1))
  const double e = m - alpha * m;
  const double oracle = std::pow(1.0 / (e * (e + 1.0)), 1.0 / m);
  CHECK(std::abs(besov_norm(x, 1, alpha, m) / oracle - 1.0) < 0.01);
  CHECK(besov_norm(lift_grid_path(rh_test::line_path(vec({0.0}), 32), 2), 1, alpha, m) == 0.0);
}

TEST_CASE("greedy partition count") {
  CHECK(greedy_count(scalar_path(std::vector<double>(33, 0.7)), 2.0, 0.01) == 0);
  const auto line = lift_grid_path(rh_test::line_path(vec({1.0}), 100), 2);
  CHECK(greedy_count(ControlEvaluator(line, 2.0, 1), 0.09) == 3);
  const ControlEvaluator full(line, 2.0);
  CHECK(greedy_count(full, full(0, 100)) == 0);
  CHECK(greedy_count(full, 2.0 * full(0, 100)) == 0);
}

TEST_CASE("control is superadditive and bounds the greedy count") {
  RandomStream rng(6, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = lift_grid_path(rh_test::random_polyline(rng, 24, 2, 1.0), 2);
    const ControlEvaluator w(x, 2.5);
    for (int s = 0; s <= 24; ++s)
      for (int u = s; u <= 24; ++u)
        for (int t = u; t <= 24; ++t) CHECK(w(s, u) + w(u, t) <= w(s, t) * (1 + 1e-12) + 1e-15);
    for (double delta : {0.01, 0.05, 0.2, 1.0}) CHECK(delta * greedy_count(w, delta) <= w(0, 24) + 1e-12);
  }
}
