#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/asymptotics.hpp"
#include "roughheat/error.hpp"
#include "roughheat/exponents.hpp"

using namespace roughheat;
using rh_test::vec;

namespace {

std::vector<std::string> listing(const Hurst& h, IndexSet s, double cutoff) {
  std::vector<std::string> out;
  for (const auto& e : enumerate_exponents(h, s, cutoff)) out.push_back(format_exponent(h, e));
  return out;
}

std::vector<double> values(const Hurst& h, IndexSet s, double cutoff) {
  std::vector<double> out;
  for (const auto& e : enumerate_exponents(h, s, cutoff)) out.push_back(e.value);
  return out;
}

DensityModel lognormal_model(const Hurst& h) {
  DensityModel m;
  m.id = "lognormal";
  m.vf = make_lognormal(0.5);
  m.a = vec({1.0});
  m.a_prime = vec({1.5});
  m.hurst = h;
  m.minimizer = minimize_energy(*m.vf, m.a, m.a_prime, h);
  return m;
}

}  // namespace

TEST_CASE("index sets") {
  using V = std::vector<std::string>;
  auto first7 = [](V v) { return V(v.begin(), v.begin() + std::min<std::size_t>(7, v.size())); };
  CHECK(first7(listing(Hurst(2, 5), IndexSet::kL1, 5)) == V{"0", "1", "2", "2.5", "3", "3.5", "4"});
  CHECK(first7(listing(Hurst(3, 10), IndexSet::kL1, 5)) == V{"0", "1", "2", "3", "10/3", "4", "13/3"});
  for (auto s : {IndexSet::kL1, IndexSet::kL2, IndexSet::kL2Prime, IndexSet::kL3, IndexSet::kL3Prime, IndexSet::kL4}) {
    const auto v = values(Hurst(1, 2), s, 6);
    REQUIRE(v.size() == 7);
    for (int i = 0; i <= 6; ++i) CHECK(v[i] == doctest::Approx(i));
  }
  CHECK(parse_index_set("L2'") == IndexSet::kL2Prime);
}

TEST_CASE("additive closure is closed under sums") {
  for (const Hurst& h : {Hurst(2, 5), Hurst(3, 10), Hurst(0.37)}) {
    const ExponentField f(h);
    const auto l3 = enumerate_exponents(h, IndexSet::kL3, 6);
    for (const auto& a : l3)
      for (const auto& b : l3) {
        const auto c = f.add(a, b);
        if (!f.within(c, 6)) continue;
        bool found = false;
        for (const auto& e : l3) found = found || f.equal(e, c);
        CHECK(found);
      }
    const auto v = values(h, IndexSet::kL4, 6);
    CHECK(std::is_sorted(v.begin(), v.end()));
  }
}

TEST_CASE("lognormal closed form") {
  const double s = 0.5, t = 0.5, H = 0.4;
  const double e = std::pow(t, H);
  const double direct =
      std::exp(-std::pow(std::log(1.5), 2) / (2 * s * s * e * e)) / (1.5 * s * std::sqrt(2 * std::numbers::pi) * e);
  CHECK(lognormal_density(1.0, 1.5, s, t, H) == doctest::Approx(direct));
}

TEST_CASE("plain estimator on the Gaussian heat kernel") {
  DensityModel m;
  m.id = "bridge1d";
  m.vf = make_bridge1d();
  m.a = vec({0.0});
  m.a_prime = vec({1.0});
  m.hurst = Hurst(1, 2);
  DensityOptions o;
  o.method = DensityMethod::kPlain;
  o.n_samples = 40000;
  o.seed = 3;
  const auto p = estimate_density(m, 1.0, o);
  CHECK(std::abs(p.estimate - 0.24197) <= 3 * p.se + 0.01 * 0.24197);
  CHECK(p.effective_samples > 0);

  o.bandwidth = 1e-3;
  m.a_prime = vec({60.0});
  try {
    estimate_density(m, 1.0, o);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStarvation);
  }
}

TEST_CASE("shifted estimator against the lognormal oracle") {
  const Hurst h(2, 5);
  const auto m = lognormal_model(h);
  DensityOptions o;
  o.n_samples = 100000;
  o.seed = 7;
  const auto p = estimate_density(m, 0.5, o);
  const double exact = lognormal_density(1.0, 1.5, 0.5, 0.5, h.value);
  CHECK(std::abs(p.estimate / exact - 1.0) <= 0.05);

  DensityModel bare = m;
  bare.minimizer.reset();
  CHECK_THROWS_AS(estimate_density(bare, 0.5, o), Error);
}

TEST_CASE("asymptotic fit on exact lognormal values") {
  const Hurst h(2, 5);
  const double rate = std::pow(std::log(1.5) / 0.5, 2);
  DensityEstimate est;
  for (double t : {0.4, 0.2, 0.1}) {
    DensityPoint p;
    p.t = t;
    p.estimate = lognormal_density(1.0, 1.5, 0.5, t, h.value);
    est.points.push_back(p);
  }
  const auto fit = fit_asymptotics(est, rate, 1, h, false);
  CHECK(std::abs(fit.rate_hat / rate - 1.0) <= 0.1);
  CHECK(std::abs(fit.prefactor_exp_hat + h.value) <= 0.15);
  CHECK(fit.lambda1 == doctest::Approx(2.0));
  CHECK(fit.alpha0_hat == doctest::Approx(1.0 / (1.5 * 0.5 * std::sqrt(2 * std::numbers::pi))).epsilon(1e-6));
  for (double r : fit.alpha_residuals) CHECK(std::abs(r) <= 0.01);

  est.points[1].estimate = 0.0;
  CHECK_THROWS_AS(fit_asymptotics(est, rate, 1, h, false), Error);
}

TEST_CASE("leading coefficient in the Gaussian case") {
  auto r = minimize_energy(*make_bridge1d(), vec({0.0}), vec({1.0}), Hurst(2, 5));
  LeadingOptions o;
  o.sanity = true;
  o.n_samples = 100000;
  const auto s = leading_coefficient(*make_bridge1d(), r, o);
  const double mass = 1.0 / std::sqrt(2 * std::numbers::pi);
  CHECK(s.gaussian_mass == doctest::Approx(mass));
  CHECK(std::abs(s.estimate / mass - 1.0) <= 0.03);

  o.sanity = false;
  o.n_samples = 4000;
  const auto f = leading_coefficient(*make_bridge1d(), r, o);
  CHECK(std::abs(f.estimate - mass) <= 4 * f.se + 0.03 * mass);
  CHECK_FALSE(f.heavy_tail);
}

TEST_CASE("density method names") {
  CHECK(parse_density_method("plain") == DensityMethod::kPlain);
  CHECK(std::string(to_string(DensityMethod::kShifted)) == "shifted");
  CHECK_THROWS_AS(parse_density_method("fancy"), Error);
}
