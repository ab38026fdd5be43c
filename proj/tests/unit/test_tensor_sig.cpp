#include "doctest.h"
#include "helpers.hpp"
#include "roughheat/error.hpp"
#include "roughheat/tensor_sig.hpp"

using namespace roughheat;
using rh_test::vec;

TEST_CASE("segment signature in one dimension is the exponential series") {
  const auto s = segment_signature(vec({2.0}), 3);
  CHECK(s.at(0) == doctest::Approx(2.0));
  CHECK(s.at(0, 0) == doctest::Approx(2.0));
  CHECK(s.at(0, 0, 0) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("level two of a diagonal segment is all one half") {
  const auto s = segment_signature(vec({1.0, 1.0}), 2);
  for (double v : s.level(2)) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("identity is neutral and collinear pieces concatenate") {
  const auto s = segment_signature(vec({0.3, -1.2, 0.7}), 3);
  CHECK(max_abs_diff(chen_mul(identity_signature(3, 3), s), s) == 0.0);
  CHECK(max_abs_diff(chen_mul(s, identity_signature(3, 3)), s) == 0.0);
  const Eigen::VectorXd v = vec({0.4, 0.1});
  const auto vv = chen_mul(segment_signature(v, 3), segment_signature(v, 3));
  CHECK(max_abs_diff(vv, segment_signature(2 * v, 3)) < 1e-14);
}

TEST_CASE("Chen product is associative and inverses cancel") {
  RandomStream rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto rnd = [&] { return segment_signature(vec({rng.normal(), rng.normal()}), 3); };
    const auto a = chen_mul(rnd(), rnd()), b = chen_mul(rnd(), rnd()), c = rnd();
    CHECK(max_abs_diff(chen_mul(chen_mul(a, b), c), chen_mul(a, chen_mul(b, c))) < 1e-12);
    CHECK(max_abs_diff(chen_mul(a, inverse(a)), identity_signature(2, 3)) < 1e-12);
  }
}

TEST_CASE("dilation scales level k by c^k") {
  const auto s = chen_mul(segment_signature(vec({1.0, 0.0}), 3), segment_signature(vec({0.0, 1.0}), 3));
  CHECK(max_abs_diff(dilate_sig(s, 0.0), identity_signature(2, 3)) == 0.0);
  CHECK(max_abs_diff(dilate_sig(s, 1.0), s) == 0.0);
  const auto d2 = dilate_sig(s, 2.0);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t i = 0; i < s.level(k).size(); ++i)
      CHECK(d2.level(k)[i] == doctest::Approx(std::pow(2.0, k) * s.level(k)[i]));
}

TEST_CASE("log and exp are mutually inverse") {
  const auto s = chen_mul(segment_signature(vec({0.5, -0.2}), 3), segment_signature(vec({-0.1, 0.9}), 3));
  CHECK(max_abs_diff(sig_exp(sig_log(s)), s) < 1e-14);
}

TEST_CASE("mismatched shapes are rejected") {
  const auto a = segment_signature(vec({1.0, 2.0}), 3);
  const auto b = segment_signature(vec({1.0, 2.0}), 2);
  const auto c = segment_signature(vec({1.0, 2.0, 3.0}), 3);
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kDiagnostic;
  };
  CHECK(kind([&] { chen_mul(a, b); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([&] { chen_mul(a, c); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([&] { segment_signature(vec({1.0}), 4); }) == ErrorKind::kInvalidArgument);
}
