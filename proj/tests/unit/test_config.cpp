#include "doctest.h"
#include "roughheat/config.hpp"
#include "roughheat/error.hpp"

using namespace roughheat;

namespace {

std::string config_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) return e.what();
    return "wrong kind";
  }
  return "no error";
}

}  // namespace

TEST_CASE("flat key-value parsing") {
  const auto c = RunConfig::parse("# comment\nhurst = 2/5\n  samples=1000  \n\nseed = 7 # trailing\nseed = 9\n");
  CHECK(c.hurst().value == doctest::Approx(0.4));
  CHECK(c.integer("samples", 0) == 1000);
  CHECK(c.seed("seed", 0) == 9u);
  CHECK(c.real("missing", 2.5) == 2.5);
  CHECK(c.str("missing", "x") == "x");
}

TEST_CASE("lists, flags and grids") {
  auto c = RunConfig::parse("target = 1, 0.5 ,0\nfull = true\nM = 128\n");
  CHECK(c.reals("target") == std::vector<double>{1.0, 0.5, 0.0});
  CHECK(c.flag("full", false));
  CHECK(c.grid("M", 64) == 128);
  CHECK(c.grid("other", 64) == 64);
  c.set("M", "100");
  CHECK(config_message([&] { c.grid("M", 64); }).find("M") != std::string::npos);
  c.set("M", "8192");
  CHECK(config_message([&] { c.grid("M", 64); }) != "no error");
}

TEST_CASE("errors name the offending key") {
  const auto c = RunConfig::parse("hurst = 1.4\nfoo = 1\nsamples = many\n");
  CHECK(config_message([&] { c.check_keys({"hurst", "samples"}); }).find("'foo'") != std::string::npos);
  CHECK(config_message([&] { c.hurst(); }).find("hurst") != std::string::npos);
  CHECK(config_message([&] { c.integer("samples", 1); }).find("samples") != std::string::npos);
  CHECK(config_message([&] { c.required("model"); }).find("model") != std::string::npos);
  CHECK(config_message([] { RunConfig::parse("no equals sign here\n"); }) != "no error");
}

TEST_CASE("dump round-trips sorted by key") {
  const auto c = RunConfig::parse("b = 2\na = 1\n");
  CHECK(c.dump() == "a = 1\nb = 2\n");
  CHECK(RunConfig::parse(c.dump()).values() == c.values());
}
