// Runs every acceptance criterion and prints one line per criterion.
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "roughheat/parallel.hpp"
#include "roughheat/verify.hpp"

int main(int argc, char** argv) {
  roughheat::VerifyOptions opts;
  opts.full = true;
  opts.workers = 2;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--fast")) opts.full = false;
    if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) opts.workers = std::atoi(argv[++i]);
  }
  int failed = 0;
  for (const auto& r : roughheat::run_suite(opts)) {
    std::cout << roughheat::report_line(r) << std::endl;
    if (!r.pass) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
