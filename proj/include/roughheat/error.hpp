#pragma once

#include <stdexcept>
#include <string>

namespace roughheat {

enum class ErrorKind {
  kInvalidArgument,
  kNumericalDegeneracy,
  kBlowUp,
  kCapability,
  kNonConvergence,
  kDivergence,
  kStarvation,
  kDiagnostic,
  kConfig,
};

const char* to_string(ErrorKind kind);

/// Library error carrying a category and the name of the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] inline void fail(ErrorKind kind, const char* module, const std::string& what) {
  throw Error(kind, module, what);
}

inline void require(bool cond, const char* module, const std::string& what) {
  if (!cond) fail(ErrorKind::kInvalidArgument, module, what);
}

}  // namespace roughheat
