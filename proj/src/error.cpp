#include "roughheat/error.hpp"

namespace roughheat {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kNumericalDegeneracy: return "numerical_degeneracy";
    case ErrorKind::kBlowUp: return "blow_up";
    case ErrorKind::kCapability: return "capability";
    case ErrorKind::kNonConvergence: return "non_convergence";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kStarvation: return "starvation";
    case ErrorKind::kDiagnostic: return "diagnostic";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace roughheat
