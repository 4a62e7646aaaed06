#pragma once

#include <stdexcept>
#include <string>

namespace gspec {

// Failure taxonomy shared by the library and the CLI exit-code mapping.
// Usage covers malformed requests (bad arguments, bad files, bad configs);
// everything else is a computation failure on well-formed input.
enum class ErrorCode {
  InvalidArgument,     // malformed request, unknown name, bad file
  InvalidSplit,        // split geometry violates 1 <= f_n, l_n <= n
  InvalidLevel,        // alpha outside (0, 1)
  DegenerateData,      // constant / all-zero input where variation is required
  DegenerateResiduals, // exact fit: sigma_e below 1e-300
  ModelMismatch,       // model needs more structure than the series offers
  LagOutOfRange,       // lag j outside 1..l_n
  KernelMemory,        // CF kernel matrix exceeds the memory budget
  SingularDesign,      // regression design condition number > 1e12
  NonConvergence,      // optimizer exhausted its iteration cap
  NoAdmissibleThreshold, // TAR grid leaves no feasible regime split
  ExplosivePath,       // simulated |Y_t| exceeded 1e12
  EstimationFailure,   // generic estimation failure inside a pipeline
  BootstrapEstimationFailure, // FDWB re-estimation failed after max retries
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

  // true for failures that indicate a bad request rather than a numeric outcome
  bool usage() const {
    return code_ == ErrorCode::InvalidArgument || code_ == ErrorCode::InvalidSplit ||
           code_ == ErrorCode::InvalidLevel;
  }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

} // namespace gspec
