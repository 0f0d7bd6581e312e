// Exception hierarchy shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace dmn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two-layer block fed non-physical compliances (Gamma ~ 0).
struct DegenerateBlock : Error {
  using Error::Error;
};

// 2x2 interface system of the finite-strain block is singular.
struct SingularInterface : Error {
  using Error::Error;
};

// Every leaf deactivated; the network has no output.
struct DeadNetwork : Error {
  using Error::Error;
};

// Checkpoint / dataset file could not be parsed.
struct FormatError : Error {
  using Error::Error;
};

struct NewtonDivergence : Error {
  using Error::Error;
};

struct SingularMacroSystem : Error {
  using Error::Error;
};

struct InvertedElement : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct OracleFailure : Error {
  using Error::Error;
};

}  // namespace dmn
