#pragma once

#include <stdexcept>
#include <string>

namespace plurilatt {

// Process exit codes used by the CLI. Library code throws typed errors;
// the CLI maps Error::exit_code to the process status.
//   0 success
//   1 I/O, schema, or otherwise unusable input
//   2 degenerate weights / singular step matrices
//   3 inconsistency detected during verification or propagation
//   4 singular linear system in a solve
//   5 flip precondition violated
//   6 conjugate closure failure
struct Error : std::runtime_error {
  int exit_code;
  std::string kind;
  Error(int code, std::string k, const std::string& what)
      : std::runtime_error(k + ": " + what), exit_code(code), kind(std::move(k)) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(1, "IoError", w) {}
};
struct InvalidAxes : Error {
  explicit InvalidAxes(const std::string& w) : Error(1, "InvalidAxes", w) {}
};
struct MissingInitialData : Error {
  explicit MissingInitialData(const std::string& w) : Error(1, "MissingInitialData", w) {}
};
struct MissingCoefficients : Error {
  explicit MissingCoefficients(const std::string& w) : Error(1, "MissingCoefficients", w) {}
};
struct MissingFieldValue : Error {
  explicit MissingFieldValue(const std::string& w) : Error(1, "MissingFieldValue", w) {}
};
struct DanglingInterior : Error {
  explicit DanglingInterior(const std::string& w) : Error(1, "DanglingInterior", w) {}
};
struct MultiplyConnected : Error {
  explicit MultiplyConnected(const std::string& w) : Error(1, "MultiplyConnected", w) {}
};
struct DegenerateWeights : Error {
  explicit DegenerateWeights(const std::string& w) : Error(2, "DegenerateWeights", w) {}
};
struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& w) : Error(2, "SingularMatrix", w) {}
};
struct InconsistentCoefficients : Error {
  explicit InconsistentCoefficients(const std::string& w)
      : Error(3, "InconsistentCoefficients", w) {}
};
struct ConservationViolated : Error {
  explicit ConservationViolated(const std::string& w) : Error(3, "ConservationViolated", w) {}
};
struct InconsistentCube : Error {
  explicit InconsistentCube(const std::string& w) : Error(3, "InconsistentCube", w) {}
};
struct SingularSystem : Error {
  explicit SingularSystem(const std::string& w) : Error(4, "SingularSystem", w) {}
};
struct UnsolvablePivot : Error {
  explicit UnsolvablePivot(const std::string& w) : Error(4, "UnsolvablePivot", w) {}
};
struct NotFlippable : Error {
  explicit NotFlippable(const std::string& w) : Error(5, "NotFlippable", w) {}
};
struct NotHarmonic : Error {
  explicit NotHarmonic(const std::string& w) : Error(6, "NotHarmonic", w) {}
};

}  // namespace plurilatt
