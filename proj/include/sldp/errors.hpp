#pragma once

#include <stdexcept>
#include <string>

namespace sldp {

/// Base class for all solver errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch, crossed bounds, unbounded integer variables, ...
struct MalformedProblem : Error {
  using Error::Error;
};

/// Branch-and-bound exceeded its node cap.
struct NodeLimitExceeded : Error {
  using Error::Error;
};

/// Integer lattice too large for exhaustive enumeration.
struct EnumerationCapExceeded : Error {
  using Error::Error;
};

/// Per-stage probabilities do not form a distribution.
struct ProbabilityMismatch : Error {
  using Error::Error;
};

/// Materializing the scenario tree would exceed the node cap.
struct NodeCapExceeded : Error {
  using Error::Error;
};

/// A cut center lies outside the stage's state box.
struct CenterOutsideBox : Error {
  using Error::Error;
};

/// Cuts with different centers cannot be aggregated.
struct CenterMismatch : Error {
  using Error::Error;
};

/// A stage problem came back infeasible; this violates the recourse
/// assumption and aborts the run.
struct StageInfeasible : Error {
  StageInfeasible(const std::string& what, int stage_, long node_)
      : Error(what), stage(stage_), node(node_) {}
  int stage = -1;
  long node = -1;
};

/// The user-supplied value oracle failed (non-finite value or throw).
struct OracleFailure : Error {
  using Error::Error;
};

/// Problem file does not conform to the schema; message carries the JSON path.
struct MalformedProblemFile : Error {
  using Error::Error;
};

}  // namespace sldp
