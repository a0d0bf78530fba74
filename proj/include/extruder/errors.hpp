#pragma once

#include <stdexcept>
#include <string>

namespace extruder {

// Base for every error raised by the library. The C API maps each subclass
// onto one status code, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad keys, non-positive constants,
// violated parameter orderings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A phase domain shrank below the configured minimum length.
class DegenerateDomainError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a pure function (e.g. x outside [0, L]).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Grid too small for a stencil, or mismatched grids.
class GridError : public Error {
 public:
  using Error::Error;
};

// Profile resampling would extrapolate further than one cell.
class ResampleError : public Error {
 public:
  using Error::Error;
};

// Step size fell below dt_min with the error test still failing.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Gain kernel degenerate (c <= 0, f(s0) == 0, ...).
class GainError : public Error {
 public:
  using Error::Error;
};

// Post-processing failures: log of a non-positive norm, missing snapshots.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace extruder
