#pragma once

#include <stdexcept>
#include <string>

namespace gl {

// Error taxonomy shared by all modules. Each class corresponds to one
// failure mode a caller may want to catch separately.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lattice with N < 3 or d < 1.
class InvalidGeometryError : public Error {
 public:
  using Error::Error;
};

// Operation only defined in d = 1 (walk, bond offsets, V2 coupling).
class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite argument to a potential evaluation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// V'' left the declared [C_minus, C_plus] band on the validation grid.
class ConvexityViolationError : public Error {
 public:
  using Error::Error;
};

// Exact Gaussian sampler invoked for a non-Gaussian Hamiltonian.
class WrongSamplerError : public Error {
 public:
  using Error::Error;
};

// ESS undefined (constant series) or series too short.
class UndefinedEssError : public Error {
 public:
  using Error::Error;
};

// Invalid run parameters: step size violating the stability rule,
// mismatched lattices in a coupling, malformed config files.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Walk thinning probability mass reached 1 within one substep.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

// Walk wrapped around the torus (|X| > N/4): run horizon too long.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// Dense linear algebra requested above the supported size.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Structural assumption broken (e.g. unexpected kernel rank).
class ModelError : public Error {
 public:
  using Error::Error;
};

// A fit or diagnostic fell below its quality threshold (R^2 etc).
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

}  // namespace gl
