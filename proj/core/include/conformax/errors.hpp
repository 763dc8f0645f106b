#pragma once

#include <stdexcept>
#include <string>

namespace conformax {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A resolution or size request above the documented implementation cap.
struct CapacityError : Error {
  using Error::Error;
};

/// Mesh construction parameters that cannot produce a valid mesh.
struct DegenerateMeshError : Error {
  using Error::Error;
};

/// Geodesic ball with no interior, or radius outside the admissible range.
struct DegenerateBallError : Error {
  using Error::Error;
};

/// Dirichlet restriction left no interior degrees of freedom.
struct DegenerateDomainError : Error {
  using Error::Error;
};

/// Form assembly failed (degenerate triangle, size mismatch).
struct AssemblyError : Error {
  using Error::Error;
};

/// Invalid solver / optimizer / run configuration.
struct ConfigurationError : Error {
  using Error::Error;
};

/// Derivative requested from eigenpairs whose residuals exceed the
/// trust threshold.
struct StaleEigenpairError : Error {
  using Error::Error;
};

}  // namespace conformax
