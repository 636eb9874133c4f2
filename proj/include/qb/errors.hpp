#pragma once

#include <stdexcept>
#include <string>

namespace qb {

// Base class for all toolkit failures. Each condition the library can
// reject has its own type so callers can distinguish a violated theorem
// hypothesis from a plain usage mistake.
class ToolkitError : public std::runtime_error {
public:
  explicit ToolkitError(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched spaces, lengths or other caller-side inconsistencies.
class UsageError : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

// ||lambda Q - I|| >= 1: the Neumann series does not converge.
class ContractionFailure : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

// Iteration budget exhausted before the requested tolerance.
class NonConvergence : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class SingularOperator : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

// Kernel containment ker(S_xi) <= ker(S_diff) fails, so the coefficient
// perturbation constant is not finite.
class KernelMismatch : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

// Supplied extension operator disagrees with the assembled one on the
// probed subspace pair.
class ExtensionMismatch : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class HypothesisViolated : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class PositivityViolation : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class QuadratureUnderresolved : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class StencilOverflow : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class EpsilonOutOfRange : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class IntegrationDivergence : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class TaylorTooShort : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

class ReciprocalUnderflow : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

// Scenario file does not validate against the runner schema.
class SchemaError : public ToolkitError {
public:
  using ToolkitError::ToolkitError;
};

}  // namespace qb
