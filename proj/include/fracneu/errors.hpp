#pragma once
// Error taxonomy shared by all modules. The CLI maps these onto exit codes.

#include <stdexcept>
#include <string>

namespace fracneu {

/// Invalid user-facing parameter (s outside (1/2,1), bad radii, ...).
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Singular kernel evaluated on the diagonal; callers must use pair quadrature.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assembly self-check failure or singular exterior Gram block.
struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Eigensolver, factorization or iteration failure.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required hypothesis on f failed (no admissible fixed point, ...).
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Truncation or AR construction could not be certified.
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mountain-pass geometry could not be realised (no dip below E(u0)).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Contract violation between modules (e.g. non-extended input).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace fracneu
