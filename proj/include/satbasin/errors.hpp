#pragma once

#include <stdexcept>
#include <string>

namespace satbasin {

/// Base class for all library-specific failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// (A, b) is not controllable, so pole placement has no solution.
struct SingularControllabilityError : Error {
    using Error::Error;
};

/// Lyapunov-type equation has no unique solution (eigenvalue resonance).
struct SingularEquationError : Error {
    using Error::Error;
};

/// Index requested at an equilibrium with singular or switching-plane Jacobian.
struct DegenerateEquilibriumError : Error {
    using Error::Error;
};

/// Vector field vanishes somewhere on the sampling sphere.
struct ZeroOnSphereError : Error {
    using Error::Error;
};

/// Adaptive refinement exhausted its sample budget without converging.
struct ResolutionError : Error {
    using Error::Error;
};

/// Regular-value redraws exhausted; every candidate sat too close to a boundary.
struct DegenerateValueError : Error {
    using Error::Error;
};

/// Step control drove the step size below the representable minimum.
struct StiffnessError : Error {
    using Error::Error;
};

/// Scan seed points did not have the fates the bracket needs.
struct GeometryError : Error {
    using Error::Error;
};

/// Random system generator failed to produce a valid draw.
struct GeneratorError : Error {
    using Error::Error;
};

}  // namespace satbasin
