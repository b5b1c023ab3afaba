#pragma once

#include <stdexcept>
#include <string>

namespace kbil {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A table failed one of its construction-time invariants. The message
/// names the failed check.
struct ValidationError : Error {
    using Error::Error;
};

/// |gamma'(t)| fell below the tolerance where a frame was requested.
struct DegenerateParameterization : Error {
    using Error::Error;
};

/// Winding-number query at a point lying (numerically) on the curve.
struct PointOnBoundary : Error {
    using Error::Error;
};

/// Levi-Civita map evaluated at z = 0 (or q = 0).
struct OriginSingularity : Error {
    using Error::Error;
};

/// Square-root lift requested for a curve passing through the origin.
struct OriginOnBoundary : Error {
    using Error::Error;
};

/// Square-root lift requested for a curve that does not wind once around O.
struct WindingMismatch : Error {
    using Error::Error;
};

/// Orbit lifting could not match a segment start to the previous segment
/// end on either branch; signals an upstream accuracy failure.
struct BranchDiscontinuity : Error {
    using Error::Error;
};

/// A phase state violated the zero-energy constraint.
struct NotZeroEnergy : Error {
    using Error::Error;
};

/// A phase state at (numerically) zero radius.
struct CollisionState : Error {
    using Error::Error;
};

/// Anomaly outside the arc's parameter range.
struct DomainError : Error {
    using Error::Error;
};

/// Trajectory meets the wall non-transversally; the billiard map is
/// undefined there and the orbit terminates.
struct TangencyDetected : Error {
    using Error::Error;
};

/// No wall crossing ahead of the current state. Impossible for valid
/// bounded tables; reported as an internal error.
struct NoIntersection : Error {
    using Error::Error;
};

/// A radial (L = 0) arc reaches the attracting center before the wall.
struct CollisionReached : Error {
    using Error::Error;
};

/// Orbit data too degenerate (rank-deficient) for the integral fit.
struct DegenerateOrbit : Error {
    using Error::Error;
};

/// Joachimsthal evaluation at a point not on the stated ellipse.
struct PointOffEllipse : Error {
    using Error::Error;
};

}  // namespace kbil
