#pragma once

#include <string>
#include <vector>

#include "kbil/lifted_table.hpp"
#include "kbil/table.hpp"

namespace kbil {

/// Boundary point with an outgoing direction: the state of the Birkhoff
/// billiard map. On lifted tables t runs over the period-2
/// parameterization.
struct ChordState {
    double t = 0.0;
    Vec2 point;
    Vec2 direction;  // unit, into the interior at non-grazing states
};

/// Standard billiard phase coordinates: arc-length fraction of the
/// bounce point and angle from the tangent to the outgoing direction.
struct PhasePoint {
    double s = 0.0;    // in [0, 1)
    double phi = 0.0;  // in (0, pi)
};

/// Arrival data of one free-flight chord.
struct ChordHit {
    ChordState arrival;      // direction still the incoming one
    BoundaryFrame frame;     // wall frame at the arrival point
    double chord_length = 0.0;
    double sin_angle = 0.0;  // |sin| of the angle between chord and tangent
};

struct BirkhoffOrbit {
    std::vector<ChordState> states;  // outgoing state at each bounce
    std::vector<PhasePoint> coords;
    std::vector<Vec2> dirs_in;       // incoming unit directions (dirs_in[0]
                                     // repeats the launch direction)
    std::string termination;         // empty or "tangency"
};

/// Next boundary crossing along the ray from c. Centered and offset
/// ellipse tables use the exact quadratic chord (solve
/// <E(x0 + tau v), x0 + tau v> = 1 in the ellipse body frame,
/// E = diag(1/A^2, 1/B^2)); all other curves use the same
/// grid-bracketing root scan as the Kepler stepper applied to the
/// signed cross distance from the ray. Throws TangencyDetected when the
/// first crossing has sin_angle <= tol_tangency, NoIntersection when no
/// crossing lies ahead (internal error for closed tables).
ChordHit chord_exit(const Table& table, const ChordState& c,
                    double tol_root = 1e-13, double tol_tangency = 1e-8);
ChordHit chord_exit(const LiftedTable& table, const ChordState& c,
                    double tol_root = 1e-13, double tol_tangency = 1e-8);

/// chord_exit followed by elastic reflection in the arrival frame.
ChordState birkhoff_step(const Table& table, const ChordState& c,
                         double tol_root = 1e-13, double tol_tangency = 1e-8);
ChordState birkhoff_step(const LiftedTable& table, const ChordState& c,
                         double tol_root = 1e-13, double tol_tangency = 1e-8);

/// Phase coordinates of a chord state.
PhasePoint phase_coords(const Table& table, const ChordState& c);
PhasePoint phase_coords(const LiftedTable& table, const ChordState& c);

/// Chord state launched from arc fraction s at angle phi from the
/// tangent. Throws ValidationError unless phi lies strictly in (0, pi).
ChordState launch_chord(const Table& table, PhasePoint start);
ChordState launch_chord(const LiftedTable& table, PhasePoint start);

/// n-bounce Birkhoff orbit. On TangencyDetected the orbit is returned
/// truncated with termination = "tangency".
BirkhoffOrbit simulate_birkhoff(const Table& table, PhasePoint start,
                                int n_bounces, double tol_root = 1e-13,
                                double tol_tangency = 1e-8);
BirkhoffOrbit simulate_birkhoff(const LiftedTable& table, PhasePoint start,
                                int n_bounces, double tol_root = 1e-13,
                                double tol_tangency = 1e-8);

/// As above but from an explicit boundary state (used by the conjugacy
/// checks, where the launch comes from a lifted Kepler state rather
/// than phase coordinates).
BirkhoffOrbit simulate_birkhoff(const Table& table, const ChordState& start,
                                int n_bounces, double tol_root = 1e-13,
                                double tol_tangency = 1e-8);
BirkhoffOrbit simulate_birkhoff(const LiftedTable& table,
                                const ChordState& start, int n_bounces,
                                double tol_root = 1e-13,
                                double tol_tangency = 1e-8);

/// Joachimsthal quantity J = x_x v_x / A^2 + x_y v_y / B^2 on the
/// centered axis-aligned ellipse with semi-axes (A, B); conserved by
/// the billiard map there. Throws PointOffEllipse if x misses the
/// ellipse by more than 1e-9.
double joachimsthal(double A, double B, Vec2 x, Vec2 v);

}  // namespace kbil
