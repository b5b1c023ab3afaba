#pragma once

#include <utility>

#include "kbil/birkhoff.hpp"
#include "kbil/kepler.hpp"
#include "kbil/lifted_table.hpp"

namespace kbil {

/// Which of the two square roots is taken: the lifts differ by a global
/// sign (antipodal branches of the double cover).
enum class BranchSign : int { Plus = +1, Minus = -1 };

inline int branch_sign(BranchSign b) { return static_cast<int>(b); }

/// Hooke-side state of the Levi-Civita correspondence
/// q = z^2, p = w / (2 conj(z)). Zero Kepler energy corresponds to
/// |w|^2 / 8 = 1, i.e. |w| = 2 sqrt(2), where the z-motion is free
/// (straight chords at constant speed in the regularized time).
struct LiftedState {
    Vec2 z;  // != O
    Vec2 w;
};

/// |w|^2 / 8; equals 1 on lifts of zero-energy Kepler states.
double hooke_energy(const LiftedState& l);

/// (z, w) -> (q = z^2, p = w / (2 conj(z))). Throws OriginSingularity
/// if |z| < 1e-14.
PhaseState project_state(const LiftedState& l);

/// Inverse: z = sign * principal sqrt(q), w = 2 conj(z) p. The two
/// branches are exact negations of each other. Throws OriginSingularity
/// if |q| < 1e-14.
LiftedState lift_state(const PhaseState& s, BranchSign b = BranchSign::Plus);

/// Branch-continuous square-root lift of the wall; see LiftedTable.
LiftedTable lift_table(const Table& table);

/// Lift a Kepler billiard orbit to the double cover: each parabolic arc
/// becomes a straight chord of the lifted table, and consecutive chords
/// are joined by branch continuity (the new start must be the previous
/// chord's end). Returns the lift starting on branch b0 together with
/// its antipode; the two are exact pointwise negations, and both
/// project back to the input orbit.
///
/// Throws BranchDiscontinuity if at some bounce neither square root of
/// the Kepler point continues the previous chord within match_tol
/// (signals an upstream accuracy failure, not a geometric property).
std::pair<BirkhoffOrbit, BirkhoffOrbit> lift_orbit(
    const KeplerOrbit& orbit, const LiftedTable& lifted,
    BranchSign b0 = BranchSign::Plus, double match_tol = 1e-10);

/// Project a Birkhoff orbit of the lifted table down to a Kepler orbit:
/// bounce points square, directions transform by p = w / (2 conj(z))
/// with |w| = 2 sqrt(2) on the zero-energy shell. Chords through O are
/// fine (they project to radial segments); antipodal orbits project to
/// the identical Kepler orbit.
KeplerOrbit project_orbit(const BirkhoffOrbit& orbit,
                          const LiftedTable& lifted);

}  // namespace kbil
