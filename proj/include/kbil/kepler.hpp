#pragma once

#include <map>
#include <string>
#include <vector>

#include "kbil/table.hpp"

namespace kbil {

class LiftedTable;

/// Kepler-side phase point for the attracting center at the origin,
/// H(p, q) = |p|^2/2 - 1/|q|. The billiard works on the zero-energy
/// shell, where every orbit piece is a parabola focused at O (or a
/// radial ray when the angular momentum vanishes).
struct PhaseState {
    Vec2 q;  // position, != O
    Vec2 p;  // momentum
};

/// H(p, q). Throws CollisionState if |q| < 1e-12.
double kepler_energy(const PhaseState& s);

/// Scalar angular momentum q x p.
double angular_momentum(const PhaseState& s);

/// |L| below which an arc is classified as radial (a ray through O).
constexpr double kRadialThreshold = 1e-6;
/// |L| below which the stepper advances a segment in the square-root
/// cover instead of scanning the wall downstairs. Near-radial parabolas
/// hug the ray opposite their apse, and their two wall crossings sit
/// only ~sqrt(2 ell / r) apart -- below any fixed scan resolution once
/// ell = L^2 is small. In the cover the same segment is a straight
/// chord passing near (or through) O with well-separated endpoints, so
/// stepping there is exact and uniformly robust; the routing uses the
/// exact lifted state, not the radial approximation.
constexpr double kLiftStepThreshold = 1e-2;
constexpr double kCollisionRadius = 1e-12;

constexpr double kDefaultEnergyTol = 1e-10;
constexpr double kDefaultRootTol = 1e-13;
constexpr double kDefaultTangencyTol = 1e-8;

/// Geometric zero-energy Kepler orbit: in the apse frame
/// r(nu) = L^2 / (1 + cos nu), nu in (-pi, pi), traversed with nu
/// increasing; the polar angle is apse_angle + orientation * nu.
/// Radial arcs (L = 0) are single legs of the ray through O in
/// direction apse_dir, parameterized by the radius, with orientation
/// +1 moving outward and -1 moving inward.
struct ParabolicArc {
    double L = 0.0;             // conserved angular momentum (0 on radial arcs)
    double apse_angle = 0.0;    // polar angle of the pericenter / of the ray
    Vec2 apse_dir{1.0, 0.0};    // unit vector at apse_angle
    int orientation = +1;       // sign of L; radial: +1 outgoing, -1 ingoing
    bool radial = false;

    double latus_rectum() const { return L * L; }
    double pericenter() const { return 0.5 * L * L; }
};

/// Build the arc through a zero-energy state. The apse direction comes
/// from the Laplace-Runge-Lenz vector e = (|p|^2 - 1/|q|) q - (q.p) p,
/// which has unit length on the zero-energy shell. States with
/// |q x p| < kRadialThreshold are classified radial.
/// Throws NotZeroEnergy if |H| > tol_energy, CollisionState if
/// |q| < 1e-12.
ParabolicArc arc_from_state(const PhaseState& s,
                            double tol_energy = kDefaultEnergyTol);

/// State at anomaly nu (for radial arcs: at radius nu > 0). The returned
/// state satisfies H = 0 and q x p = L up to rounding by construction
/// (half-angle forms; no cancellation near the apse or near collision).
/// Throws DomainError for nu outside the arc's range.
PhaseState arc_eval(const ParabolicArc& arc, double nu);

/// Anomaly of a position on the arc (radius for radial arcs). Throws
/// DomainError if q does not lie on the arc within 1e-8 relative.
double arc_anomaly(const ParabolicArc& arc, Vec2 q);

/// Arc-wall crossing ahead of nu_start.
struct WallHit {
    double nu = 0.0;        // arc parameter of the crossing
    double t = 0.0;         // wall parameter
    BoundaryFrame frame;    // wall frame at t
    PhaseState state;       // incoming state at the crossing
    double sin_angle = 0.0; // |sin| of the angle between arc and wall tangent
};

/// First transversal wall crossing of the arc past nu_start in the
/// direction of travel. The wall parameter is scanned on a uniform grid
/// (512 points, doubled until the crossing count stabilizes) of the
/// implicit parabola function |gamma| + <gamma, apse_dir> - L^2, whose
/// zero set is exactly the arc's parabola; brackets are polished by
/// bisection + Newton to tol_root.
///
/// Throws TangencyDetected if the first crossing has
/// sin_angle <= tol_tangency (the billiard map is undefined there),
/// CollisionReached when an ingoing radial arc meets no wall before O
/// (the caller may re-step through the lift, where the segment is an
/// ordinary chord), and NoIntersection when no crossing lies ahead
/// (impossible for valid bounded tables; an internal error).
WallHit next_wall_intersection(const ParabolicArc& arc, const Table& table,
                               double nu_start,
                               double tol_root = kDefaultRootTol,
                               double tol_tangency = kDefaultTangencyTol);

/// One wall impact: the bounce point, the unit momentum directions just
/// before and after reflection, the outgoing arc, and named diagnostic
/// values ("energy_residual", "abs_L", "s", "phi", "via_lift").
struct BounceRecord {
    double t = 0.0;
    Vec2 point;
    Vec2 dir_in;
    Vec2 dir_out;
    ParabolicArc arc_out;
    std::map<std::string, double> diagnostics;
};

struct KeplerOrbit {
    std::vector<BounceRecord> bounces;
    std::string termination;  // empty, "tangency" or "collision"
};

/// Full outgoing momentum of a bounce: dir_out scaled to the
/// zero-energy speed sqrt(2/|point|).
PhaseState outgoing_state(const BounceRecord& b);

/// Launch record at wall parameter t0 with outgoing direction at `angle`
/// (radians from the wall tangent, measured into the interior).
/// Throws ValidationError unless angle lies strictly in (0, pi).
BounceRecord launch_record(const Table& table, double t0, double angle,
                           double tol_energy = kDefaultEnergyTol);

/// Advance one bounce: build the outgoing arc, find the next transversal
/// wall crossing, reflect elastically. Segments with |L| below
/// kLiftStepThreshold are stepped in the square-root cover (straight
/// chord near or through O) and projected back; the regularized radial
/// shot passes through O and leaves along the same ray, so on a wall
/// meeting that ray only once it returns to its own foot point with
/// reversed direction. `lift` may supply a prebuilt cover; when null,
/// one is constructed on demand for such segments. Throws
/// TangencyDetected when the stored outgoing direction does not point
/// strictly into the interior (inner product with the inward normal
/// <= 1e-10); other errors propagate from next_wall_intersection.
BounceRecord kepler_step(const Table& table, const BounceRecord& bounce,
                         const LiftedTable* lift = nullptr,
                         double tol_energy = kDefaultEnergyTol,
                         double tol_root = kDefaultRootTol,
                         double tol_tangency = kDefaultTangencyTol);

/// n-bounce orbit from the launch (t0, angle). On TangencyDetected or
/// CollisionReached the orbit is returned truncated with the reason in
/// `termination`; other errors propagate. A prebuilt cover may be
/// passed to avoid rebuilding it for low-|L| segments; when null, one
/// is constructed (once) the first time a segment needs it.
KeplerOrbit simulate_kepler(const Table& table, double t0, double angle,
                            int n_bounces,
                            const LiftedTable* lift = nullptr,
                            double tol_energy = kDefaultEnergyTol,
                            double tol_root = kDefaultRootTol,
                            double tol_tangency = kDefaultTangencyTol);

}  // namespace kbil
