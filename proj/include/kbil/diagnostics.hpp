#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kbil/birkhoff.hpp"
#include "kbil/kepler.hpp"
#include "kbil/lifted_table.hpp"
#include "kbil/table.hpp"

namespace kbil {

/// Serial reference vs OpenMP execution of the grid sweeps. Both paths
/// produce identical results (deterministic reductions); the benchmark
/// target compares their timings.
enum class Exec { Serial, Parallel };

enum class KVerdict { KConvex, NotKConvex, Marginal };

/// A focused parabola r = ell / (1 + cos(theta - theta0)) meeting the
/// wall in `crossings` transversal points; a certificate of failed
/// K-convexity when crossings >= 3.
struct ParabolaWitness {
    double theta0 = 0.0;
    double ell = 0.0;
    int crossings = 0;
};

struct KConvexVerdict {
    KVerdict verdict = KVerdict::Marginal;
    double kappa_min = 0.0;  // minimal signed curvature of the lifted wall
    std::optional<ParabolaWitness> witness;
    long graze_touches = 0;  // near-tangential touches seen but not counted
    int grid_used = 0;
};

/// Classify by the lift criterion: the wall is K-convex iff its
/// square-root lift is strictly convex (and it is centrally symmetric
/// by construction). Scans the lifted signed curvature on a 4096-point
/// grid, refining x2 until kappa_min stabilizes to 1e-6 relative;
/// verdict KConvex when kappa_min > 1e-6 / diameter, NotKConvex when
/// kappa_min < -1e-6 / diameter, Marginal in between (refine, do not
/// trust). Errors propagate from lift_table.
KConvexVerdict check_k_convex(const Table& table);

struct BruteGrid {
    int n_theta = 64;  // apse directions in [0, 2 pi)
    int n_ell = 64;    // latus rectum values in (0, 2 max|gamma|]
    int n_t = 1024;    // wall samples per parabola
};

/// Count transversal wall crossings of one focused parabola by sign
/// changes of |gamma| + <gamma, u(theta0)> - ell along the wall, with
/// bisection refinement; grazing touches (|value| dips below graze_eps
/// without a sign change) are tallied separately when requested.
int parabola_wall_crossings(const Table& table, double theta0, double ell,
                            int n_t, long* graze_touches = nullptr);

/// Classify by the definition: sweep a (theta0, ell) grid of focused
/// parabolas and report the first (lowest grid index) parabola meeting
/// the wall in >= 3 transversal points. No witness found means KConvex
/// at this resolution; this oracle never returns Marginal, and it does
/// not compute a curvature (kappa_min is NaN in its verdict). The sweep
/// is data-parallel; the witness choice is deterministic for both Exec
/// modes.
KConvexVerdict brute_force_k_convex(const Table& table, BruteGrid grid = {},
                                    Exec exec = Exec::Parallel);

/// Least-squares centered conic through the lifted wall samples,
/// <M x, x> = 1 with M symmetric. is_ellipse requires M positive
/// definite and max residual below 1e-9; then (A, B, rotation) are the
/// semi-axes and axis angle.
struct CenteredEllipseFit {
    bool is_ellipse = false;
    double m11 = 0.0, m12 = 0.0, m22 = 0.0;
    double max_residual = 0.0;
    double A = 0.0, B = 0.0, rotation = 0.0;
};

CenteredEllipseFit fit_centered_ellipse(const LiftedTable& lifted);

/// Exact form for a centered ellipse table (no fitting): is_ellipse iff
/// the table is an ellipse centered at O. Supplies the invariant column
/// for direct Birkhoff runs.
CenteredEllipseFit ellipse_form(const Table& table);

/// Joachimsthal form of the fitted ellipse evaluated on a lifted
/// boundary state, <M z, v>; conserved when the lift really is an
/// ellipse (focused base tables).
double joachimsthal_form(const CenteredEllipseFit& fit, Vec2 z, Vec2 v);

struct ConservationRow {
    double energy_residual = 0.0;
    double abs_L = 0.0;
    double j_pullback = 0.0;  // valid only when has_pullback
};

struct ConservationReport {
    std::vector<ConservationRow> rows;
    bool has_pullback = false;  // lift fitted an ellipse within 1e-9
    CenteredEllipseFit fit;
};

/// Per-bounce conserved-quantity table of a Kepler orbit: energy
/// residual, |L|, and - when the lifted wall is a centered ellipse
/// within fit tolerance - the Joachimsthal pullback along the
/// branch-continuous lift (constant on focused-ellipse tables).
ConservationReport conservation_report(const KeplerOrbit& orbit,
                                       const LiftedTable& lifted);

/// Quadratic first-integral probe: the best unit-Frobenius symmetric Q
/// minimizing the variance of J_i = <Q z_i, v_i> over the bounce data,
/// found as the smallest singular direction of the centered data matrix
/// with columns (z_x v_x, z_y v_y, z_x v_y + z_y v_x).
struct IntegralFitReport {
    double q11 = 0.0, q22 = 0.0, q12 = 0.0;
    double residual = 0.0;  // std(J) / mean|J|
    int n_samples = 0;
    double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0;  // singular values, desc.
    double j_mean = 0.0, j_std = 0.0;
};

/// Throws DegenerateOrbit when the centered data matrix has an
/// (effectively) multi-dimensional null space - e.g. period-2 orbits -
/// so the minimizing direction is not unique. Requires >= 200 bounces
/// (ValidationError below).
IntegralFitReport integral_fit_residual(const BirkhoffOrbit& orbit);

/// How phase-portrait seeds are iterated: Kepler tables get their
/// coordinates on the lifted Birkhoff orbit (single-valued coordinates;
/// this is the conjugate dynamics), plain Birkhoff tables directly.
enum class PortraitMode { Kepler, Birkhoff };

struct PortraitPoint {
    int seed = 0;
    int k = 0;  // bounce index
    double s = 0.0;
    double phi = 0.0;
};

struct PortraitDataset {
    std::vector<PortraitPoint> rows;  // seed-major, bounce-minor order
    std::vector<int> truncated_seeds;  // seeds ended early by a tangency
    int n_s = 0, n_phi = 0, n_bounces = 0;
};

/// Iterate an n_s x n_phi grid of seeds, uniform on
/// [0,1) x (0.05, pi - 0.05), for n bounces each. Deterministic for
/// fixed inputs in both Exec modes.
PortraitDataset phase_portrait(const Table& table, int n_s, int n_phi, int n,
                               PortraitMode mode = PortraitMode::Kepler,
                               Exec exec = Exec::Parallel);

}  // namespace kbil
