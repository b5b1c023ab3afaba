#include "kbil/birkhoff.hpp"

#include <cmath>
#include <string>

#include "kbil/errors.hpp"
#include "kbil/root_scan.hpp"

namespace kbil {

namespace {

double frac(double t) { return t - std::floor(t); }

template <class Curve>
ChordHit finish_chord(const Curve& curve, const ChordState& c, double u,
                      double proj, double tol_tangency) {
    ChordHit hit;
    hit.frame = curve.frame(u);
    hit.arrival = {u, hit.frame.point, c.direction};
    hit.chord_length = proj;
    hit.sin_angle = std::abs(cross(hit.frame.tangent, c.direction));
    if (hit.sin_angle <= tol_tangency)
        throw TangencyDetected("chord_exit: grazing arrival (|sin| = " +
                               std::to_string(hit.sin_angle) + ")");
    return hit;
}

/// Grid scan of the signed distance cross(v, gamma(u) - x0); its zeros
/// are the crossings of the chord's supporting line, filtered to the
/// forward ray by the projection along v. Reads the curve's cached
/// sample grids whenever the scan resolution matches one.
template <class Curve>
ChordHit chord_exit_scan(const Curve& curve, const ChordState& c,
                         double tol_root, double tol_tangency) {
    const Vec2 x0 = c.point, v = c.direction;
    const double period = curve.period();
    auto value_at = [&](int n, int i) -> double {
        for (int lev = 0; lev < curve.scan_levels(); ++lev) {
            const auto& g = curve.samples(lev);
            if (g.n == n)
                return v.x * (g.y[i] - x0.y) - v.y * (g.x[i] - x0.x);
        }
        const Vec2 q = curve.position(period * i / n);
        return cross(v, q - x0);
    };
    const auto scan =
        scan_periodic(value_at, period, curve.samples(0).n, 1 << 18);
    auto f = [&](double u) { return cross(v, curve.position(u) - x0); };
    auto df = [&](double u) { return cross(v, curve.derivative(u)); };

    const double eps = 1e-9 * curve.diameter();
    double best_proj = 0.0, best_u = 0.0;
    bool found = false;
    for (const auto& b : scan.brackets) {
        const double u = refine_root(f, df, b, tol_root);
        const double proj = dot(v, curve.position(u) - x0);
        if (proj <= eps) continue;  // the launch point, or behind the ray
        if (!found || proj < best_proj) {
            best_proj = proj;
            best_u = u;
            found = true;
        }
    }
    if (!found)
        throw NoIntersection(
            "chord_exit: no boundary crossing ahead (internal error for "
            "closed curves)");
    return finish_chord(curve, c, best_u, best_proj, tol_tangency);
}

/// Exact chord for ellipse tables: solve <E y, y> = 1 along the ray in
/// the body frame, E = diag(1/A^2, 1/B^2), with the numerically stable
/// quadratic-root pairing.
ChordHit chord_exit_ellipse(const Table& table, const ChordState& c,
                            double tol_tangency) {
    const EllipseParams& e = table.ellipse();
    const double cp = std::cos(e.rotation), sp = std::sin(e.rotation);
    const Vec2 d = c.point - e.center;
    const Vec2 y0{cp * d.x + sp * d.y, -sp * d.x + cp * d.y};
    const Vec2 u{cp * c.direction.x + sp * c.direction.y,
                 -sp * c.direction.x + cp * c.direction.y};
    const double A2 = e.semi_major * e.semi_major;
    const double B2 = e.semi_minor * e.semi_minor;
    const double qa = u.x * u.x / A2 + u.y * u.y / B2;
    const double qb = 2.0 * (y0.x * u.x / A2 + y0.y * u.y / B2);
    const double qc = y0.x * y0.x / A2 + y0.y * y0.y / B2 - 1.0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(disc > 0.0))
        throw NoIntersection("chord_exit: ray misses the ellipse");
    const double qroot = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    const double tau1 = qroot / qa;
    const double tau2 = qroot != 0.0 ? qc / qroot : 0.0;

    const double eps = 1e-9 * table.diameter();
    double tau = 0.0;
    bool found = false;
    for (const double cand : {tau1, tau2}) {
        if (cand <= eps) continue;
        if (!found || cand < tau) {
            tau = cand;
            found = true;
        }
    }
    if (!found)
        throw NoIntersection("chord_exit: no ellipse crossing ahead");

    const Vec2 y1 = y0 + tau * u;
    const double th =
        std::atan2(y1.y / e.semi_minor, y1.x / e.semi_major);
    const double t = frac(th / kTwoPi);
    return finish_chord(table, c, t, tau, tol_tangency);
}

template <class Curve>
ChordState step_impl(const Curve& curve, const ChordState& c, double tol_root,
                     double tol_tangency) {
    const ChordHit hit = chord_exit(curve, c, tol_root, tol_tangency);
    return {hit.arrival.t, hit.arrival.point,
            reflect(c.direction, hit.frame.normal).normalized()};
}

template <class Curve>
PhasePoint coords_impl(const Curve& curve, const ChordState& c) {
    return {curve.arc_length_fraction(c.t),
            angle_from_tangent(curve.frame(c.t).tangent, c.direction)};
}

template <class Curve>
ChordState launch_impl(const Curve& curve, PhasePoint start) {
    if (!(start.phi > 0.0 && start.phi < kPi))
        throw ValidationError("launch: angle must lie strictly in (0, pi)");
    const double t = curve.param_from_arc_fraction(start.s);
    const BoundaryFrame f = curve.frame(t);
    const Vec2 dir = f.tangent * std::cos(start.phi) +
                     f.tangent.perp() * std::sin(start.phi);
    return {t, f.point, dir};
}

template <class Curve>
BirkhoffOrbit simulate_impl(const Curve& curve, ChordState cur, int n_bounces,
                            double tol_root, double tol_tangency) {
    if (n_bounces < 0)
        throw ValidationError("simulate: bounce count must be >= 0");
    BirkhoffOrbit orbit;
    orbit.states.push_back(cur);
    orbit.coords.push_back(phase_coords(curve, cur));
    orbit.dirs_in.push_back(cur.direction);
    for (int k = 0; k < n_bounces; ++k) {
        try {
            const ChordHit hit =
                chord_exit(curve, cur, tol_root, tol_tangency);
            cur = {hit.arrival.t, hit.arrival.point,
                   reflect(cur.direction, hit.frame.normal).normalized()};
            orbit.states.push_back(cur);
            orbit.coords.push_back(
                {curve.arc_length_fraction(cur.t),
                 angle_from_tangent(hit.frame.tangent, cur.direction)});
            orbit.dirs_in.push_back(hit.arrival.direction);
        } catch (const TangencyDetected&) {
            orbit.termination = "tangency";
            break;
        }
    }
    return orbit;
}

}  // namespace

ChordHit chord_exit(const Table& table, const ChordState& c, double tol_root,
                    double tol_tangency) {
    if (table.kind() == Table::Kind::Ellipse)
        return chord_exit_ellipse(table, c, tol_tangency);
    return chord_exit_scan(table, c, tol_root, tol_tangency);
}

ChordHit chord_exit(const LiftedTable& table, const ChordState& c,
                    double tol_root, double tol_tangency) {
    return chord_exit_scan(table, c, tol_root, tol_tangency);
}

ChordState birkhoff_step(const Table& table, const ChordState& c,
                         double tol_root, double tol_tangency) {
    return step_impl(table, c, tol_root, tol_tangency);
}

ChordState birkhoff_step(const LiftedTable& table, const ChordState& c,
                         double tol_root, double tol_tangency) {
    return step_impl(table, c, tol_root, tol_tangency);
}

PhasePoint phase_coords(const Table& table, const ChordState& c) {
    return coords_impl(table, c);
}

PhasePoint phase_coords(const LiftedTable& table, const ChordState& c) {
    return coords_impl(table, c);
}

ChordState launch_chord(const Table& table, PhasePoint start) {
    return launch_impl(table, start);
}

ChordState launch_chord(const LiftedTable& table, PhasePoint start) {
    return launch_impl(table, start);
}

BirkhoffOrbit simulate_birkhoff(const Table& table, PhasePoint start,
                                int n_bounces, double tol_root,
                                double tol_tangency) {
    return simulate_impl(table, launch_chord(table, start), n_bounces,
                         tol_root, tol_tangency);
}

BirkhoffOrbit simulate_birkhoff(const LiftedTable& table, PhasePoint start,
                                int n_bounces, double tol_root,
                                double tol_tangency) {
    return simulate_impl(table, launch_chord(table, start), n_bounces,
                         tol_root, tol_tangency);
}

BirkhoffOrbit simulate_birkhoff(const Table& table, const ChordState& start,
                                int n_bounces, double tol_root,
                                double tol_tangency) {
    return simulate_impl(table, start, n_bounces, tol_root, tol_tangency);
}

BirkhoffOrbit simulate_birkhoff(const LiftedTable& table,
                                const ChordState& start, int n_bounces,
                                double tol_root, double tol_tangency) {
    return simulate_impl(table, start, n_bounces, tol_root, tol_tangency);
}

double joachimsthal(double A, double B, Vec2 x, Vec2 v) {
    if (!(A > 0.0) || !(B > 0.0))
        throw ValidationError("joachimsthal: semi-axes must be positive");
    const double on = x.x * x.x / (A * A) + x.y * x.y / (B * B);
    if (std::abs(on - 1.0) > 1e-9)
        throw PointOffEllipse("joachimsthal: point misses the ellipse (" +
                              std::to_string(on - 1.0) + " off)");
    return x.x * v.x / (A * A) + x.y * v.y / (B * B);
}

}  // namespace kbil
