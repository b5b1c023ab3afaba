#include "kbil/kepler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>

#include "kbil/birkhoff.hpp"
#include "kbil/errors.hpp"
#include "kbil/lifted_table.hpp"
#include "kbil/root_scan.hpp"

namespace kbil {

namespace {

double frac(double t) { return t - std::floor(t); }

/// Grid size resolving the arc's smallest wall feature: near-radial
/// parabolas hug the ray opposite the apse, and their two arms cross
/// the wall only sqrt(2 ell / r) apart in polar angle. Ask for ~8
/// samples across that width (ordinary arcs stay at the base grid).
int initial_grid(const ParabolicArc& arc, const Table& table) {
    int n = Table::kScanBase;
    const double dpsi =
        std::sqrt(2.0 * arc.latus_rectum() / table.max_radius());
    if (dpsi < 0.1) {
        const double want = 8.0 * kTwoPi / std::max(dpsi, 1e-4);
        while (n < want && n < (1 << 16)) n *= 2;
    }
    return n;
}

/// Sample the implicit parabola function G = |gamma| + <gamma, u0> - ell
/// on grid point i of n, reading the table's cached sample grids when n
/// matches one.
template <class G>
auto cached_value_at(const Table& table, G&& g_of) {
    return [&table, g_of](int n, int i) -> double {
        if (n % Table::kScanBase == 0) {
            const int m = n / Table::kScanBase;
            if ((m & (m - 1)) == 0) {
                const int lev = std::countr_zero(static_cast<unsigned>(m));
                if (lev < table.scan_levels()) {
                    const auto& s = table.samples(lev);
                    return g_of(Vec2{s.x[i], s.y[i]}, s.r[i]);
                }
            }
        }
        const Vec2 v = table.position(static_cast<double>(i) / n);
        return g_of(v, v.norm());
    };
}

WallHit finish_hit(const ParabolicArc& arc, const Table& table, double t,
                   double nu, double tol_tangency) {
    WallHit hit;
    hit.t = frac(t);
    hit.nu = nu;
    hit.frame = table.frame(hit.t);
    hit.state = arc_eval(arc, nu);
    hit.sin_angle =
        std::abs(cross(hit.frame.tangent, hit.state.p.normalized()));
    if (hit.sin_angle <= tol_tangency)
        throw TangencyDetected(
            "next_wall_intersection: grazing crossing (|sin| = " +
            std::to_string(hit.sin_angle) + ")");
    return hit;
}

WallHit next_radial_intersection(const ParabolicArc& arc, const Table& table,
                                 double r_start, double tol_root,
                                 double tol_tangency) {
    const Vec2 u0 = arc.apse_dir;
    auto value_at = cached_value_at(
        table, [u0](Vec2 v, double) { return cross(u0, v); });
    const auto scan =
        scan_periodic(value_at, 1.0, Table::kScanBase, 1 << 17);
    auto f = [&](double t) { return cross(u0, table.position(t)); };
    auto df = [&](double t) { return cross(u0, table.derivative(t)); };

    const double eps = 1e-9 * table.diameter();
    double best_r = 0.0, best_t = 0.0;
    bool found = false;
    for (const auto& b : scan.brackets) {
        const double t = refine_root(f, df, b, tol_root);
        const Vec2 x = table.position(t);
        if (dot(u0, x) <= 0.0) continue;  // crossing on the opposite ray
        const double r = x.norm();
        if (arc.orientation > 0) {
            // outgoing: first crossing at larger radius
            if (r > r_start + eps && (!found || r < best_r)) {
                best_r = r;
                best_t = t;
                found = true;
            }
        } else {
            // ingoing: first crossing at smaller radius
            if (r < r_start - eps && (!found || r > best_r)) {
                best_r = r;
                best_t = t;
                found = true;
            }
        }
    }
    if (!found) {
        if (arc.orientation < 0)
            throw CollisionReached(
                "next_wall_intersection: ingoing radial arc reaches the "
                "center before the wall (step it through the lift)");
        throw NoIntersection(
            "next_wall_intersection: no wall crossing ahead of an outgoing "
            "radial arc (internal error)");
    }
    return finish_hit(arc, table, best_t, best_r, tol_tangency);
}

}  // namespace

double kepler_energy(const PhaseState& s) {
    const double r = s.q.norm();
    if (r < kCollisionRadius)
        throw CollisionState("kepler_energy: |q| < 1e-12");
    return 0.5 * s.p.norm2() - 1.0 / r;
}

double angular_momentum(const PhaseState& s) { return cross(s.q, s.p); }

ParabolicArc arc_from_state(const PhaseState& s, double tol_energy) {
    const double r = s.q.norm();
    if (r < kCollisionRadius)
        throw CollisionState("arc_from_state: |q| < 1e-12");
    const double H = 0.5 * s.p.norm2() - 1.0 / r;
    if (std::abs(H) > tol_energy)
        throw NotZeroEnergy("arc_from_state: |H| = " + std::to_string(H) +
                            " exceeds tolerance");
    ParabolicArc a;
    a.L = cross(s.q, s.p);
    if (std::abs(a.L) < kRadialThreshold) {
        a.radial = true;
        a.apse_dir = s.q / r;
        a.apse_angle = std::atan2(a.apse_dir.y, a.apse_dir.x);
        a.orientation = dot(s.q, s.p) >= 0.0 ? +1 : -1;
        return a;
    }
    a.orientation = a.L > 0.0 ? +1 : -1;
    const Vec2 e = (s.p.norm2() - 1.0 / r) * s.q - dot(s.q, s.p) * s.p;
    a.apse_angle = std::atan2(e.y, e.x);
    a.apse_dir = e.normalized();  // |e| = 1 on the zero-energy shell
    return a;
}

PhaseState arc_eval(const ParabolicArc& arc, double nu) {
    if (arc.radial) {
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw DomainError("arc_eval: radial arcs take a radius nu > 0");
        const double speed = std::sqrt(2.0 / nu);
        return {arc.apse_dir * nu, arc.apse_dir * (arc.orientation * speed)};
    }
    if (!(std::abs(nu) < kPi))
        throw DomainError("arc_eval: anomaly outside (-pi, pi)");
    // half-angle forms: r = L^2 / (2 c^2) and the momentum components
    // 2 s c / |L| (radial), 2 c^2 / L (transverse) make H = 0 and
    // q x p = L identities rather than near-cancellations
    const double c = std::cos(0.5 * nu), sn = std::sin(0.5 * nu);
    const double r = arc.latus_rectum() / (2.0 * c * c);
    const double phi = arc.apse_angle + arc.orientation * nu;
    const Vec2 ur{std::cos(phi), std::sin(phi)};
    const Vec2 uphi = ur.perp();
    const double absL = std::abs(arc.L);
    return {ur * r,
            ur * (2.0 * sn * c / absL) + uphi * (2.0 * c * c / arc.L)};
}

double arc_anomaly(const ParabolicArc& arc, Vec2 q) {
    const double r = q.norm();
    if (r < kCollisionRadius)
        throw DomainError("arc_anomaly: point at the origin");
    if (arc.radial) {
        if (std::abs(cross(arc.apse_dir, q)) > 1e-8 * r ||
            dot(arc.apse_dir, q) <= 0.0)
            throw DomainError("arc_anomaly: point not on the radial ray");
        return r;
    }
    const double phi = std::atan2(q.y, q.x);
    const double nu = arc.orientation * wrap_angle(phi - arc.apse_angle);
    if (!(std::abs(nu) < kPi))
        throw DomainError("arc_anomaly: point at the arc's open end");
    const double c = std::cos(0.5 * nu);
    if (std::abs(2.0 * r * c * c - arc.latus_rectum()) >
        1e-8 * (r + arc.latus_rectum()))
        throw DomainError("arc_anomaly: point not on the parabola");
    return nu;
}

WallHit next_wall_intersection(const ParabolicArc& arc, const Table& table,
                               double nu_start, double tol_root,
                               double tol_tangency) {
    if (arc.radial)
        return next_radial_intersection(arc, table, nu_start, tol_root,
                                        tol_tangency);

    const Vec2 u0 = arc.apse_dir;
    const double ell = arc.latus_rectum();
    auto value_at = cached_value_at(table, [u0, ell](Vec2 v, double r) {
        return r + dot(v, u0) - ell;
    });
    const auto scan =
        scan_periodic(value_at, 1.0, initial_grid(arc, table), 1 << 18);
    auto f = [&](double t) {
        const Vec2 v = table.position(t);
        return v.norm() + dot(v, u0) - ell;
    };
    auto df = [&](double t) {
        const Vec2 v = table.position(t);
        return dot(v / v.norm() + u0, table.derivative(t));
    };

    // the arc is traversed with nu strictly increasing, so the first hit
    // is the crossing with the smallest anomaly beyond nu_start
    const double eps = 1e-9;
    double best_nu = kPi, best_t = 0.0;
    bool found = false;
    for (const auto& b : scan.brackets) {
        const double t = refine_root(f, df, b, tol_root);
        const Vec2 x = table.position(t);
        const double nu =
            arc.orientation * wrap_angle(std::atan2(x.y, x.x) - arc.apse_angle);
        if (nu <= nu_start + eps) continue;  // the launch point, or behind
        if (!found || nu < best_nu) {
            best_nu = nu;
            best_t = t;
            found = true;
        }
    }
    if (!found)
        throw NoIntersection(
            "next_wall_intersection: no wall crossing ahead on the arc "
            "(internal error for bounded tables)");
    return finish_hit(arc, table, best_t, best_nu, tol_tangency);
}

PhaseState outgoing_state(const BounceRecord& b) {
    return {b.point, b.dir_out * std::sqrt(2.0 / b.point.norm())};
}

namespace {

/// Assemble the record at a wall crossing: reflect the incoming
/// direction, pin the outgoing speed to the zero-energy shell, rebuild
/// the outgoing arc.
BounceRecord make_record(const Table& table, double t,
                         const BoundaryFrame& frame, Vec2 dir_in,
                         bool via_lift, double tol_energy) {
    BounceRecord r;
    r.t = t;
    r.point = frame.point;
    r.dir_in = dir_in;
    r.dir_out = reflect(dir_in, frame.normal).normalized();
    const PhaseState out = outgoing_state(r);
    r.arc_out = arc_from_state(out, tol_energy);
    r.diagnostics["energy_residual"] = std::abs(kepler_energy(out));
    r.diagnostics["abs_L"] = std::abs(angular_momentum(out));
    r.diagnostics["s"] = table.arc_length_fraction(t);
    r.diagnostics["phi"] = angle_from_tangent(frame.tangent, r.dir_out);
    r.diagnostics["via_lift"] = via_lift ? 1.0 : 0.0;
    return r;
}

/// Step one segment in the square-root cover: the lifted zero-energy
/// motion is free, so the segment is the straight chord from
/// gammahat(t) in the direction of w = 2 conj(z) p. Exact for every L;
/// used when |L| is too small for the wall scan to resolve the
/// parabola's hairpin (including genuine collision segments through O).
BounceRecord lifted_step(const Table& table, const LiftedTable& lifted,
                         const BounceRecord& bounce, const PhaseState& s0,
                         double tol_energy, double tol_root,
                         double tol_tangency) {
    const Vec2 z0 = lifted.position(bounce.t);
    const cplx w0 = 2.0 * std::conj(z0.c()) * s0.p.c();
    const ChordState chord{bounce.t, z0, Vec2(w0).normalized()};
    const ChordHit hit = chord_exit(lifted, chord, tol_root, tol_tangency);

    const double t1 = hit.arrival.t;
    const double t_base = t1 >= 1.0 ? t1 - 1.0 : t1;
    const BoundaryFrame f1 = table.frame(t_base);
    // w is constant along the chord; project the arrival direction back
    const cplx p_in =
        hit.arrival.direction.c() / std::conj(hit.arrival.point.c());
    return make_record(table, t_base, f1, Vec2(p_in).normalized(), true,
                       tol_energy);
}

}  // namespace

BounceRecord launch_record(const Table& table, double t0, double angle,
                           double tol_energy) {
    if (!(angle > 0.0 && angle < kPi))
        throw ValidationError("launch: angle must lie strictly in (0, pi)");
    const double t = frac(t0);
    const BoundaryFrame f = table.frame(t);
    const Vec2 dir =
        f.tangent * std::cos(angle) + f.tangent.perp() * std::sin(angle);
    BounceRecord r;
    r.t = t;
    r.point = f.point;
    r.dir_in = dir;
    r.dir_out = dir;
    const PhaseState out = outgoing_state(r);
    r.arc_out = arc_from_state(out, tol_energy);
    r.diagnostics["energy_residual"] = std::abs(kepler_energy(out));
    r.diagnostics["abs_L"] = std::abs(angular_momentum(out));
    r.diagnostics["s"] = table.arc_length_fraction(t);
    r.diagnostics["phi"] = angle;
    r.diagnostics["via_lift"] = 0.0;
    return r;
}

BounceRecord kepler_step(const Table& table, const BounceRecord& bounce,
                         const LiftedTable* lift, double tol_energy,
                         double tol_root, double tol_tangency) {
    const BoundaryFrame f0 = table.frame(bounce.t);
    if (!(dot(bounce.dir_out, f0.normal) < -1e-10))
        throw TangencyDetected(
            "kepler_step: outgoing direction does not point strictly into "
            "the interior");
    const PhaseState s0 = outgoing_state(bounce);
    if (std::abs(angular_momentum(s0)) < kLiftStepThreshold) {
        std::unique_ptr<LiftedTable> local;
        if (!lift) {
            local = std::make_unique<LiftedTable>(table);
            lift = local.get();
        }
        return lifted_step(table, *lift, bounce, s0, tol_energy, tol_root,
                           tol_tangency);
    }
    const ParabolicArc arc = arc_from_state(s0, tol_energy);
    const double nu0 = arc_anomaly(arc, s0.q);
    const WallHit hit =
        next_wall_intersection(arc, table, nu0, tol_root, tol_tangency);
    return make_record(table, hit.t, hit.frame, hit.state.p.normalized(),
                       false, tol_energy);
}

KeplerOrbit simulate_kepler(const Table& table, double t0, double angle,
                            int n_bounces, const LiftedTable* lift,
                            double tol_energy, double tol_root,
                            double tol_tangency) {
    if (n_bounces < 0)
        throw ValidationError("simulate: bounce count must be >= 0");
    KeplerOrbit orbit;
    orbit.bounces.push_back(launch_record(table, t0, angle, tol_energy));
    std::unique_ptr<LiftedTable> local;
    for (int k = 0; k < n_bounces; ++k) {
        const BounceRecord& cur = orbit.bounces.back();
        if (!lift &&
            cur.diagnostics.at("abs_L") < kLiftStepThreshold) {
            local = std::make_unique<LiftedTable>(table);
            lift = local.get();
        }
        try {
            orbit.bounces.push_back(kepler_step(table, cur, lift, tol_energy,
                                                tol_root, tol_tangency));
        } catch (const TangencyDetected&) {
            orbit.termination = "tangency";
            break;
        } catch (const CollisionReached&) {
            orbit.termination = "collision";
            break;
        }
    }
    return orbit;
}

}  // namespace kbil
