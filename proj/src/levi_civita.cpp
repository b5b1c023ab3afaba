#include "kbil/levi_civita.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "kbil/errors.hpp"

namespace kbil {

namespace {

/// Lifted-wall parameter of a branch value: t_base on sheet 0, or
/// t_base + 1 when zv sits on the negated sheet.
double lifted_param(const LiftedTable& lifted, double t_base, cplx zv) {
    const Vec2 sheet0 = lifted.position(t_base);
    const cplx s0 = sheet0.c();
    return std::norm(zv - s0) <= std::norm(zv + s0) ? t_base : t_base + 1.0;
}

}  // namespace

double hooke_energy(const LiftedState& l) { return l.w.norm2() / 8.0; }

PhaseState project_state(const LiftedState& l) {
    if (l.z.norm() < 1e-14)
        throw OriginSingularity("project_state: z at the origin");
    const cplx z = l.z.c();
    return {Vec2(z * z), Vec2(l.w.c() / (2.0 * std::conj(z)))};
}

LiftedState lift_state(const PhaseState& s, BranchSign b) {
    if (s.q.norm() < 1e-14)
        throw OriginSingularity("lift_state: q at the origin");
    cplx z = std::sqrt(s.q.c());
    if (b == BranchSign::Minus) z = -z;
    return {Vec2(z), Vec2(2.0 * std::conj(z) * s.p.c())};
}

LiftedTable lift_table(const Table& table) { return LiftedTable(table); }

std::pair<BirkhoffOrbit, BirkhoffOrbit> lift_orbit(const KeplerOrbit& orbit,
                                                   const LiftedTable& lifted,
                                                   BranchSign b0,
                                                   double match_tol) {
    BirkhoffOrbit up;
    up.termination = orbit.termination;
    if (orbit.bounces.empty()) return {up, up};

    auto push = [&](const BounceRecord& r, cplx zv) {
        const cplx zc = std::conj(zv);
        const Vec2 w_out = Vec2(zc * r.dir_out.c()).normalized();
        const Vec2 w_in = Vec2(zc * r.dir_in.c()).normalized();
        const double tl = lifted_param(lifted, r.t, zv);
        up.states.push_back({tl, Vec2(zv), w_out});
        up.coords.push_back(phase_coords(lifted, up.states.back()));
        up.dirs_in.push_back(w_in);
    };

    cplx z = std::sqrt(orbit.bounces.front().point.c());
    if (b0 == BranchSign::Minus) z = -z;
    push(orbit.bounces.front(), z);

    for (std::size_t k = 1; k < orbit.bounces.size(); ++k) {
        const BounceRecord& r = orbit.bounces[k];
        const Vec2 zp = up.states[k - 1].point;
        const Vec2 wdir = up.states[k - 1].direction;
        const cplx root = std::sqrt(r.point.c());
        // choose the square root lying ahead on the previous chord
        auto continues = [&](cplx cand) {
            const Vec2 d = Vec2(cand) - zp;
            return dot(wdir, d) > 0.0 &&
                   std::abs(cross(wdir, d)) <=
                       match_tol * std::max(1.0, d.norm());
        };
        const bool plus = continues(root), minus = continues(-root);
        if (plus == minus)
            throw BranchDiscontinuity(
                "lift_orbit: branch choice " +
                std::string(plus ? "ambiguous" : "impossible") +
                " at bounce " + std::to_string(k));
        z = plus ? root : -root;
        push(r, z);
    }

    // the antipodal lift: negate pointwise, shift the sheet by one
    BirkhoffOrbit down = up;
    for (std::size_t i = 0; i < down.states.size(); ++i) {
        ChordState& s = down.states[i];
        s.point = -s.point;
        s.direction = -s.direction;
        s.t = s.t >= 1.0 ? s.t - 1.0 : s.t + 1.0;
        down.dirs_in[i] = -down.dirs_in[i];
        down.coords[i] = phase_coords(lifted, s);
    }
    return {up, down};
}

KeplerOrbit project_orbit(const BirkhoffOrbit& orbit,
                          const LiftedTable& lifted) {
    KeplerOrbit out;
    out.termination = orbit.termination;
    const Table& base = lifted.base();
    const double w_mag = 2.0 * std::sqrt(2.0);
    for (std::size_t i = 0; i < orbit.states.size(); ++i) {
        const ChordState& st = orbit.states[i];
        const cplx z = st.point.c();
        if (std::abs(z) < 1e-14)
            throw OriginSingularity("project_orbit: bounce point at O");
        const cplx zc = std::conj(z);
        const Vec2 q = Vec2(z * z);
        const Vec2 p_out = Vec2(w_mag * st.direction.c() / (2.0 * zc));
        const Vec2 p_in = Vec2(w_mag * orbit.dirs_in[i].c() / (2.0 * zc));

        BounceRecord r;
        r.t = st.t >= 1.0 ? st.t - 1.0 : st.t;
        r.point = q;
        r.dir_in = p_in.normalized();
        r.dir_out = p_out.normalized();
        r.arc_out = arc_from_state({q, p_out});
        const BoundaryFrame f = base.frame(r.t);
        r.diagnostics["energy_residual"] =
            std::abs(kepler_energy({q, p_out}));
        r.diagnostics["abs_L"] = std::abs(cross(q, p_out));
        r.diagnostics["s"] = base.arc_length_fraction(r.t);
        r.diagnostics["phi"] = angle_from_tangent(f.tangent, r.dir_out);
        r.diagnostics["via_lift"] = 1.0;
        out.bounces.push_back(std::move(r));
    }
    return out;
}

}  // namespace kbil
