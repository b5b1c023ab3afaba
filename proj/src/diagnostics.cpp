#include "kbil/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "kbil/errors.hpp"
#include "kbil/levi_civita.hpp"
#include "kbil/root_scan.hpp"

namespace kbil {

namespace {

/// Wrap an axis angle to (-pi/2, pi/2].
double wrap_axis(double a) {
    while (a > 0.5 * kPi) a -= kPi;
    while (a <= -0.5 * kPi) a += kPi;
    return a;
}

}  // namespace

KConvexVerdict check_k_convex(const Table& table) {
    const LiftedTable lifted(table);
    KConvexVerdict out;
    // the lifted curvature is centrally symmetric, so t in [0, 1)
    // already covers the whole cover
    int n = 4096;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double kmin = 0.0;
    for (;;) {
        kmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            kmin = std::min(
                kmin, lifted.frame(static_cast<double>(i) / n).curvature);
        const double scale = std::abs(kmin) + 1.0 / lifted.diameter();
        if (std::isfinite(prev) && std::abs(kmin - prev) <= 1e-6 * scale)
            break;
        if (n >= (1 << 16)) break;
        prev = kmin;
        n *= 2;
    }
    out.kappa_min = kmin;
    out.grid_used = n;
    const double thr = 1e-6 / lifted.diameter();
    out.verdict = kmin > thr
                      ? KVerdict::KConvex
                      : (kmin < -thr ? KVerdict::NotKConvex
                                     : KVerdict::Marginal);
    return out;
}

int parabola_wall_crossings(const Table& table, double theta0, double ell,
                            int n_t, long* graze_touches) {
    if (n_t < 16)
        throw ValidationError("parabola sweep: need at least 16 wall samples");
    if (!(ell > 0.0))
        throw ValidationError("parabola sweep: latus rectum must be positive");
    const Vec2 u0{std::cos(theta0), std::sin(theta0)};
    auto value_at = [&](int n, int i) -> double {
        for (int lev = 0; lev < table.scan_levels(); ++lev) {
            const auto& g = table.samples(lev);
            if (g.n == n) return g.r[i] + g.x[i] * u0.x + g.y[i] * u0.y - ell;
        }
        const Vec2 v = table.position(static_cast<double>(i) / n);
        return v.norm() + dot(v, u0) - ell;
    };
    // a sampled sign change is a crossing (transversal up to grid
    // resolution); touches without a sign change are near-tangential
    // and only tallied
    const double graze_eps = 1e-6 * table.diameter();
    const auto scan = scan_periodic(value_at, 1.0, n_t,
                                    std::max(16 * n_t, 1 << 14), graze_eps);
    if (graze_touches) *graze_touches += scan.graze_touches;
    return static_cast<int>(scan.brackets.size());
}

KConvexVerdict brute_force_k_convex(const Table& table, BruteGrid grid,
                                    Exec exec) {
    if (grid.n_theta < 1 || grid.n_ell < 1)
        throw ValidationError("brute force: grid must be at least 1x1");
    const double ell_max = 2.0 * table.max_radius();
    const long long total =
        static_cast<long long>(grid.n_theta) * grid.n_ell;
    auto theta_of = [&](long long idx) {
        return kTwoPi * static_cast<double>(idx / grid.n_ell) / grid.n_theta;
    };
    auto ell_of = [&](long long idx) {
        return ell_max * static_cast<double>(idx % grid.n_ell + 1) /
               grid.n_ell;
    };

    long long best = total;  // sentinel: no witness
    long grazes = 0;
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8) reduction(min : best) \
    reduction(+ : grazes)
        for (long long idx = 0; idx < total; ++idx) {
            long gz = 0;
            const int c = parabola_wall_crossings(table, theta_of(idx),
                                                  ell_of(idx), grid.n_t, &gz);
            grazes += gz;
            if (c >= 3 && idx < best) best = idx;
        }
    } else {
        for (long long idx = 0; idx < total; ++idx) {
            long gz = 0;
            const int c = parabola_wall_crossings(table, theta_of(idx),
                                                  ell_of(idx), grid.n_t, &gz);
            grazes += gz;
            if (c >= 3 && idx < best) best = idx;
        }
    }

    KConvexVerdict out;
    out.kappa_min = std::numeric_limits<double>::quiet_NaN();
    out.graze_touches = grazes;
    out.grid_used = grid.n_t;
    if (best < total) {
        ParabolaWitness w;
        w.theta0 = theta_of(best);
        w.ell = ell_of(best);
        w.crossings =
            parabola_wall_crossings(table, w.theta0, w.ell, grid.n_t);
        out.witness = w;
        out.verdict = KVerdict::NotKConvex;
    } else {
        out.verdict = KVerdict::KConvex;
    }
    return out;
}

CenteredEllipseFit fit_centered_ellipse(const LiftedTable& lifted) {
    const SampleGrid& g = lifted.samples(lifted.scan_levels() - 1);
    Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (int i = 0; i < g.n; ++i) {
        const Eigen::Vector3d row(g.x[i] * g.x[i], g.y[i] * g.y[i],
                                  2.0 * g.x[i] * g.y[i]);
        N += row * row.transpose();
        rhs += row;
    }
    const Eigen::Vector3d a = N.ldlt().solve(rhs);

    CenteredEllipseFit fit;
    fit.m11 = a(0);
    fit.m22 = a(1);
    fit.m12 = a(2);
    fit.max_residual = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double r = fit.m11 * g.x[i] * g.x[i] +
                         fit.m22 * g.y[i] * g.y[i] +
                         2.0 * fit.m12 * g.x[i] * g.y[i] - 1.0;
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
    }
    const bool posdef =
        fit.m11 > 0.0 && fit.m11 * fit.m22 - fit.m12 * fit.m12 > 0.0;
    fit.is_ellipse = posdef && fit.max_residual < 1e-9;
    if (posdef) {
        Eigen::Matrix2d M;
        M << fit.m11, fit.m12, fit.m12, fit.m22;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
        // ascending eigenvalues: the smaller one belongs to the major axis
        fit.A = 1.0 / std::sqrt(es.eigenvalues()(0));
        fit.B = 1.0 / std::sqrt(es.eigenvalues()(1));
        fit.rotation = wrap_axis(
            std::atan2(es.eigenvectors()(1, 0), es.eigenvectors()(0, 0)));
    }
    return fit;
}

CenteredEllipseFit ellipse_form(const Table& table) {
    CenteredEllipseFit fit;
    if (table.kind() != Table::Kind::Ellipse) return fit;
    const EllipseParams& e = table.ellipse();
    if (e.center.norm() > 1e-12 * table.diameter()) return fit;
    const double iA2 = 1.0 / (e.semi_major * e.semi_major);
    const double iB2 = 1.0 / (e.semi_minor * e.semi_minor);
    const double c = std::cos(e.rotation), s = std::sin(e.rotation);
    fit.m11 = c * c * iA2 + s * s * iB2;
    fit.m22 = s * s * iA2 + c * c * iB2;
    fit.m12 = c * s * (iA2 - iB2);
    fit.max_residual = 0.0;
    fit.A = e.semi_major;
    fit.B = e.semi_minor;
    fit.rotation = wrap_axis(e.rotation);
    fit.is_ellipse = true;
    return fit;
}

double joachimsthal_form(const CenteredEllipseFit& fit, Vec2 z, Vec2 v) {
    return fit.m11 * z.x * v.x + fit.m22 * z.y * v.y +
           fit.m12 * (z.x * v.y + z.y * v.x);
}

ConservationReport conservation_report(const KeplerOrbit& orbit,
                                       const LiftedTable& lifted) {
    ConservationReport rep;
    rep.fit = fit_centered_ellipse(lifted);
    rep.has_pullback = rep.fit.is_ellipse;
    rep.rows.resize(orbit.bounces.size());
    for (std::size_t i = 0; i < orbit.bounces.size(); ++i) {
        const auto& d = orbit.bounces[i].diagnostics;
        rep.rows[i].energy_residual = d.at("energy_residual");
        rep.rows[i].abs_L = d.at("abs_L");
    }
    if (rep.has_pullback && !orbit.bounces.empty()) {
        const auto lifts = lift_orbit(orbit, lifted);
        const BirkhoffOrbit& up = lifts.first;
        for (std::size_t i = 0; i < up.states.size(); ++i)
            rep.rows[i].j_pullback = joachimsthal_form(
                rep.fit, up.states[i].point, up.states[i].direction);
    }
    return rep;
}

IntegralFitReport integral_fit_residual(const BirkhoffOrbit& orbit) {
    const std::size_t n = orbit.states.size();
    if (n < 200)
        throw ValidationError("integral fit: need >= 200 bounces, got " +
                              std::to_string(n));
    std::vector<std::array<double, 3>> rows(n);
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    double row_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 z = orbit.states[i].point;
        const Vec2 v = orbit.states[i].direction;
        rows[i] = {z.x * v.x, z.y * v.y, z.x * v.y + z.y * v.x};
        for (int j = 0; j < 3; ++j) {
            mean[j] += rows[i][j];
            row_scale = std::max(row_scale, std::abs(rows[i][j]));
        }
    }
    for (int j = 0; j < 3; ++j) mean[j] /= static_cast<double>(n);

    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d c(rows[i][0] - mean[0], rows[i][1] - mean[1],
                                rows[i][2] - mean[2]);
        S += c * c.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S);
    const Eigen::Vector3d ev = es.eigenvalues();  // ascending
    IntegralFitReport rep;
    rep.n_samples = static_cast<int>(n);
    rep.sigma1 = std::sqrt(std::max(ev(2), 0.0));
    rep.sigma2 = std::sqrt(std::max(ev(1), 0.0));
    rep.sigma3 = std::sqrt(std::max(ev(0), 0.0));
    // a (numerically) periodic orbit with one distinct data row leaves the
    // centered matrix at rounding noise: no variation to fit at all
    if (rep.sigma1 <=
        1e-10 * row_scale * std::sqrt(static_cast<double>(n)))
        throw DegenerateOrbit(
            "integral fit: bounce data has no variation (periodic orbit)");
    if (rep.sigma2 <= 1e-8 * rep.sigma1)
        throw DegenerateOrbit(
            "integral fit: centered data matrix is rank deficient (the "
            "minimizing direction is not unique; e.g. a periodic orbit)");

    Eigen::Vector3d q = es.eigenvectors().col(0);
    // unit Frobenius norm of the symmetric matrix [[q11,q12],[q12,q22]]
    q /= std::sqrt(q(0) * q(0) + q(1) * q(1) + 2.0 * q(2) * q(2));
    const double trace = q(0) + q(1);
    if (trace < 0.0 || (trace == 0.0 && q(2) < 0.0)) q = -q;
    rep.q11 = q(0);
    rep.q22 = q(1);
    rep.q12 = q(2);

    double jm = 0.0, jabs = 0.0;
    std::vector<double> J(n);
    for (std::size_t i = 0; i < n; ++i) {
        J[i] = q(0) * rows[i][0] + q(1) * rows[i][1] + q(2) * rows[i][2];
        jm += J[i];
        jabs += std::abs(J[i]);
    }
    jm /= static_cast<double>(n);
    jabs /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (J[i] - jm) * (J[i] - jm);
    rep.j_mean = jm;
    rep.j_std = std::sqrt(var / static_cast<double>(n));
    rep.residual = rep.j_std / std::max(jabs, 1e-300);
    return rep;
}

PortraitDataset phase_portrait(const Table& table, int n_s, int n_phi, int n,
                               PortraitMode mode, Exec exec) {
    if (n_s < 1 || n_phi < 1)
        throw ValidationError("portrait: grid must be at least 1x1");
    if (n < 0) throw ValidationError("portrait: bounce count must be >= 0");
    PortraitDataset out;
    out.n_s = n_s;
    out.n_phi = n_phi;
    out.n_bounces = n;
    const double delta = 0.05;
    const int n_seeds = n_s * n_phi;

    std::optional<LiftedTable> lifted;
    if (mode == PortraitMode::Kepler) lifted.emplace(table);

    std::vector<std::vector<PortraitPoint>> buf(n_seeds);
    std::vector<char> truncated(n_seeds, 0);
    auto run_seed = [&](int seed) {
        const int is = seed / n_phi, ip = seed % n_phi;
        const PhasePoint start{static_cast<double>(is) / n_s,
                               delta + (kPi - 2.0 * delta) * (ip + 0.5) /
                                   n_phi};
        const BirkhoffOrbit orbit =
            mode == PortraitMode::Kepler
                ? simulate_birkhoff(*lifted, start, n)
                : simulate_birkhoff(table, start, n);
        buf[seed].reserve(orbit.coords.size());
        for (std::size_t k = 0; k < orbit.coords.size(); ++k)
            buf[seed].push_back({seed, static_cast<int>(k),
                                 orbit.coords[k].s, orbit.coords[k].phi});
        if (!orbit.termination.empty()) truncated[seed] = 1;
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int seed = 0; seed < n_seeds; ++seed) run_seed(seed);
    } else {
        for (int seed = 0; seed < n_seeds; ++seed) run_seed(seed);
    }

    std::size_t total = 0;
    for (const auto& b : buf) total += b.size();
    out.rows.reserve(total);
    for (int seed = 0; seed < n_seeds; ++seed) {
        out.rows.insert(out.rows.end(), buf[seed].begin(), buf[seed].end());
        if (truncated[seed]) out.truncated_seeds.push_back(seed);
    }
    return out;
}

}  // namespace kbil
