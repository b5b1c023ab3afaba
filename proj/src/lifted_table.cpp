#include "kbil/lifted_table.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kbil/errors.hpp"

namespace kbil {

namespace {

// 9-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGx[9] = {
    0.0000000000000000, -0.8360311073266358, 0.8360311073266358,
    -0.9681602395076261, 0.9681602395076261, -0.3242534234038089,
    0.3242534234038089,  -0.6133714327005904, 0.6133714327005904};
constexpr double kGw[9] = {
    0.3302393550012598, 0.1806481606948574, 0.1806481606948574,
    0.0812743883615744, 0.0812743883615744, 0.3123470770400029,
    0.3123470770400029, 0.2606106964029354, 0.2606106964029354};

// Reduce t to tf in [0, 1) plus the parity of the discarded integer part.
// Both pieces are exact, so evaluations at t and t + 1 see the same tf
// with flipped parity and the results negate each other bitwise.
struct Fold {
    double tf;
    bool odd;
};

Fold fold2(double t) {
    const double fl = std::floor(t);
    return {t - fl, std::fmod(fl, 2.0) != 0.0};
}

}  // namespace

LiftedTable::LiftedTable(Table base) : base_(std::move(base)) {
    if (base_.min_radius() < std::max(1e-10, 1e-8 * base_.diameter()))
        throw OriginOnBoundary(
            "lift: wall passes too close to the origin to separate the "
            "two square-root branches");

    // March the branch around one base period on progressively finer
    // anchor grids until consecutive anchors stay well inside the
    // separation between the two sheets (half the local |gammahat|).
    int n = 1024;
    for (;;) {
        anchors_.assign(n, cplx{});
        cplx prev = std::sqrt(base_.position(0.0).c());
        anchors_[0] = prev;
        cplx closing{};
        bool fine_enough = true;
        for (int i = 1; i <= n; ++i) {
            cplx s = std::sqrt(base_.position(static_cast<double>(i) / n).c());
            if (std::norm(s - prev) > std::norm(s + prev)) s = -s;
            if (std::abs(s - prev) > 0.5 * std::abs(prev)) {
                fine_enough = false;
                break;
            }
            if (i < n)
                anchors_[i] = s;
            else
                closing = s;
            prev = s;
        }
        if (fine_enough) {
            // After one base period the branch must land on the opposite
            // sheet; closing onto +gammahat(0) would mean the base curve
            // winds an even number of times around the origin.
            if (std::norm(closing - anchors_[0]) <=
                std::norm(closing + anchors_[0]))
                throw WindingMismatch(
                    "lift: branch closes onto the same sheet after one "
                    "period (even winding about the origin)");
            break;
        }
        n *= 2;
        if (n > (1 << 20))
            throw BranchDiscontinuity(
                "lift: branch march failed to stabilize (wall too close "
                "to the origin?)");
    }

    // sample caches over [0, 2), mirrored so central symmetry is exact
    samples_.resize(5);
    for (int lev = 0; lev < 5; ++lev) {
        SampleGrid& g = samples_[lev];
        g.n = (2 * kScanBase) << lev;
        g.x.resize(g.n);
        g.y.resize(g.n);
        g.r.resize(g.n);
        const int half = g.n / 2;
        for (int i = 0; i < half; ++i) {
            const cplx z = sheet_point(static_cast<double>(i) / half);
            g.x[i] = z.real();
            g.y[i] = z.imag();
            g.r[i] = std::abs(z);
            g.x[i + half] = -g.x[i];
            g.y[i + half] = -g.y[i];
            g.r[i + half] = g.r[i];
        }
    }

    min_radius_ = std::sqrt(base_.min_radius());
    max_radius_ = std::sqrt(base_.max_radius());
    diameter_ = 2.0 * max_radius_;

    // cumulative arc length over [0, 2), cells doubled until the total
    // converges
    {
        int cells = 2048;
        double prev_total = -1.0;
        for (;;) {
            arc_cum_.assign(cells + 1, 0.0);
            double acc = 0.0;
            for (int i = 0; i < cells; ++i) {
                const double a = 2.0 * i / cells;
                const double b = 2.0 * (i + 1) / cells;
                const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
                double cell_len = 0.0;
                for (int g = 0; g < 9; ++g)
                    cell_len += kGw[g] * derivative(mid + half * kGx[g]).norm();
                acc += cell_len * half;
                arc_cum_[i + 1] = acc;
            }
            arc_cells_ = cells;
            total_length_ = acc;
            if (prev_total >= 0.0 && std::abs(acc - prev_total) <= 1e-13 * acc)
                break;
            if (cells >= 16384) break;
            prev_total = acc;
            cells *= 2;
        }
    }
}

cplx LiftedTable::sheet_point(double tf) const {
    cplx s = std::sqrt(base_.position(tf).c());
    const int n = static_cast<int>(anchors_.size());
    const int i = static_cast<int>(std::floor(tf * n + 0.5));
    // anchor n is the branch continuation at t = 1, i.e. -anchors_[0]
    const cplx a = (i >= n) ? -anchors_[0] : anchors_[i];
    if (std::norm(s - a) > std::norm(s + a)) s = -s;
    return s;
}

Vec2 LiftedTable::position(double t) const {
    const Fold f = fold2(t);
    const cplx z = sheet_point(f.tf);
    return f.odd ? Vec2(-z) : Vec2(z);
}

Vec2 LiftedTable::derivative(double t) const {
    const Fold f = fold2(t);
    cplx z = sheet_point(f.tf);
    if (f.odd) z = -z;
    return Vec2(base_.derivative(f.tf).c() / (2.0 * z));
}

Vec2 LiftedTable::second_derivative(double t) const {
    const Fold f = fold2(t);
    cplx z = sheet_point(f.tf);
    if (f.odd) z = -z;
    const cplx d1 = base_.derivative(f.tf).c() / (2.0 * z);
    return Vec2((base_.second_derivative(f.tf).c() - 2.0 * d1 * d1) /
                (2.0 * z));
}

BoundaryFrame LiftedTable::frame(double t) const {
    const Vec2 d1 = derivative(t);
    const double speed = d1.norm();
    if (speed < 1e-12)
        throw DegenerateParameterization("frame: |gammahat'(t)| < 1e-12 at t=" +
                                         std::to_string(t));
    const Vec2 d2 = second_derivative(t);
    BoundaryFrame f;
    f.t = t;
    f.point = position(t);
    f.tangent = d1 / speed;
    f.normal = {f.tangent.y, -f.tangent.x};
    f.curvature = cross(d1, d2) / (speed * speed * speed);
    return f;
}

double LiftedTable::arc_length_fraction(double t) const {
    const Fold f = fold2(t);
    const double t2 = f.tf + (f.odd ? 1.0 : 0.0);
    const double cell = 2.0 / arc_cells_;
    const int i =
        std::min(static_cast<int>(t2 / cell), arc_cells_ - 1);
    const double a = i * cell;
    double partial = 0.0;
    const double half = 0.5 * (t2 - a);
    const double mid = 0.5 * (t2 + a);
    for (int g = 0; g < 9; ++g)
        partial += kGw[g] * derivative(mid + half * kGx[g]).norm();
    partial *= half;
    return (arc_cum_[i] + partial) / total_length_;
}

double LiftedTable::param_from_arc_fraction(double s) const {
    const double sf = s - std::floor(s);
    const double target = sf * total_length_;
    const auto it = std::upper_bound(arc_cum_.begin(), arc_cum_.end(), target);
    int i = static_cast<int>(it - arc_cum_.begin()) - 1;
    i = std::clamp(i, 0, arc_cells_ - 1);
    double t = 2.0 * (i + 0.5) / arc_cells_;
    for (int iter = 0; iter < 60; ++iter) {
        double err = arc_length_fraction(t) - sf;
        err -= std::round(err);  // wrap-aware: fractions live mod 1
        const double d = derivative(t).norm() / total_length_;
        const double step = err / d;
        t -= step;
        if (std::abs(step) < 1e-15) break;
    }
    t = std::fmod(t, 2.0);
    if (t < 0.0) t += 2.0;
    return t;
}

}  // namespace kbil
