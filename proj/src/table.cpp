#include "kbil/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

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

double frac(double t) { return t - std::floor(t); }

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

Table Table::make_ellipse(Vec2 center, double semi_major, double semi_minor,
                          double rotation) {
    if (!std::isfinite(center.x) || !std::isfinite(center.y) ||
        !std::isfinite(semi_major) || !std::isfinite(semi_minor) ||
        !std::isfinite(rotation))
        throw ValidationError("ellipse: non-finite parameter");
    if (!(semi_minor > 0.0) || !(semi_major >= semi_minor))
        throw ValidationError("ellipse: requires a >= b > 0");
    Table t;
    t.kind_ = Kind::Ellipse;
    t.ellipse_ = {center, semi_major, semi_minor, rotation};
    t.finalize();
    return t;
}

Table Table::make_fourier(std::vector<FourierCoeff> coeffs) {
    if (coeffs.empty()) throw ValidationError("fourier: empty coefficient list");
    std::map<int, cplx> dedup;
    for (const auto& fc : coeffs) {
        if (!std::isfinite(fc.c.real()) || !std::isfinite(fc.c.imag()))
            throw ValidationError("fourier: non-finite coefficient");
        if (std::abs(fc.k) > 64)
            throw ValidationError("fourier: harmonic index |k| > 64");
        dedup[fc.k] += fc.c;
    }
    Table t;
    t.kind_ = Kind::Fourier;
    for (const auto& [k, c] : dedup)
        if (std::abs(c) > 0.0) t.coeffs_.push_back({k, c});
    if (t.coeffs_.empty()) throw ValidationError("fourier: all coefficients zero");
    t.k_min_ = t.coeffs_.front().k;
    t.k_max_ = t.coeffs_.back().k;
    t.finalize();
    return t;
}

Table focused_ellipse_from_lift(double a, double b) {
    const double A = 0.5 * (a * a + b * b);
    const double B = a * b;
    return Table::make_ellipse({0.5 * (a * a - b * b), 0.0}, A, B, 0.0);
}

Vec2 Table::position(double t) const {
    t = frac(t);  // exact period-1 reduction
    if (kind_ == Kind::Ellipse) {
        const double th = kTwoPi * t;
        const double cx = ellipse_.semi_major * std::cos(th);
        const double cy = ellipse_.semi_minor * std::sin(th);
        const double cp = std::cos(ellipse_.rotation), sp = std::sin(ellipse_.rotation);
        return {ellipse_.center.x + cp * cx - sp * cy,
                ellipse_.center.y + sp * cx + cp * cy};
    }
    const cplx e = std::polar(1.0, kTwoPi * t);
    cplx pw = std::pow(e, k_min_);
    cplx sum = 0.0;
    int k = k_min_;
    for (const auto& fc : coeffs_) {
        while (k < fc.k) {
            pw *= e;
            ++k;
        }
        sum += fc.c * pw;
    }
    return Vec2(sum);
}

Vec2 Table::derivative(double t) const {
    t = frac(t);
    if (kind_ == Kind::Ellipse) {
        const double th = kTwoPi * t;
        const double cx = -ellipse_.semi_major * std::sin(th) * kTwoPi;
        const double cy = ellipse_.semi_minor * std::cos(th) * kTwoPi;
        const double cp = std::cos(ellipse_.rotation), sp = std::sin(ellipse_.rotation);
        return {cp * cx - sp * cy, sp * cx + cp * cy};
    }
    const cplx e = std::polar(1.0, kTwoPi * t);
    cplx pw = std::pow(e, k_min_);
    cplx sum = 0.0;
    int k = k_min_;
    for (const auto& fc : coeffs_) {
        while (k < fc.k) {
            pw *= e;
            ++k;
        }
        sum += fc.c * (cplx(0.0, kTwoPi * fc.k) * pw);
    }
    return Vec2(sum);
}

Vec2 Table::second_derivative(double t) const {
    t = frac(t);
    if (kind_ == Kind::Ellipse) {
        const double th = kTwoPi * t;
        const double w2 = kTwoPi * kTwoPi;
        const double cx = -ellipse_.semi_major * std::cos(th) * w2;
        const double cy = -ellipse_.semi_minor * std::sin(th) * w2;
        const double cp = std::cos(ellipse_.rotation), sp = std::sin(ellipse_.rotation);
        return {cp * cx - sp * cy, sp * cx + cp * cy};
    }
    const cplx e = std::polar(1.0, kTwoPi * t);
    cplx pw = std::pow(e, k_min_);
    cplx sum = 0.0;
    int k = k_min_;
    for (const auto& fc : coeffs_) {
        while (k < fc.k) {
            pw *= e;
            ++k;
        }
        const double w = kTwoPi * fc.k;
        sum += fc.c * (-w * w * pw);
    }
    return Vec2(sum);
}

BoundaryFrame Table::frame(double t) const {
    const Vec2 d1 = derivative(t);
    const double speed = d1.norm();
    if (speed < 1e-12)
        throw DegenerateParameterization("frame: |gamma'(t)| < 1e-12 at t=" +
                                         std::to_string(t));
    const Vec2 d2 = second_derivative(t);
    BoundaryFrame f;
    f.t = t;
    f.point = position(t);
    f.tangent = d1 / speed;
    f.normal = {f.tangent.y, -f.tangent.x};  // outward for ccw curves
    f.curvature = cross(d1, d2) / (speed * speed * speed);
    return f;
}

double Table::arc_length_fraction(double t) const {
    const double tf = frac(t);
    const double cell = 1.0 / arc_cells_;
    const int i = std::min(static_cast<int>(tf * arc_cells_), arc_cells_ - 1);
    const double a = i * cell;
    double partial = 0.0;
    const double half = 0.5 * (tf - a);
    const double mid = 0.5 * (tf + a);
    for (int g = 0; g < 9; ++g)
        partial += kGw[g] * derivative(mid + half * kGx[g]).norm();
    partial *= half;
    return (arc_cum_[i] + partial) / total_length_;
}

double Table::param_from_arc_fraction(double s) const {
    const double sf = frac(s);
    const double target = sf * total_length_;
    const auto it = std::upper_bound(arc_cum_.begin(), arc_cum_.end(), target);
    int i = static_cast<int>(it - arc_cum_.begin()) - 1;
    i = std::clamp(i, 0, arc_cells_ - 1);
    double t = (i + 0.5) / arc_cells_;
    for (int iter = 0; iter < 60; ++iter) {
        double err = arc_length_fraction(t) - sf;
        err -= std::round(err);  // wrap-aware: fractions live mod 1
        const double d = derivative(t).norm() / total_length_;
        const double step = err / d;
        t -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return frac(t);
}

int Table::winding_number(Vec2 p) const {
    // guard: p must stay away from the curve
    const auto& g = samples_.back();
    double best = 1e300;
    int best_i = 0;
    for (int i = 0; i < g.n; ++i) {
        const double d2 = (Vec2(g.x[i], g.y[i]) - p).norm2();
        if (d2 < best) {
            best = d2;
            best_i = i;
        }
    }
    double dist = std::sqrt(best);
    {  // local refinement around the closest sample
        double lo = (best_i - 1.0) / g.n, hi = (best_i + 1.0) / g.n;
        for (int it = 0; it < 40; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if ((position(m1) - p).norm2() < (position(m2) - p).norm2())
                hi = m2;
            else
                lo = m1;
        }
        dist = std::min(dist, (position(0.5 * (lo + hi)) - p).norm());
    }
    if (dist < 1e-10 * diameter_)
        throw PointOnBoundary("winding_number: point lies on the curve");

    int n = 1024;
    for (;;) {
        double total = 0.0;
        bool ok = true;
        double prev = std::atan2(position(0.0).y - p.y, position(0.0).x - p.x);
        for (int i = 1; i <= n; ++i) {
            const Vec2 q = position(static_cast<double>(i) / n);
            const double a = std::atan2(q.y - p.y, q.x - p.x);
            const double da = wrap_angle(a - prev);
            if (std::abs(da) > 0.5 * kPi) {
                ok = false;
                break;
            }
            total += da;
            prev = a;
        }
        if (ok) return static_cast<int>(std::lround(total / kTwoPi));
        n *= 2;
        if (n > (1 << 22))
            throw Error("winding_number: angle accumulation failed to converge");
    }
}

void Table::finalize() {
    // normalize orientation to counterclockwise (signed area > 0)
    {
        double area = 0.0;
        const int n = 2048;
        for (int i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / n;
            area += cross(position(t), derivative(t));
        }
        area *= 0.5 / n;
        if (area < 0.0) {
            if (kind_ == Kind::Ellipse) {
                throw ValidationError("ellipse: unexpected clockwise orientation");
            }
            // reverse parameter: gamma(-t) swaps c_k and c_{-k}
            for (auto& fc : coeffs_) fc.k = -fc.k;
            std::sort(coeffs_.begin(), coeffs_.end(),
                      [](const FourierCoeff& a, const FourierCoeff& b) {
                          return a.k < b.k;
                      });
            k_min_ = coeffs_.front().k;
            k_max_ = coeffs_.back().k;
        }
    }

    // sample caches: kScanBase .. kScanBase * 2^4 points
    samples_.resize(5);
    for (int lev = 0; lev < 5; ++lev) {
        SampleGrid& g = samples_[lev];
        g.n = kScanBase << lev;
        g.x.resize(g.n);
        g.y.resize(g.n);
        g.r.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            const Vec2 v = position(static_cast<double>(i) / g.n);
            g.x[i] = v.x;
            g.y[i] = v.y;
            g.r[i] = v.norm();
        }
    }

    // radii and diameter from the finest grid
    {
        const auto& g = samples_.back();
        double rmin = 1e300, rmax = 0.0;
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (int i = 0; i < g.n; ++i) {
            rmin = std::min(rmin, g.r[i]);
            rmax = std::max(rmax, g.r[i]);
            xmin = std::min(xmin, g.x[i]);
            xmax = std::max(xmax, g.x[i]);
            ymin = std::min(ymin, g.y[i]);
            ymax = std::max(ymax, g.y[i]);
        }
        min_radius_ = rmin;
        max_radius_ = rmax;
        diameter_ = std::hypot(xmax - xmin, ymax - ymin);
        if (diameter_ <= 0.0 || !std::isfinite(diameter_))
            throw ValidationError("table: degenerate extent");
    }

    // parameterization must not stall (frames need gamma' != 0)
    {
        const int n = 2048;
        for (int i = 0; i < n; ++i) {
            if (derivative(static_cast<double>(i) / n).norm() < 1e-9 * diameter_)
                throw ValidationError(
                    "table: degenerate parameterization (|gamma'| ~ 0 on grid)");
        }
    }

    // simplicity: segment-pair intersection test on a 2048-point polygon,
    // with a bounding-box prefilter
    {
        const int n = 2048;
        std::vector<Vec2> pts(n);
        std::vector<double> sx0(n), sx1(n), sy0(n), sy1(n);
        for (int i = 0; i < n; ++i)
            pts[i] = position(static_cast<double>(i) / n);
        for (int i = 0; i < n; ++i) {
            const Vec2 a = pts[i], b = pts[(i + 1) % n];
            sx0[i] = std::min(a.x, b.x);
            sx1[i] = std::max(a.x, b.x);
            sy0[i] = std::min(a.y, b.y);
            sy1[i] = std::max(a.y, b.y);
        }
        for (int i = 0; i < n; ++i) {
            const Vec2 a = pts[i], b = pts[(i + 1) % n];
            for (int j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // adjacent around wrap
                if (sx0[j] > sx1[i] || sx1[j] < sx0[i] || sy0[j] > sy1[i] ||
                    sy1[j] < sy0[i])
                    continue;
                if (segments_intersect(a, b, pts[j], pts[(j + 1) % n]))
                    throw ValidationError("table: curve is not simple (self-intersection)");
            }
        }
    }

    // cumulative arc length, cell count doubled until the total converges
    {
        int cells = 2048;
        double prev_total = -1.0;
        for (;;) {
            arc_cum_.assign(cells + 1, 0.0);
            double acc = 0.0;
            for (int i = 0; i < cells; ++i) {
                const double a = static_cast<double>(i) / cells;
                const double b = static_cast<double>(i + 1) / cells;
                const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
                double cell_len = 0.0;
                for (int g = 0; g < 9; ++g)
                    cell_len += kGw[g] * derivative(mid + half * kGx[g]).norm();
                acc += cell_len * half;
                arc_cum_[i + 1] = acc;
            }
            arc_cells_ = cells;
            total_length_ = acc;
            if (prev_total >= 0.0 &&
                std::abs(acc - prev_total) <= 1e-13 * acc)
                break;
            if (cells >= 16384) break;
            prev_total = acc;
            cells *= 2;
        }
    }

    // the Kepler center must be strictly interior
    {
        if (min_radius_ < 1e-10 * diameter_)
            throw ValidationError("table: origin lies on the boundary");
        int w;
        try {
            w = winding_number({0.0, 0.0});
        } catch (const PointOnBoundary&) {
            throw ValidationError("table: origin lies on the boundary");
        }
        if (w != 1)
            throw ValidationError(
                "table: origin not strictly interior (winding number " +
                std::to_string(w) + ", expected 1)");
    }
}

Table Table::from_json(const nlohmann::json& j) {
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "ellipse") {
            const auto c = j.at("center");
            const auto ax = j.at("semi_axes");
            const double rot = j.value("rotation", 0.0);
            return make_ellipse({c.at(0).get<double>(), c.at(1).get<double>()},
                                ax.at(0).get<double>(), ax.at(1).get<double>(), rot);
        }
        if (type == "fourier") {
            std::vector<FourierCoeff> coeffs;
            for (const auto& row : j.at("coeffs"))
                coeffs.push_back({row.at(0).get<int>(),
                                  {row.at(1).get<double>(), row.at(2).get<double>()}});
            return make_fourier(std::move(coeffs));
        }
        throw ValidationError("table: unknown type \"" + type + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("table: malformed JSON (") + e.what() + ")");
    }
}

Table Table::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("table: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("table: malformed JSON (") + e.what() + ")");
    }
    return from_json(j);
}

nlohmann::json Table::to_json() const {
    nlohmann::json j;
    if (kind_ == Kind::Ellipse) {
        j["type"] = "ellipse";
        j["center"] = {ellipse_.center.x, ellipse_.center.y};
        j["semi_axes"] = {ellipse_.semi_major, ellipse_.semi_minor};
        j["rotation"] = ellipse_.rotation;
    } else {
        j["type"] = "fourier";
        auto arr = nlohmann::json::array();
        for (const auto& fc : coeffs_)
            arr.push_back({fc.k, fc.c.real(), fc.c.imag()});
        j["coeffs"] = arr;
    }
    return j;
}

}  // namespace kbil
