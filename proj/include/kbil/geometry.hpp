#pragma once

#include <cmath>
#include <complex>

namespace kbil {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Point (or vector) of the plane; read as the complex number x + iy
/// wherever the square map acts on it.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    explicit Vec2(cplx z) : x(z.real()), y(z.imag()) {}

    cplx c() const { return {x, y}; }

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
    /// Rotation by +90 degrees (counterclockwise).
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Oriented boundary data at one curve parameter. The tangent follows the
/// (counterclockwise) parameterization; the normal points outward.
struct BoundaryFrame {
    double t = 0.0;
    Vec2 point;
    Vec2 tangent;   // unit
    Vec2 normal;    // unit, outward
    double curvature = 0.0;  // signed, > 0 for convex ccw curves
};

/// Elastic reflection of v about the wall with unit outward normal n:
/// v' = v - 2 (v.n) n. Tangential component preserved, |v'| = |v|.
inline Vec2 reflect(Vec2 v, Vec2 unit_normal) {
    const double vn = dot(v, unit_normal);
    return v - 2.0 * vn * unit_normal;
}

inline Vec2 reflect(Vec2 v, const BoundaryFrame& frame) {
    return reflect(v, frame.normal);
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    return a;
}

/// Angle from the tangent direction to v, in (-pi, pi]. Directions into
/// the interior of a ccw curve land in (0, pi).
inline double angle_from_tangent(Vec2 tangent, Vec2 v) {
    return std::atan2(cross(tangent, v), dot(tangent, v));
}

/// Unsigned angle between two directions, in [0, pi].
inline double angle_between(Vec2 a, Vec2 b) {
    return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

}  // namespace kbil
