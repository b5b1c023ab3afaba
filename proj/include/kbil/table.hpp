#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kbil/geometry.hpp"

namespace kbil {

struct EllipseParams {
    Vec2 center;
    double semi_major = 1.0;  // a >= b > 0
    double semi_minor = 1.0;
    double rotation = 0.0;  // radians, angle of the major axis
};

struct FourierCoeff {
    int k = 0;
    cplx c;
};

/// Uniform samples of a curve, cached per resolution for the scan-based
/// intersection solvers: positions and radii |gamma| at n points.
struct SampleGrid {
    int n = 0;
    std::vector<double> x, y, r;
};

/// A smooth closed wall curve: either an ellipse or a finite Fourier series
/// gamma(t) = sum c_k e^{2 pi i k t}, period 1 in t. Validated on
/// construction: simple, counterclockwise, with the origin strictly
/// interior (winding number 1). Immutable afterwards; safe to share
/// between threads.
class Table {
public:
    enum class Kind { Ellipse, Fourier };

    static Table make_ellipse(Vec2 center, double semi_major, double semi_minor,
                              double rotation = 0.0);
    static Table make_fourier(std::vector<FourierCoeff> coeffs);

    /// Parse {"type":"ellipse","center":[cx,cy],"semi_axes":[a,b],"rotation":psi}
    /// or {"type":"fourier","coeffs":[[k,re,im],...]}. Throws ValidationError
    /// naming the failed check.
    static Table from_json(const nlohmann::json& j);
    static Table load(const std::string& path);
    nlohmann::json to_json() const;

    Kind kind() const { return kind_; }
    const EllipseParams& ellipse() const { return ellipse_; }
    const std::vector<FourierCoeff>& fourier() const { return coeffs_; }

    double period() const { return 1.0; }

    Vec2 position(double t) const;
    Vec2 derivative(double t) const;
    Vec2 second_derivative(double t) const;

    /// Point, unit tangent, outward unit normal and signed curvature at t.
    /// Throws DegenerateParameterization if |gamma'(t)| < 1e-12.
    BoundaryFrame frame(double t) const;

    /// Arc-length fraction s(t) in [0,1), strictly increasing on [0,1).
    double arc_length_fraction(double t) const;
    /// Inverse of arc_length_fraction.
    double param_from_arc_fraction(double s) const;
    double total_length() const { return total_length_; }

    /// Winding number of the curve around p. Throws PointOnBoundary if p is
    /// within 1e-10 * diameter of the curve.
    int winding_number(Vec2 p) const;

    double min_radius() const { return min_radius_; }
    double max_radius() const { return max_radius_; }
    double diameter() const { return diameter_; }

    /// Cached uniform samples; level 0 holds kScanBase points, each further
    /// level doubles.
    static constexpr int kScanBase = 512;
    int scan_levels() const { return static_cast<int>(samples_.size()); }
    const SampleGrid& samples(int level) const { return samples_[level]; }

private:
    Table() = default;
    void finalize();  // orientation, caches, validation

    Kind kind_ = Kind::Ellipse;
    EllipseParams ellipse_;
    std::vector<FourierCoeff> coeffs_;
    int k_min_ = 0, k_max_ = 0;

    std::vector<SampleGrid> samples_;
    std::vector<double> arc_cum_;  // cumulative length at cell boundaries
    int arc_cells_ = 0;
    double total_length_ = 0.0;
    double min_radius_ = 0.0, max_radius_ = 0.0, diameter_ = 0.0;
};

/// Convenience: the focused ellipse whose square-root lift is the centered
/// ellipse with semi-axes (a, b): center ((a^2 - b^2)/2, 0), semi-axes
/// ((a^2 + b^2)/2, a b). The origin sits at one focus.
Table focused_ellipse_from_lift(double a, double b);

}  // namespace kbil
