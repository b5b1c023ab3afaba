#pragma once

#include <vector>

#include "kbil/table.hpp"

namespace kbil {

/// The square-root double cover of a wall curve: the closed curve
/// gammahat with gammahat(t)^2 = gamma(t mod 1), continued continuously
/// across the branch cut. Because the base curve winds once around the
/// origin, gammahat closes up only after two base periods, with
///
///     gammahat(t + 1) = -gammahat(t)
///
/// exactly (the cover is centrally symmetric). Parameter period 2; arc
/// fractions run over the full doubled curve. Immutable after
/// construction; safe to share between threads.
///
/// Construction throws OriginOnBoundary when the base wall comes within
/// max(1e-10, 1e-8 * diameter) of the origin (no room to separate the
/// two branches)
/// and WindingMismatch if the branch continuation fails to close onto the
/// opposite sheet after one base period.
class LiftedTable {
public:
    explicit LiftedTable(Table base);

    const Table& base() const { return base_; }

    double period() const { return 2.0; }

    Vec2 position(double t) const;
    Vec2 derivative(double t) const;
    Vec2 second_derivative(double t) const;

    /// Point, unit tangent, outward unit normal and signed curvature at t.
    /// Throws DegenerateParameterization if |gammahat'(t)| < 1e-12.
    BoundaryFrame frame(double t) const;

    /// Arc-length fraction s(t) in [0, 1) over the doubled curve.
    double arc_length_fraction(double t) const;
    double param_from_arc_fraction(double s) const;
    double total_length() const { return total_length_; }

    double min_radius() const { return min_radius_; }
    double max_radius() const { return max_radius_; }
    /// Equals 2 * max_radius: a centrally symmetric curve attains its
    /// diameter on an antipodal pair.
    double diameter() const { return diameter_; }

    /// Cached uniform samples over [0, 2); level 0 holds 2 * kScanBase
    /// points, each further level doubles. The grids are exactly
    /// centrally symmetric: sample i + n/2 is the negation of sample i.
    static constexpr int kScanBase = Table::kScanBase;
    int scan_levels() const { return static_cast<int>(samples_.size()); }
    const SampleGrid& samples(int level) const { return samples_[level]; }

private:
    /// Branch value on the sheet containing gammahat(0) = principal
    /// sqrt(gamma(0)), for tf in [0, 1).
    cplx sheet_point(double tf) const;

    Table base_;
    std::vector<cplx> anchors_;  // marched branch values at i / anchors_.size()

    std::vector<SampleGrid> samples_;
    std::vector<double> arc_cum_;
    int arc_cells_ = 0;
    double total_length_ = 0.0;
    double min_radius_ = 0.0, max_radius_ = 0.0, diameter_ = 0.0;
};

}  // namespace kbil
