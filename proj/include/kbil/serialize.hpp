#pragma once

#include <ostream>
#include <string>

#include "kbil/birkhoff.hpp"
#include "kbil/diagnostics.hpp"
#include "kbil/kepler.hpp"

namespace kbil {

enum class OutputFormat { Csv, Jsonl };

/// Shortest exact decimal form of a double ("%.17g"); NaN prints as
/// "nan". All writers below go through this, so identical data gives
/// byte-identical files.
std::string fmt_double(double v);

/// Trajectory rows. One row per bounce with the fixed column order
///   index,t,x,y,in_dx,in_dy,out_dx,out_dy,s,phi,energy_residual,abs_L,j_invariant
/// j_invariant is the Joachimsthal pullback (Kepler orbits) or the
/// Joachimsthal value (Birkhoff orbits on elliptic tables) and NaN/null
/// where undefined. A non-empty termination appends a trailing comment
/// row naming the reason.
void write_kepler_orbit(std::ostream& out, const KeplerOrbit& orbit,
                        const Table& table, const ConservationReport& report,
                        OutputFormat format);

/// Birkhoff rows share the trajectory schema; energy_residual is 0 by
/// construction (unit-speed free flight) and abs_L is |x cross v|.
/// j_invariant uses `fit` when it is an ellipse, else NaN.
void write_birkhoff_orbit(std::ostream& out, const BirkhoffOrbit& orbit,
                          const CenteredEllipseFit& fit, OutputFormat format);

/// Phase-portrait dataset: columns seed,k,s,phi; truncated seeds are
/// listed in trailing comment rows.
void write_portrait(std::ostream& out, const PortraitDataset& data,
                    OutputFormat format);

/// Human-readable integral-fit report (deterministic formatting).
void write_fit_report(std::ostream& out, const IntegralFitReport& report);

}  // namespace kbil
