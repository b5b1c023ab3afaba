#include "kbil/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

namespace kbil {

namespace {

const char* kTrajectoryHeader =
    "index,t,x,y,in_dx,in_dy,out_dx,out_dy,s,phi,energy_residual,abs_L,"
    "j_invariant\n";

struct TrajectoryRow {
    int index;
    double t, x, y, in_dx, in_dy, out_dx, out_dy, s, phi;
    double energy_residual, abs_L, j_invariant;
};

void write_row(std::ostream& out, const TrajectoryRow& r,
               OutputFormat format) {
    if (format == OutputFormat::Csv) {
        out << r.index << ',' << fmt_double(r.t) << ',' << fmt_double(r.x)
            << ',' << fmt_double(r.y) << ',' << fmt_double(r.in_dx) << ','
            << fmt_double(r.in_dy) << ',' << fmt_double(r.out_dx) << ','
            << fmt_double(r.out_dy) << ',' << fmt_double(r.s) << ','
            << fmt_double(r.phi) << ',' << fmt_double(r.energy_residual)
            << ',' << fmt_double(r.abs_L) << ','
            << fmt_double(r.j_invariant) << '\n';
        return;
    }
    nlohmann::ordered_json j;
    j["index"] = r.index;
    j["t"] = r.t;
    j["x"] = r.x;
    j["y"] = r.y;
    j["in_dx"] = r.in_dx;
    j["in_dy"] = r.in_dy;
    j["out_dx"] = r.out_dx;
    j["out_dy"] = r.out_dy;
    j["s"] = r.s;
    j["phi"] = r.phi;
    j["energy_residual"] = r.energy_residual;
    j["abs_L"] = r.abs_L;
    if (std::isnan(r.j_invariant))
        j["j_invariant"] = nullptr;
    else
        j["j_invariant"] = r.j_invariant;
    out << j.dump() << '\n';
}

void write_termination(std::ostream& out, const std::string& reason,
                       std::size_t n_rows, OutputFormat format) {
    if (reason.empty()) return;
    if (format == OutputFormat::Csv) {
        out << "# terminated: " << reason << " after " << n_rows
            << " recorded bounces\n";
    } else {
        nlohmann::ordered_json j;
        j["termination"] = reason;
        j["recorded_bounces"] = n_rows;
        out << j.dump() << '\n';
    }
}

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_kepler_orbit(std::ostream& out, const KeplerOrbit& orbit,
                        const Table& table, const ConservationReport& report,
                        OutputFormat format) {
    (void)table;
    if (format == OutputFormat::Csv) out << kTrajectoryHeader;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < orbit.bounces.size(); ++i) {
        const BounceRecord& b = orbit.bounces[i];
        TrajectoryRow r;
        r.index = static_cast<int>(i);
        r.t = b.t;
        r.x = b.point.x;
        r.y = b.point.y;
        r.in_dx = b.dir_in.x;
        r.in_dy = b.dir_in.y;
        r.out_dx = b.dir_out.x;
        r.out_dy = b.dir_out.y;
        r.s = b.diagnostics.at("s");
        r.phi = b.diagnostics.at("phi");
        r.energy_residual = b.diagnostics.at("energy_residual");
        r.abs_L = b.diagnostics.at("abs_L");
        r.j_invariant = (report.has_pullback && i < report.rows.size())
                            ? report.rows[i].j_pullback
                            : nan;
        write_row(out, r, format);
    }
    write_termination(out, orbit.termination, orbit.bounces.size(), format);
}

void write_birkhoff_orbit(std::ostream& out, const BirkhoffOrbit& orbit,
                          const CenteredEllipseFit& fit, OutputFormat format) {
    if (format == OutputFormat::Csv) out << kTrajectoryHeader;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < orbit.states.size(); ++i) {
        const ChordState& c = orbit.states[i];
        TrajectoryRow r;
        r.index = static_cast<int>(i);
        r.t = c.t;
        r.x = c.point.x;
        r.y = c.point.y;
        r.in_dx = orbit.dirs_in[i].x;
        r.in_dy = orbit.dirs_in[i].y;
        r.out_dx = c.direction.x;
        r.out_dy = c.direction.y;
        r.s = orbit.coords[i].s;
        r.phi = orbit.coords[i].phi;
        r.energy_residual = 0.0;
        r.abs_L = std::abs(cross(c.point, c.direction));
        r.j_invariant =
            fit.is_ellipse
                ? joachimsthal_form(fit, c.point, c.direction)
                : nan;
        write_row(out, r, format);
    }
    write_termination(out, orbit.termination, orbit.states.size(), format);
}

void write_portrait(std::ostream& out, const PortraitDataset& data,
                    OutputFormat format) {
    if (format == OutputFormat::Csv) out << "seed,k,s,phi\n";
    for (const PortraitPoint& p : data.rows) {
        if (format == OutputFormat::Csv) {
            out << p.seed << ',' << p.k << ',' << fmt_double(p.s) << ','
                << fmt_double(p.phi) << '\n';
        } else {
            nlohmann::ordered_json j;
            j["seed"] = p.seed;
            j["k"] = p.k;
            j["s"] = p.s;
            j["phi"] = p.phi;
            out << j.dump() << '\n';
        }
    }
    for (const int seed : data.truncated_seeds) {
        if (format == OutputFormat::Csv) {
            out << "# truncated seed: " << seed << '\n';
        } else {
            nlohmann::ordered_json j;
            j["truncated_seed"] = seed;
            out << j.dump() << '\n';
        }
    }
}

void write_fit_report(std::ostream& out, const IntegralFitReport& r) {
    out << "samples: " << r.n_samples << '\n'
        << "Q (unit Frobenius): q11=" << fmt_double(r.q11)
        << " q22=" << fmt_double(r.q22) << " q12=" << fmt_double(r.q12)
        << '\n'
        << "singular values: " << fmt_double(r.sigma1) << ' '
        << fmt_double(r.sigma2) << ' ' << fmt_double(r.sigma3) << '\n'
        << "J mean: " << fmt_double(r.j_mean)
        << "  J std: " << fmt_double(r.j_std) << '\n'
        << "residual std(J)/mean|J|: " << fmt_double(r.residual) << '\n';
}

}  // namespace kbil
