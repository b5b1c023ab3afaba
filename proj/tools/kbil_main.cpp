// kbil: command-line driver for the zero-energy Kepler billiard toolkit.
//
// Subcommands
//   simulate      iterate an orbit (kepler | birkhoff | lifted) -> rows
//   kconvex       run both K-convexity classifiers and compare them
//   conjugacy     iterate downstairs and upstairs from the same state and
//                 report the deviation between the two routes
//   portrait      phase portrait over a seed grid -> rows
//   fit-integral  least-squares quadratic invariant of a Birkhoff orbit
//
// Exit codes: 0 success; 1 validation/input error; 2 early termination
// (tangency/collision truncation, or a conjugacy run over tolerance);
// 3 K-convexity classifier disagreement (a bug, or a Marginal case).

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kbil/birkhoff.hpp"
#include "kbil/diagnostics.hpp"
#include "kbil/errors.hpp"
#include "kbil/kepler.hpp"
#include "kbil/levi_civita.hpp"
#include "kbil/serialize.hpp"
#include "kbil/table.hpp"

namespace {

using namespace kbil;

struct Opts {
    std::string table_path;
    std::string mode = "kepler";
    double t0 = 0.0;
    double angle = 1.5707963267948966;
    int bounces = 100;
    std::string out_path;
    std::string format = "csv";
    std::string grid = "24x24";
    unsigned long long seed = 0;
    double tol_energy = kDefaultEnergyTol;
    double tol_root = kDefaultRootTol;
    double tol_tangency = kDefaultTangencyTol;
    double tol_conjugacy = 1e-8;
};

OutputFormat parse_format(const std::string& f) {
    return f == "jsonl" ? OutputFormat::Jsonl : OutputFormat::Csv;
}

/// Open --out (or stdout) and hand the stream to fn.
template <class Fn>
int with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) return fn(std::cout);
    std::ofstream file(path);
    if (!file)
        throw ValidationError("cannot open output file: " + path);
    return fn(file);
}

template <class Curve>
ChordState make_start(const Curve& curve, double t0, double angle) {
    if (!(angle > 0.0 && angle < kPi))
        throw ValidationError("--angle must lie strictly in (0, pi)");
    const double per = curve.period();
    const double t = t0 - per * std::floor(t0 / per);
    const BoundaryFrame f = curve.frame(t);
    return {t, f.point,
            f.tangent * std::cos(angle) + f.tangent.perp() * std::sin(angle)};
}

ConservationReport basic_report(const KeplerOrbit& orbit) {
    ConservationReport rep;
    rep.rows.resize(orbit.bounces.size());
    for (std::size_t i = 0; i < orbit.bounces.size(); ++i) {
        rep.rows[i].energy_residual =
            orbit.bounces[i].diagnostics.at("energy_residual");
        rep.rows[i].abs_L = orbit.bounces[i].diagnostics.at("abs_L");
    }
    return rep;
}

int run_simulate(const Opts& o) {
    const Table table = Table::load(o.table_path);
    const OutputFormat fmt = parse_format(o.format);
    return with_output(o.out_path, [&](std::ostream& os) -> int {
        if (o.mode == "kepler") {
            const KeplerOrbit orbit =
                simulate_kepler(table, o.t0, o.angle, o.bounces, nullptr,
                                o.tol_energy, o.tol_root, o.tol_tangency);
            ConservationReport rep;
            try {
                const LiftedTable lifted(table);
                rep = conservation_report(orbit, lifted);
            } catch (const OriginOnBoundary&) {
                rep = basic_report(orbit);
            } catch (const BranchDiscontinuity&) {
                rep = basic_report(orbit);
            }
            write_kepler_orbit(os, orbit, table, rep, fmt);
            return orbit.termination.empty() ? 0 : 2;
        }
        if (o.mode == "birkhoff") {
            const BirkhoffOrbit orbit =
                simulate_birkhoff(table, make_start(table, o.t0, o.angle),
                                  o.bounces, o.tol_root, o.tol_tangency);
            write_birkhoff_orbit(os, orbit, ellipse_form(table), fmt);
            return orbit.termination.empty() ? 0 : 2;
        }
        // lifted: Birkhoff dynamics on the square-root cover
        const LiftedTable lifted(table);
        const BirkhoffOrbit orbit =
            simulate_birkhoff(lifted, make_start(lifted, o.t0, o.angle),
                              o.bounces, o.tol_root, o.tol_tangency);
        write_birkhoff_orbit(os, orbit, fit_centered_ellipse(lifted), fmt);
        return orbit.termination.empty() ? 0 : 2;
    });
}

const char* verdict_name(KVerdict v) {
    switch (v) {
        case KVerdict::KConvex: return "KConvex";
        case KVerdict::NotKConvex: return "NotKConvex";
        default: return "Marginal";
    }
}

int run_kconvex(const Opts& o) {
    const Table table = Table::load(o.table_path);
    const KConvexVerdict curv = check_k_convex(table);
    const KConvexVerdict brute = brute_force_k_convex(table);
    std::cout << "curvature classifier: " << verdict_name(curv.verdict)
              << "  kappa_min=" << fmt_double(curv.kappa_min) << "  (grid "
              << curv.grid_used << ")\n";
    std::cout << "brute-force oracle:   " << verdict_name(brute.verdict);
    if (brute.witness)
        std::cout << "  witness theta0=" << fmt_double(brute.witness->theta0)
                  << " ell=" << fmt_double(brute.witness->ell)
                  << " crossings=" << brute.witness->crossings;
    std::cout << "  (graze touches " << brute.graze_touches << ")\n";
    const bool agree = curv.verdict != KVerdict::Marginal &&
                       curv.verdict == brute.verdict;
    std::cout << "agreement: " << (agree ? "yes" : "no") << '\n';
    return agree ? 0 : 3;
}

int run_conjugacy(const Opts& o) {
    const Table table = Table::load(o.table_path);
    const LiftedTable lifted(table);
    const KeplerOrbit down = simulate_kepler(table, o.t0, o.angle, o.bounces,
                                             &lifted, o.tol_energy, o.tol_root,
                                             o.tol_tangency);

    // the same initial state stepped in the cover
    const BounceRecord& b0 = down.bounces.front();
    const PhaseState s0 = outgoing_state(b0);
    const Vec2 z0 = lifted.position(b0.t);
    const Vec2 w0 = Vec2(2.0 * std::conj(z0.c()) * s0.p.c()).normalized();
    const BirkhoffOrbit up =
        simulate_birkhoff(lifted, ChordState{b0.t, z0, w0}, o.bounces,
                          o.tol_root, o.tol_tangency);
    const KeplerOrbit projected = project_orbit(up, lifted);

    const std::size_t m =
        std::min(down.bounces.size(), projected.bounces.size());
    double max_dev = 0.0, max_ang = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        max_dev = std::max(
            max_dev,
            (down.bounces[i].point - projected.bounces[i].point).norm());
        max_ang = std::max(
            max_ang, std::abs(down.bounces[i].diagnostics.at("phi") -
                              up.coords[i].phi));
    }
    std::cout << "bounces compared: " << m << " (direct "
              << down.bounces.size() << ", lifted "
              << projected.bounces.size() << ")\n";
    std::cout << "max bounce-point deviation: " << fmt_double(max_dev)
              << '\n';
    std::cout << "max incidence-angle deviation: " << fmt_double(max_ang)
              << '\n';
    std::cout << "tolerance: " << fmt_double(o.tol_conjugacy) << '\n';
    if (!down.termination.empty() || !up.termination.empty()) {
        std::cout << "conjugacy: TRUNCATED (direct '" << down.termination
                  << "', lifted '" << up.termination << "')\n";
        return 2;
    }
    const bool ok = max_dev < o.tol_conjugacy;
    std::cout << "conjugacy: " << (ok ? "OK" : "EXCEEDED") << '\n';
    return ok ? 0 : 2;
}

int run_portrait(const Opts& o) {
    const Table table = Table::load(o.table_path);
    const auto sep = o.grid.find('x');
    int ns = 0, nphi = 0;
    try {
        if (sep == std::string::npos) throw std::invalid_argument("grid");
        ns = std::stoi(o.grid.substr(0, sep));
        nphi = std::stoi(o.grid.substr(sep + 1));
    } catch (const std::exception&) {
        throw ValidationError("--grid must look like NSxNPHI, e.g. 24x24");
    }
    const PortraitMode mode = o.mode == "birkhoff" ? PortraitMode::Birkhoff
                                                   : PortraitMode::Kepler;
    const PortraitDataset data =
        phase_portrait(table, ns, nphi, o.bounces, mode, Exec::Parallel);
    const OutputFormat fmt = parse_format(o.format);
    return with_output(o.out_path, [&](std::ostream& os) -> int {
        write_portrait(os, data, fmt);
        return 0;
    });
}

int run_fit_integral(const Opts& o) {
    const Table table = Table::load(o.table_path);
    BirkhoffOrbit orbit;
    if (o.mode == "birkhoff") {
        orbit = simulate_birkhoff(table, make_start(table, o.t0, o.angle),
                                  o.bounces, o.tol_root, o.tol_tangency);
    } else {
        // kepler and lifted agree here: fit in the conjugate picture
        const LiftedTable lifted(table);
        orbit = simulate_birkhoff(lifted, make_start(lifted, o.t0, o.angle),
                                  o.bounces, o.tol_root, o.tol_tangency);
    }
    if (!orbit.termination.empty()) {
        std::cerr << "error: orbit terminated early (" << orbit.termination
                  << ") after " << orbit.states.size() << " bounces\n";
        return 2;
    }
    const IntegralFitReport rep = integral_fit_residual(orbit);
    return with_output(o.out_path, [&](std::ostream& os) -> int {
        write_fit_report(os, rep);
        return 0;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-energy Kepler billiards and their Birkhoff lifts"};
    app.require_subcommand(1);
    Opts o;

    auto add_table = [&](CLI::App* c) {
        c->add_option("--table", o.table_path, "table description (JSON)")
            ->required();
    };
    auto add_mode = [&](CLI::App* c) {
        c->add_option("--mode", o.mode, "kepler | birkhoff | lifted")
            ->check(CLI::IsMember({"kepler", "birkhoff", "lifted"}));
    };
    auto add_launch = [&](CLI::App* c) {
        c->add_option("--t0", o.t0, "initial wall parameter");
        c->add_option("--angle", o.angle,
                      "launch angle from the tangent, in (0, pi)");
        c->add_option("--bounces", o.bounces, "number of bounces")
            ->check(CLI::NonNegativeNumber);
    };
    auto add_io = [&](CLI::App* c) {
        c->add_option("--out", o.out_path, "output path (default: stdout)");
        c->add_option("--format", o.format, "csv | jsonl")
            ->check(CLI::IsMember({"csv", "jsonl"}));
    };
    auto add_tols = [&](CLI::App* c) {
        c->add_option("--tol-energy", o.tol_energy,
                      "zero-energy residual tolerance");
        c->add_option("--tol-root", o.tol_root, "root refinement tolerance");
        c->add_option("--tol-tangency", o.tol_tangency,
                      "|sin| below which a crossing counts as grazing");
    };
    auto add_seed = [&](CLI::App* c) {
        c->add_option("--seed", o.seed,
                      "RNG seed (reserved for randomized sweeps; the "
                      "commands here are deterministic)");
    };

    CLI::App* sim = app.add_subcommand(
        "simulate", "iterate a billiard orbit and write trajectory rows");
    add_table(sim);
    add_mode(sim);
    add_launch(sim);
    add_io(sim);
    add_tols(sim);
    add_seed(sim);

    CLI::App* kc = app.add_subcommand(
        "kconvex", "classify the table by both K-convexity tests");
    add_table(kc);
    add_seed(kc);

    CLI::App* cj = app.add_subcommand(
        "conjugacy",
        "compare the direct Kepler iteration against the lifted route");
    add_table(cj);
    add_launch(cj);
    add_tols(cj);
    add_seed(cj);
    cj->add_option("--tol-conjugacy", o.tol_conjugacy,
                   "maximal allowed bounce-point deviation");

    CLI::App* pt = app.add_subcommand(
        "portrait", "phase portrait over a grid of seeds");
    add_table(pt);
    add_mode(pt);
    pt->add_option("--grid", o.grid, "seed grid NSxNPHI (default 24x24)");
    pt->add_option("--bounces", o.bounces, "bounces per seed")
        ->check(CLI::NonNegativeNumber);
    add_io(pt);
    add_seed(pt);

    CLI::App* fi = app.add_subcommand(
        "fit-integral",
        "fit the conserved quadratic form along a Birkhoff orbit");
    add_table(fi);
    add_mode(fi);
    add_launch(fi);
    add_io(fi);
    add_tols(fi);
    add_seed(fi);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) return run_simulate(o);
        if (*kc) return run_kconvex(o);
        if (*cj) return run_conjugacy(o);
        if (*pt) return run_portrait(o);
        if (*fi) return run_fit_integral(o);
    } catch (const kbil::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
