// Benchmark: serial reference vs OpenMP execution of the two grid
// sweeps (brute-force K-convexity, phase portrait). The parallel path
// must reproduce the serial result exactly; timings are informative.
//
// Usage: kbil-bench [table.json]   (default: the focused ellipse whose
// lift has semi-axes 1.2 and 0.8)

#include <chrono>
#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kbil/diagnostics.hpp"
#include "kbil/errors.hpp"
#include "kbil/table.hpp"

namespace {

using namespace kbil;

template <class Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

bool same_verdict(const KConvexVerdict& a, const KConvexVerdict& b) {
    if (a.verdict != b.verdict) return false;
    if (a.graze_touches != b.graze_touches) return false;
    if (a.witness.has_value() != b.witness.has_value()) return false;
    if (a.witness && (a.witness->theta0 != b.witness->theta0 ||
                      a.witness->ell != b.witness->ell ||
                      a.witness->crossings != b.witness->crossings))
        return false;
    return true;
}

bool same_portrait(const PortraitDataset& a, const PortraitDataset& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].seed != b.rows[i].seed || a.rows[i].k != b.rows[i].k ||
            a.rows[i].s != b.rows[i].s || a.rows[i].phi != b.rows[i].phi)
            return false;
    }
    return a.truncated_seeds == b.truncated_seeds;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const Table table = argc > 1 ? Table::load(argv[1])
                                     : focused_ellipse_from_lift(1.2, 0.8);
#ifdef _OPENMP
        std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n\n";
#else
        std::cout << "OpenMP not enabled\n\n";
#endif

        KConvexVerdict vs, vp;
        const double ts =
            seconds([&] { vs = brute_force_k_convex(table, {}, Exec::Serial); });
        const double tp = seconds(
            [&] { vp = brute_force_k_convex(table, {}, Exec::Parallel); });
        const bool brute_ok = same_verdict(vs, vp);
        std::printf("brute-force sweep  serial %8.3f s   parallel %8.3f s",
                    ts, tp);
        std::printf("   speedup %.2fx   results %s\n", ts / tp,
                    brute_ok ? "identical" : "DIFFER");

        PortraitDataset ps, pp;
        const double us = seconds(
            [&] { ps = phase_portrait(table, 24, 24, 200,
                                      PortraitMode::Kepler, Exec::Serial); });
        const double up = seconds(
            [&] { pp = phase_portrait(table, 24, 24, 200,
                                      PortraitMode::Kepler, Exec::Parallel); });
        const bool portrait_ok = same_portrait(ps, pp);
        std::printf("portrait sweep     serial %8.3f s   parallel %8.3f s",
                    us, up);
        std::printf("   speedup %.2fx   results %s\n", us / up,
                    portrait_ok ? "identical" : "DIFFER");

        return brute_ok && portrait_ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
