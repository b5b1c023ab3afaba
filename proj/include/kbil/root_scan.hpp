#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

namespace kbil {

/// Sign-change bracket of a scalar function on a periodic domain.
struct Bracket {
    double lo = 0.0, hi = 0.0;
    double f_lo = 0.0, f_hi = 0.0;
};

struct ScanResult {
    std::vector<Bracket> brackets;
    int grid_used = 0;
    long graze_touches = 0;  // local |f| minima below graze_eps without a sign change
};

/// Collect the sign-change brackets of a periodic function sampled on a
/// uniform grid, doubling the grid until two consecutive resolutions agree
/// on the bracket count (guards against missed near-tangential crossings).
/// A zero landing exactly on a sample is treated as positive (sign(0) = +),
/// so it is bracketed exactly once, on its negative side; without this the
/// bracket count picks up a parity error whenever a root coincides with a
/// grid point.
///
/// value_at(n, i) must return f(period * i / n) for 0 <= i < n.
template <class ValueAt>
ScanResult scan_periodic(ValueAt&& value_at, double period, int n0, int n_max,
                         double graze_eps = 0.0) {
    auto collect = [&](int n, ScanResult& out) {
        out.brackets.clear();
        out.graze_touches = 0;
        double prev = value_at(n, 0);
        const double first = prev;
        double before_prev = 0.0;
        bool have_two = false;
        for (int i = 1; i <= n; ++i) {
            const double cur = (i == n) ? first : value_at(n, i);
            if ((prev < 0.0) != (cur < 0.0)) {
                Bracket b;
                b.lo = period * (i - 1) / n;
                b.hi = period * i / n;
                b.f_lo = prev;
                b.f_hi = cur;
                out.brackets.push_back(b);
            } else if (graze_eps > 0.0 && have_two) {
                // strict local minimum of |f| staying on one side of zero
                const double a = std::abs(before_prev), m = std::abs(prev), c = std::abs(cur);
                if (m > 0.0 && m < graze_eps && m < a && m < c) ++out.graze_touches;
            }
            before_prev = prev;
            have_two = true;
            prev = cur;
        }
        if (graze_eps > 0.0 && n >= 3) {
            // the triple centered on sample 0 wraps around and is not seen
            // by the loop above; tally it unless either flank is a bracket
            const double c1 = value_at(n, 1);
            if ((before_prev < 0.0) == (first < 0.0) &&
                (first < 0.0) == (c1 < 0.0)) {
                const double a = std::abs(before_prev), m = std::abs(first),
                             c = std::abs(c1);
                if (m > 0.0 && m < graze_eps && m < a && m < c) ++out.graze_touches;
            }
        }
        out.grid_used = n;
    };

    ScanResult cur, next;
    collect(n0, cur);
    for (int n = n0 * 2; n <= n_max; n *= 2) {
        collect(n, next);
        if (next.brackets.size() == cur.brackets.size()) return next;
        cur = next;
    }
    return cur;
}

/// Polish one bracketed root: bisection narrows the bracket, then Newton
/// (seeded at the bracket midpoint) finishes. Falls back to plain bisection
/// when a Newton step leaves the bracket.
template <class F, class DF>
double refine_root(F&& f, DF&& df, Bracket b, double tol = 1e-15) {
    double lo = b.lo, hi = b.hi, flo = b.f_lo;
    for (int i = 0; i < 24 && (hi - lo) > 1e-6 * (b.hi - b.lo); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 40; ++i) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = df(x);
        double step;
        if (d != 0.0 && std::isfinite(d)) {
            step = -fx / d;
            const double xn = x + step;
            if (!(xn > lo && xn < hi)) {
                x = 0.5 * (lo + hi);
                continue;
            }
            x = xn;
        } else {
            x = 0.5 * (lo + hi);
            continue;
        }
        if (std::abs(step) < tol * (1.0 + std::abs(x))) return x;
        if (hi - lo < tol * (1.0 + std::abs(x))) return x;
    }
    return x;
}

}  // namespace kbil
