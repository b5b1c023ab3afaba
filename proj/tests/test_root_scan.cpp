#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kbil/geometry.hpp"
#include "kbil/root_scan.hpp"

using namespace kbil;

TEST_CASE("scan brackets the zeros of a sine, including one on a sample") {
    auto value_at = [](int n, int i) {
        return std::sin(kTwoPi * static_cast<double>(i) / n);
    };
    const auto scan = scan_periodic(value_at, 1.0, 16, 1 << 12);
    // sin(0) == 0.0 exactly lands on sample 0; the sign(0)=+ convention
    // must bracket it once (an odd count would break parity)
    REQUIRE(scan.brackets.size() == 2);

    auto f = [](double t) { return std::sin(kTwoPi * t); };
    auto df = [](double t) { return kTwoPi * std::cos(kTwoPi * t); };
    // roots at 0 (mod 1) and 1/2, in whichever order they were bracketed
    double d_zero = 1.0, d_half = 1.0;
    for (const auto& b : scan.brackets) {
        const double r = refine_root(f, df, b, 1e-15);
        d_zero = std::min(d_zero, std::min(std::abs(r), std::abs(r - 1.0)));
        d_half = std::min(d_half, std::abs(r - 0.5));
    }
    CHECK(d_zero < 1e-13);
    CHECK(d_half < 1e-13);
}

TEST_CASE("a positive dip without sign change is a graze, not a bracket") {
    auto value_at = [](int n, int i) {
        return 1.0001 - std::cos(kTwoPi * static_cast<double>(i) / n);
    };
    const auto scan = scan_periodic(value_at, 1.0, 64, 1 << 12, 0.01);
    CHECK(scan.brackets.size() == 0);
    CHECK(scan.graze_touches >= 1);
}

TEST_CASE("close crossing pairs are kept apart and refined accurately") {
    // sin^2(2 pi t) = 1e-4 has two roots within 0.0032 of t = 0 and two
    // more around t = 1/2
    auto g = [](double t) {
        const double s = std::sin(kTwoPi * t);
        return s * s - 1e-4;
    };
    auto value_at = [&](int n, int i) {
        return g(static_cast<double>(i) / n);
    };
    const auto scan = scan_periodic(value_at, 1.0, 16, 1 << 14);
    REQUIRE(scan.brackets.size() == 4);

    auto df = [](double t) {
        return 2.0 * kTwoPi * std::sin(kTwoPi * t) * std::cos(kTwoPi * t);
    };
    const double t_small = std::asin(0.01) / kTwoPi;
    double best = 1.0;
    for (const auto& b : scan.brackets) {
        const double r = refine_root(g, df, b, 1e-15);
        best = std::min(best, std::abs(r - t_small));
    }
    CHECK(best < 1e-12);
}

TEST_CASE("refinement reaches full precision on a smooth crossing") {
    auto f = [](double t) { return std::cos(kTwoPi * t) - 0.3; };
    auto df = [](double t) { return -kTwoPi * std::sin(kTwoPi * t); };
    const auto scan = scan_periodic(
        [&](int n, int i) { return f(static_cast<double>(i) / n); }, 1.0, 32,
        1 << 12);
    REQUIRE(scan.brackets.size() == 2);
    const double expect = std::acos(0.3) / kTwoPi;
    const double r = refine_root(f, df, scan.brackets[0], 1e-15);
    CHECK(std::abs(r - expect) < 1e-14);
}

TEST_CASE("grid doubling stops once the bracket count stabilizes") {
    auto value_at = [](int n, int i) {
        return std::cos(kTwoPi * static_cast<double>(i) / n);
    };
    const auto scan = scan_periodic(value_at, 1.0, 32, 1 << 12);
    CHECK(scan.brackets.size() == 2);
    CHECK(scan.grid_used == 64);  // 32 and 64 already agree
}
