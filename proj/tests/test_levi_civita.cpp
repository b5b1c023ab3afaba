#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kbil/errors.hpp"
#include "kbil/kepler.hpp"
#include "kbil/levi_civita.hpp"
#include "kbil/lifted_table.hpp"
#include "kbil/table.hpp"

using namespace kbil;

namespace {

PhaseState random_shell_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double r = std::pow(10.0, -3.0 + 6.0 * uni(rng));  // 1e-3 .. 1e3
    const double th = kTwoPi * uni(rng);
    const double beta = kTwoPi * uni(rng);
    const Vec2 qhat{std::cos(th), std::sin(th)};
    const double speed = std::sqrt(2.0 / r);
    return {r * qhat,
            speed * (std::cos(beta) * qhat + std::sin(beta) * qhat.perp())};
}

}  // namespace

TEST_CASE("lift then project is the identity over six decades of radius") {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20000; ++trial) {
        const PhaseState s = random_shell_state(rng);
        for (BranchSign b : {BranchSign::Plus, BranchSign::Minus}) {
            const PhaseState back = project_state(lift_state(s, b));
            worst = std::max({worst, std::abs(back.q.x - s.q.x),
                              std::abs(back.q.y - s.q.y),
                              std::abs(back.p.x - s.p.x),
                              std::abs(back.p.y - s.p.y)});
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("the two branches are exact pointwise negations") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const PhaseState s = random_shell_state(rng);
        const LiftedState lp = lift_state(s, BranchSign::Plus);
        const LiftedState lm = lift_state(s, BranchSign::Minus);
        CHECK(lm.z.x == -lp.z.x);
        CHECK(lm.z.y == -lp.z.y);
        CHECK(lm.w.x == -lp.w.x);
        CHECK(lm.w.y == -lp.w.y);
    }
}

TEST_CASE("zero Kepler energy maps to |w| = 2 sqrt(2) and back") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const PhaseState s = random_shell_state(rng);
        CHECK(std::abs(hooke_energy(lift_state(s)) - 1.0) < 1e-13);

        // conversely, |w| = 2 sqrt(2) projects onto the zero-energy shell
        const double a = kTwoPi * uni(rng), b = kTwoPi * uni(rng);
        const double rz = 0.2 + 2.0 * uni(rng);
        const LiftedState l{{rz * std::cos(a), rz * std::sin(a)},
                            {2.0 * std::sqrt(2.0) * std::cos(b),
                             2.0 * std::sqrt(2.0) * std::sin(b)}};
        const PhaseState down = project_state(l);
        CHECK(std::abs(kepler_energy(down)) < 1e-13 / down.q.norm());
    }
}

TEST_CASE("the lift is conformal: angles between momenta are preserved") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const PhaseState s = random_shell_state(rng);
        const double beta = kTwoPi * uni(rng);
        PhaseState s2 = s;
        s2.p = s.p.norm() * Vec2{std::cos(beta), std::sin(beta)};
        const LiftedState l1 = lift_state(s);
        const LiftedState l2 = lift_state(s2);
        CHECK(std::abs(angle_between(l1.w, l2.w) -
                       angle_between(s.p, s2.p)) < 1e-12);
    }
}

TEST_CASE("origin singularities are refused") {
    CHECK_THROWS_AS(lift_state({{1e-15, 0.0}, {0.0, 1.0}}), OriginSingularity);
    CHECK_THROWS_AS(project_state({{1e-15, 0.0}, {0.0, 1.0}}),
                    OriginSingularity);
}

TEST_CASE("orbit lift: straight chords upstairs, exact antipode, projection") {
    const Table table = focused_ellipse_from_lift(1.2, 0.8);
    const LiftedTable lifted = lift_table(table);
    const KeplerOrbit orbit = simulate_kepler(table, 0.13, 1.1, 100, &lifted);
    REQUIRE(orbit.termination.empty());

    const auto [plus, minus] = lift_orbit(orbit, lifted);
    REQUIRE(plus.states.size() == orbit.bounces.size());
    REQUIRE(minus.states.size() == orbit.bounces.size());

    for (std::size_t k = 0; k < plus.states.size(); ++k) {
        const Vec2 z = plus.states[k].point;
        // squaring lands on the Kepler bounce point
        CHECK((Vec2(z.c() * z.c()) - orbit.bounces[k].point).norm() < 1e-10);
        // the antipodal lift is the exact negation
        CHECK(minus.states[k].point.x == -z.x);
        CHECK(minus.states[k].point.y == -z.y);
        CHECK(minus.states[k].direction.x == -plus.states[k].direction.x);
        CHECK(minus.states[k].direction.y == -plus.states[k].direction.y);
        // the lifted incidence angle equals the Kepler one (conformality)
        const BoundaryFrame f = table.frame(orbit.bounces[k].t);
        const double phi_down =
            angle_from_tangent(f.tangent, orbit.bounces[k].dir_out);
        CHECK(std::abs(plus.coords[k].phi - phi_down) < 1e-9);
    }
    for (std::size_t k = 0; k + 1 < plus.states.size(); ++k) {
        const Vec2 seg = plus.states[k + 1].point - plus.states[k].point;
        CHECK(dot(seg, plus.states[k].direction) > 0.0);
        CHECK(std::abs(cross(seg, plus.states[k].direction)) <
              1e-9 * seg.norm());
    }

    for (const BirkhoffOrbit* up : {&plus, &minus}) {
        const KeplerOrbit down = project_orbit(*up, lifted);
        REQUIRE(down.bounces.size() == orbit.bounces.size());
        for (std::size_t k = 0; k < down.bounces.size(); ++k) {
            CHECK((down.bounces[k].point - orbit.bounces[k].point).norm() <
                  1e-10);
            CHECK((down.bounces[k].dir_out - orbit.bounces[k].dir_out).norm() <
                  1e-10);
            CHECK(std::abs(down.bounces[k].t - orbit.bounces[k].t) < 1e-10);
        }
    }
}

TEST_CASE("radial bounces lift to chords through the origin") {
    const Table circ = Table::make_ellipse({0, 0}, 2.0, 2.0, 0.0);
    const LiftedTable lifted = lift_table(circ);
    const KeplerOrbit orbit = simulate_kepler(circ, 0.0, kPi / 2, 4, &lifted);
    REQUIRE(orbit.termination.empty());

    const auto [plus, minus] = lift_orbit(orbit, lifted);
    for (std::size_t k = 0; k + 1 < plus.states.size(); ++k) {
        const Vec2 a = plus.states[k].point, b = plus.states[k + 1].point;
        CHECK(a.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
        // consecutive lifted bounce points are antipodal: the chord is a
        // diameter through O (the regularized collision)
        CHECK((a + b).norm() < 1e-8);
        CHECK(std::abs(cross(plus.states[k].direction, -a)) < 1e-8);
    }
    const KeplerOrbit down = project_orbit(plus, lifted);
    for (std::size_t k = 0; k < down.bounces.size(); ++k)
        CHECK((down.bounces[k].point - Vec2{2.0, 0.0}).norm() < 1e-8);
}

TEST_CASE("a corrupted orbit is rejected as branch-discontinuous") {
    const Table table = focused_ellipse_from_lift(1.2, 0.8);
    const LiftedTable lifted = lift_table(table);
    KeplerOrbit orbit = simulate_kepler(table, 0.13, 1.1, 10, &lifted);
    REQUIRE(orbit.bounces.size() == 11);
    REQUIRE(std::abs(orbit.bounces[3].point.y) > 0.05);
    orbit.bounces[3].point.y = -orbit.bounces[3].point.y;
    CHECK_THROWS_AS(lift_orbit(orbit, lifted), BranchDiscontinuity);
}

TEST_CASE("table lift helper matches direct construction") {
    const Table table = focused_ellipse_from_lift(1.2, 0.8);
    const LiftedTable a = lift_table(table);
    const LiftedTable b{table};
    for (double t : {0.0, 0.31, 1.07, 1.93}) {
        CHECK(a.position(t).x == b.position(t).x);
        CHECK(a.position(t).y == b.position(t).y);
    }
}
