#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "trisim/integrate.hpp"
#include "trisim/io.hpp"

using namespace trisim;
using Catch::Matchers::ContainsSubstring;

namespace {

PhaseState st1() {
    PhaseState s;
    s.q = {Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, -1}};
    s.p = {Vec2{1, 1}, Vec2{-0.2, -1.4}, Vec2{-0.8, 0.4}};
    return s;
}

// Generic triangle released from rest; collapses toward a two-body close
// approach under attraction.
PhaseState free_fall() {
    PhaseState s;
    s.q = {Vec2{1.0, 0.2}, Vec2{-0.6, 0.5}, Vec2{-0.4, -0.7}};
    s.p = {};
    return s;
}

} // namespace

TEST_CASE("acceleration closed forms", "[dynamics]") {
    const Masses m(1, 1, 1);

    SECTION("reference state at degree 2") {
        const auto a = acceleration(st1(), {2.0, m});
        CHECK(norm(a[0] - Vec2{-3, 0}) < 1e-15);
        CHECK(norm(a[1] - Vec2{0, -3}) < 1e-15);
        CHECK(norm(a[2] - Vec2{3, 3}) < 1e-15);
        Vec2 total{};
        for (int k = 0; k < 3; ++k) total += m[k] * a[k];
        CHECK(norm(total) < 1e-13);
    }

    SECTION("two-body Newtonian limit") {
        PhaseState s;
        s.q = {Vec2{0, 0}, Vec2{3, 0}, Vec2{1e9, 1e9}};
        const Masses mm(1.0, 2.5, 1.0);
        const auto a = acceleration(s, {-1.0, mm});
        CHECK_THAT(norm(a[0]), Catch::Matchers::WithinRel(2.5 / 9.0, 1e-9));
        CHECK_THAT(a[0].x, Catch::Matchers::WithinRel(2.5 / 9.0, 1e-9));
    }

    SECTION("equilateral symmetry: accelerations point at the centroid") {
        PhaseState s;
        const double h = std::sqrt(3.0) / 2.0;
        s.q = {Vec2{1, 0}, Vec2{-0.5, h}, Vec2{-0.5, -h}};
        for (double alpha : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            const auto a = acceleration(s, {alpha, m});
            const double mag = norm(a[0]);
            for (int k = 0; k < 3; ++k) {
                CHECK_THAT(norm(a[k]), Catch::Matchers::WithinRel(mag, 1e-13));
                // direction toward the origin (centroid)
                CHECK(wedge(a[k], s.q[k]) == Catch::Approx(0.0).margin(1e-13));
                CHECK(dot(a[k], s.q[k]) < 0.0);
            }
        }
    }

    SECTION("coincident pair is singular") {
        PhaseState s = st1();
        s.q[2] = s.q[0];
        CHECK_THROWS_WITH(acceleration(s, {-1.0, m}), ContainsSubstring("collision singularity"));
    }
}

TEST_CASE("Kepler two-body limit", "[dynamics]") {
    // Bodies 1, 2 on a circular relative orbit of radius 1; body 3 parked far
    // away so its coupling is negligible. Period = 2 pi / sqrt(m1 + m2).
    const Masses m(1, 1, 1);
    PhaseState s;
    s.q = {Vec2{0.5, 0}, Vec2{-0.5, 0}, Vec2{1e6, 0}};
    const double v = std::sqrt(2.0) / 2.0;
    s.p = {Vec2{0, v}, Vec2{0, -v}, Vec2{0, 0}};
    const double T = 2.0 * 3.14159265358979323846 / std::sqrt(2.0);

    const Trajectory traj = integrate(s, {-1.0, m}, T);
    const PhaseState e = traj.state_at(T);
    CHECK(norm(e.q[0] - s.q[0]) < 1e-8);
    CHECK(norm(e.q[1] - s.q[1]) < 1e-8);
    CHECK(traj.meta().termination == Termination::span_end);
}

TEST_CASE("conservation along the flow", "[dynamics]") {
    const Masses m(1, 1, 1);

    SECTION("degree 2 on the reference state over ten time units") {
        const Trajectory traj = integrate(st1(), {2.0, m}, 10.0);
        const auto d0 = derived_quantities(st1(), m, {2.0, m});
        CHECK(traj.meta().energy_drift / std::fabs(d0.E) < 1e-9);
        CHECK(traj.meta().L_drift < 10.0 * traj.meta().atol); // L starts near 0
    }

    SECTION("free fall conserves L = 0 to termination") {
        const Trajectory traj = integrate(free_fall(), {-1.0, m}, 50.0);
        CHECK(traj.meta().termination == Termination::collision_approach);
        CHECK(traj.meta().L_drift < 1e-11);
        CHECK(traj.meta().min_r < 1e-5);
    }
}

TEST_CASE("time reversal returns the initial state", "[dynamics]") {
    const Masses m(1, 1, 1);
    const double T = 10.0;
    const Trajectory fwd = integrate(st1(), {2.0, m}, T);
    const Trajectory bwd = integrate(fwd.state_at(T), {2.0, m}, 0.0);
    const PhaseState back = bwd.state_at(0.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(norm(back.q[k] - st1().q[k]) < 1e-7);
        CHECK(norm(back.p[k] - st1().p[k]) < 1e-7);
    }
}

TEST_CASE("moment-of-inertia curvature matches the energy partition", "[dynamics]") {
    // d^2I/dt^2 = 2 sum m q.a + 2K must equal 2(K - alpha V) (2(K - sum mm) at
    // alpha = 0), evaluated analytically along trajectories.
    const Masses m(1, 1, 1);
    for (double alpha : {-1.0, 0.0, 2.0}) {
        const PotentialSpec pot{alpha, m};
        const Trajectory traj = integrate(st1(), pot, 2.0);
        for (int n = 0; n <= 50; ++n) {
            const double t = traj.t_begin() + traj.span() * n / 50.0;
            const PhaseState s = traj.state_at(t);
            const auto d = derived_quantities(s, m, pot);
            const auto a = acceleration(s, pot);
            double qa = 0.0;
            for (int k = 0; k < 3; ++k) qa += m[k] * dot(s.q[k], a[k]);
            const double i_curv = 2.0 * d.K + 2.0 * qa;
            double expected = 0.0;
            if (alpha == 0.0) {
                double mm_sum = 0.0;
                for (int k = 0; k < 3; ++k) mm_sum += m[cyc_i(k)] * m[cyc_j(k)];
                expected = 2.0 * (d.K - mm_sum);
            } else {
                expected = 2.0 * (d.K - alpha * d.V);
            }
            const double scale = std::fabs(i_curv) + std::fabs(2.0 * d.K) + 1.0;
            CHECK(std::fabs(i_curv - expected) / scale < 1e-11);
        }
    }
}

TEST_CASE("dense output is consistent with accepted samples", "[dynamics]") {
    const Masses m(1, 1, 1);
    const Trajectory traj = integrate(st1(), {2.0, m}, 5.0);
    REQUIRE(traj.samples().size() > 3);
    for (const PhaseState& s : traj.samples()) {
        const PhaseState d = traj.state_at(s.t);
        for (int k = 0; k < 3; ++k) {
            CHECK(norm(d.q[k] - s.q[k]) < 1e-12);
            CHECK(norm(d.p[k] - s.p[k]) < 1e-12);
        }
    }
    CHECK_THROWS_WITH(traj.state_at(traj.t_end() + 1.0), ContainsSubstring("outside"));
    CHECK_THROWS_WITH(integrate(st1(), {2.0, m}, 0.0), ContainsSubstring("empty"));
}

TEST_CASE("dense output is accurate between steps", "[dynamics]") {
    // Energy evaluated at interpolated states stays at the tolerance level;
    // a defect in any interpolation coefficient would show up as O(1e-5) here.
    const Masses m(1, 1, 1);
    const PotentialSpec pot{2.0, m};
    const Trajectory traj = integrate(st1(), pot, 5.0);
    const double E0 = derived_quantities(st1(), m, pot).E;
    double worst = 0.0;
    for (int n = 0; n <= 500; ++n) {
        const PhaseState s = traj.state_at(traj.t_begin() + traj.span() * n / 500.0);
        worst = std::max(worst, std::fabs(derived_quantities(s, m, pot).E - E0));
    }
    CHECK(worst / std::fabs(E0) < 50.0 * traj.meta().rtol);
}

TEST_CASE("trajectory CSV export", "[dynamics]") {
    const Masses m(1, 1, 1);
    const Trajectory traj = integrate(st1(), {2.0, m}, 1.0);
    std::ostringstream out1, out2;
    write_trajectory_csv(out1, traj);
    write_trajectory_csv(out2, traj);
    CHECK(out1.str() == out2.str());

    std::istringstream in(out1.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,q1x,q1y,q2x,q2y,q3x,q3y,p1x,p1y,p2x,p2y,p3x,p3y,I,K,L,E,Delta");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == traj.samples().size());
}
