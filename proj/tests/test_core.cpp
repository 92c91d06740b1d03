#include <catch2/catch_amalgamated.hpp>

#include "trisim/derived.hpp"
#include "trisim/projection.hpp"
#include "trisim/random.hpp"
#include "trisim/state.hpp"

using namespace trisim;
using Catch::Matchers::ContainsSubstring;

namespace {

// Reference fixture used throughout the suite: equal masses, centred,
// Sum p = 0, L = 0, dI/dt = 0 all hold exactly in binary floating point.
PhaseState st1() {
    PhaseState s;
    s.q = {Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, -1}};
    s.p = {Vec2{1, 1}, Vec2{-0.2, -1.4}, Vec2{-0.8, 0.4}};
    return s;
}

PhaseState random_state(Rng& rng, double spread = 1.0) {
    PhaseState s;
    for (int k = 0; k < 3; ++k) {
        s.q[k] = rng.log_uniform(0.5, 2.0) * spread * rng.unit_vec();
        s.p[k] = rng.log_uniform(0.3, 3.0) * rng.unit_vec();
    }
    return s;
}

} // namespace

TEST_CASE("derived quantities on the reference state", "[core]") {
    const Masses m(1, 1, 1);
    const auto d = derived_quantities(st1(), m, {2.0, m});
    CHECK(d.M == 3.0);
    CHECK(d.I == 4.0);
    CHECK_THAT(d.K, Catch::Matchers::WithinRel(4.8, 1e-15));
    CHECK_THAT(d.L, Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THAT(d.dIdt, Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THAT(d.kappa, Catch::Matchers::WithinRel(std::sqrt(0.4), 1e-15));
    CHECK(d.Delta == 1.5);
    CHECK_THAT(d.r[0], Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-15));
    CHECK_THAT(d.r[1], Catch::Matchers::WithinRel(std::sqrt(5.0), 1e-15));
    CHECK_THAT(d.r[2], Catch::Matchers::WithinRel(std::sqrt(5.0), 1e-15));
}

TEST_CASE("derived quantities degenerate inputs", "[core]") {
    const Masses m(1, 1, 1);

    SECTION("equilateral at rest") {
        PhaseState s;
        const double h = std::sqrt(3.0) / 2.0;
        s.q = {Vec2{1, 0}, Vec2{-0.5, h}, Vec2{-0.5, -h}};
        s.p = {};
        const auto d = derived_quantities(s, m, {-1.0, m});
        CHECK(d.K == 0.0);
        CHECK(d.L == 0.0);
        CHECK(d.kappa == 0.0);
        // area of the triangle with circumradius 1
        CHECK_THAT(d.Delta, Catch::Matchers::WithinRel(3.0 * std::sqrt(3.0) / 4.0, 1e-14));
    }

    SECTION("collinear bodies have zero oriented area") {
        const Masses mu(1, 2, 1);
        PhaseState s;
        s.q = {Vec2{1, 0}, Vec2{0, 0}, Vec2{-1, 0}}; // already mass-centred
        const auto d = derived_quantities(s, mu, {-1.0, mu});
        CHECK(d.Delta == 0.0);
    }

    SECTION("coincident bodies are singular below degree 2") {
        PhaseState s = st1();
        s.q[1] = s.q[0];
        CHECK_THROWS_WITH(derived_quantities(s, m, {-1.0, m}),
                          ContainsSubstring("collision singularity"));
        CHECK_NOTHROW(derived_quantities(s, m, {2.0, m}));
    }

    SECTION("all bodies at the origin") {
        PhaseState s;
        s.p = {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 0}};
        CHECK_THROWS_WITH(derived_quantities(s, m, {2.0, m}),
                          ContainsSubstring("triple collision"));
    }

    SECTION("non-finite input rejected") {
        PhaseState s = st1();
        s.q[0].x = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_WITH(derived_quantities(s, m, {2.0, m}),
                          ContainsSubstring("non-finite"));
    }
}

TEST_CASE("two forms of the moment of inertia agree", "[core]") {
    Rng rng(20240601);
    for (int n = 0; n < 300; ++n) {
        const Masses m(rng.log_uniform(0.1, 10.0), rng.log_uniform(0.1, 10.0),
                       rng.log_uniform(0.1, 10.0));
        const PhaseState s = random_state(rng);
        const auto d = derived_quantities(s, m, {-1.0, m});
        double pairs = 0.0;
        for (int k = 0; k < 3; ++k)
            pairs += m[cyc_i(k)] * m[cyc_j(k)] * d.r_opposite(k) * d.r_opposite(k);
        // I here is about the origin; the pair form measures the centred I.
        const Vec2 c = barycentre(s.q, m);
        const double I_centred = d.I - d.M * norm2(c);
        CHECK_THAT(d.M * I_centred, Catch::Matchers::WithinRel(pairs, 1e-12));
    }
}

TEST_CASE("constraint projection", "[core]") {
    const Masses m(1, 1, 1);

    SECTION("feasible state is a fixed point") {
        const PhaseState out = project_constraints(st1(), m);
        for (int k = 0; k < 3; ++k) {
            CHECK(norm(out.q[k] - st1().q[k]) < 1e-14);
            CHECK(norm(out.p[k] - st1().p[k]) < 1e-14);
        }
    }

    SECTION("zero_linear alone removes the mean momentum") {
        PhaseState s = st1();
        s.p = {Vec2{1, 0}, Vec2{1, 0}, Vec2{1, 0}};
        const PhaseState out = project_constraints(s, m, {true, false, false});
        for (int k = 0; k < 3; ++k) CHECK(norm(out.p[k]) < 1e-15);
    }

    SECTION("projection enforces all flagged constraints and is idempotent") {
        Rng rng(77);
        for (int n = 0; n < 200; ++n) {
            const Masses mm(rng.log_uniform(0.1, 10.0), rng.log_uniform(0.1, 10.0),
                            rng.log_uniform(0.1, 10.0));
            const PhaseState out = project_constraints(random_state(rng), mm);
            const auto d = derived_quantities(out, mm, {-1.0, mm});
            Vec2 sp = out.p[0] + out.p[1] + out.p[2];
            const double scale = std::max(1.0, std::sqrt(d.K * d.I));
            CHECK(norm(sp) <= 1e-13 * scale);
            CHECK(std::fabs(d.L) <= 1e-13 * scale);
            CHECK(std::fabs(d.dIdt) <= 1e-13 * scale);
            CHECK(norm(barycentre(out.q, mm)) <= 1e-13);

            const PhaseState twice = project_constraints(out, mm);
            for (int k = 0; k < 3; ++k) CHECK(norm(twice.p[k] - out.p[k]) <= 1e-13 * scale);
        }
    }

    SECTION("momentum ratios equal kappa on feasible states") {
        Rng rng(1234);
        for (int n = 0; n < 200; ++n) {
            const Masses mm(rng.log_uniform(0.1, 10.0), rng.log_uniform(0.1, 10.0),
                            rng.log_uniform(0.1, 10.0));
            const PhaseState out = project_constraints(random_state(rng), mm);
            const auto d = derived_quantities(out, mm, {-1.0, mm});
            const auto v = velocities(out, mm);
            for (int k = 0; k < 3; ++k) {
                const int i = cyc_i(k), j = cyc_j(k);
                CHECK_THAT(norm(out.p[k]) / d.r_opposite(k),
                           Catch::Matchers::WithinRel(d.kappa, 1e-10));
                const double pair_area = wedge(out.q[i], out.q[j]) / d.I +
                                         wedge(v[i], v[j]) / d.K;
                CHECK(std::fabs(pair_area) < 1e-10);
            }
        }
    }

    SECTION("degenerate geometry is rank deficient") {
        PhaseState s;
        s.p = {Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, -1}};
        CHECK_THROWS_WITH(project_constraints(s, m, {false, true, true}),
                          ContainsSubstring("rank deficient"));
    }

    SECTION("at least one flag required") {
        CHECK_THROWS_WITH(project_constraints(st1(), m, {false, false, false}),
                          ContainsSubstring("no constraints"));
    }
}

TEST_CASE("lagrange identity residual", "[core]") {
    const Masses m(1, 1, 1);

    SECTION("reference positions, k = 3") {
        CHECK(lagrange_identity_residual(st1().q, m, 2) == 0.0);
    }

    SECTION("zero triplet") {
        CHECK(lagrange_identity_residual({}, m, 0) == 0.0);
    }

    SECTION("non-centred input rejected") {
        const std::array<Vec2, 3> eta = {Vec2{1, 0}, Vec2{1, 0}, Vec2{1, 0}};
        CHECK_THROWS_WITH(lagrange_identity_residual(eta, m, 0),
                          ContainsSubstring("centroid not removed"));
    }

    SECTION("fuzz: centred triplets stay below 1e-12") {
        Rng rng(5150);
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            const Masses mm(rng.log_uniform(0.1, 10.0), rng.log_uniform(0.1, 10.0),
                            rng.log_uniform(0.1, 10.0));
            std::array<Vec2, 3> eta;
            for (int k = 0; k < 3; ++k) eta[k] = rng.uniform(-1.0, 1.0) * rng.unit_vec();
            const Vec2 c = (mm[0] * eta[0] + mm[1] * eta[1] + mm[2] * eta[2]) / mm.total();
            for (int k = 0; k < 3; ++k) eta[k] -= c;
            for (int k = 0; k < 3; ++k)
                worst = std::max(worst, std::fabs(lagrange_identity_residual(eta, mm, k)));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("state literal round trip and validation", "[core]") {
    const Masses m(1, 1, 1);
    const std::string text = format_state_literal(m, st1());
    const StateLiteral parsed = parse_state_literal(text);
    for (int k = 0; k < 3; ++k) {
        CHECK(parsed.state.q[k].x == st1().q[k].x);
        CHECK(parsed.state.p[k].y == st1().p[k].y);
    }
    CHECK(parsed.masses[2] == 1.0);

    CHECK_THROWS_WITH(parse_state_literal("1 1 1 / 1 0 0 1 -1 -1 / 1 1"),
                      ContainsSubstring("17 tokens"));
    CHECK_THROWS_WITH(parse_state_literal("1 1 x / 1 0 0 1 -1 -1 / 1 1 0 0 0 0"),
                      ContainsSubstring("bad number"));
    CHECK_THROWS_WITH(parse_state_literal("1 -1 1 / 1 0 0 1 -1 -1 / 1 1 0 0 0 0"),
                      ContainsSubstring("strictly positive"));
}
