#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "landau/rng.hpp"
#include "landau/scaling.hpp"

using namespace landau;

TEST_CASE("omega formula") {
    // limiting pair: omega(sqrt(3), 3-sqrt(3)) = 0 exactly
    double g = std::sqrt(3.0);
    CHECK(std::fabs(omega(g, 3.0 - g)) < 1e-14);
    // exact rational evaluation: 4 - 5/1.26 = 4 - 250/63
    CHECK(omega(2.0, 1.26) == doctest::Approx(4.0 - 5.0 / 1.26).epsilon(1e-15));
    CHECK(omega(2.0, 1.26) == doctest::Approx(0.031746031746031744).epsilon(1e-12));
    // r = 1.3 is outside the paper's window: omega large
    double w13 = omega(2.0, 1.3);
    CHECK(w13 == doctest::Approx(4.0 - 5.0 / 1.3).epsilon(1e-15));
    CHECK(w13 > 0.06); // flagged against the Remark window elsewhere
    CHECK_THROWS_AS(omega(2.0, -1.0), std::domain_error);
}

TEST_CASE("exponents admissibility") {
    auto e = exponents(2.0, 1.26);
    CHECK(e.c_x == doctest::Approx(0.79365079365079361).epsilon(1e-15));
    CHECK(e.c_v == doctest::Approx(-0.20634920634920639).epsilon(1e-14));
    CHECK(e.c_x == doctest::Approx(e.c_v + 1.0).epsilon(1e-16));
    CHECK(e.omega == doctest::Approx(0.031746031746031744).epsilon(1e-12));

    CHECK_NOTHROW(exponents(2.0, r_star - 1e-6));
    CHECK_THROWS_AS(exponents(std::sqrt(3.0) + 1e-6, 1.26), std::domain_error);
    CHECK_THROWS_AS(exponents(2.0, r_star + 1e-3), std::domain_error);
}

TEST_CASE("omega positivity iff r above threshold (random sweep)") {
    Rng rng(20240817u);
    for (int i = 0; i < 10000; ++i) {
        double g = rng.uniform(std::sqrt(3.0) + 1e-9, 2.0);
        double r = rng.uniform(1.0, 3.0 - std::sqrt(3.0));
        bool pos = omega(g, r) > 0.0;
        bool thr = r > (g + 3.0) / (g + 2.0);
        CHECK(pos == thr);
    }
}

TEST_CASE("knudsen schedule") {
    auto e = exponents(2.0, 1.26);
    KnudsenSchedule ks(1e-3, e);

    SUBCASE("identity at s=0") {
        CHECK(ks.eps(0.0) == doctest::Approx(1e-3).epsilon(1e-15));
        CHECK(ks.radius(0.0) == doctest::Approx(ks.R0).epsilon(1e-15));
    }
    SUBCASE("half life") {
        double s_half = std::log(2.0) / e.omega;
        CHECK(ks.eps(s_half) == doctest::Approx(0.5e-3).epsilon(1e-13));
    }
    SUBCASE("two routes to R_s agree") {
        for (double s : {0.0, 1.0, 5.0, 10.0, 40.0}) {
            double lhs = ks.radius(s);
            double rhs = std::exp(-ks.ell_r() * std::log(ks.eps(s)));
            CHECK(std::fabs(lhs - rhs) / lhs < 1e-12);
        }
    }
    SUBCASE("eps_s R_s^{1/ell_r} constant in s") {
        double c0 = ks.eps(0.0) * std::pow(ks.radius(0.0), 1.0 / ks.ell_r());
        for (double s = 0.5; s < 20.0; s += 0.5) {
            double c = ks.eps(s) * std::pow(ks.radius(s), 1.0 / ks.ell_r());
            CHECK(std::fabs(c - c0) / c0 < 1e-12);
        }
    }
}

TEST_CASE("self-similar coordinate maps") {
    auto e = exponents(2.0, 1.26);

    SUBCASE("identity at t=0") {
        auto p = to_selfsimilar(0.0, {1.0, -2.0, 0.5}, {0.25, 0.0, -1.0}, e);
        CHECK(p.s == 0.0);
        CHECK(p.X[0] == doctest::Approx(1.0));
        CHECK(p.V[2] == doctest::Approx(-1.0));
    }
    SUBCASE("origin is fixed") {
        for (double t : {0.1, 0.9, 0.999}) {
            auto p = to_selfsimilar(t, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, e);
            CHECK(p.X[0] == 0.0);
            CHECK(p.X[1] == 0.0);
        }
    }
    SUBCASE("t = 1 - 1/e gives s = 1") {
        double t = 1.0 - std::exp(-1.0);
        auto p = to_selfsimilar(t, {2.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, e);
        CHECK(p.s == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(norm(p.X) == doctest::Approx(2.0 * std::exp(1.0 / 1.26)).epsilon(1e-13));
    }
    SUBCASE("round trip on random triples") {
        Rng rng(7u);
        for (int i = 0; i < 1000; ++i) {
            double t = rng.uniform(0.0, 1.0 - 1e-9);
            Vec3 x{rng.normal(), rng.normal(), rng.normal()};
            Vec3 v{rng.normal(), rng.normal(), rng.normal()};
            auto p = to_selfsimilar(t, x, v, e);
            auto q = from_selfsimilar(p.s, p.X, p.V, e);
            CHECK(std::fabs(q.t - t) <= 1e-12 * std::max(1.0, t));
            for (int d = 0; d < 3; ++d) {
                CHECK(std::fabs(q.x[d] - x[d]) <= 1e-12 * std::max(1.0, std::fabs(x[d])));
                CHECK(std::fabs(q.v[d] - v[d]) <= 1e-12 * std::max(1.0, std::fabs(v[d])));
            }
        }
        CHECK_THROWS_AS(to_selfsimilar(1.0, {0, 0, 0}, {0, 0, 0}, e), std::domain_error);
    }
}

TEST_CASE("pure-profile hydro reconstruction") {
    auto e = exponents(2.0, 1.26);
    Vec3 Ubar{0.0, 0.0, -0.3};
    double Cs = 0.8;
    double theta = Cs * Cs / (5.0 / 3.0);
    double rho_s = Cs * Cs * Cs;

    SUBCASE("zero perturbation reproduces the profile densities") {
        double s = 2.0;
        auto h = reconstruct_hydro(rho_s, {0, 0, 0}, 0.0, s, Ubar, Cs, theta, rho_s, e);
        double omt = std::exp(-s); // 1 - t
        CHECK(h.varrho == doctest::Approx(std::pow(omt, 3 * e.c_v) * rho_s).epsilon(1e-13));
        CHECK(h.m[2] == doctest::Approx(std::pow(omt, 4 * e.c_v) * rho_s * Ubar[2]).epsilon(1e-13));
        double e_ss = rho_s * (3.0 * theta + norm2(Ubar));
        CHECK(h.e == doctest::Approx(std::pow(omt, 5 * e.c_v) * e_ss).epsilon(1e-13));
    }
    SUBCASE("s=0 scaling factors are unity") {
        auto h = reconstruct_hydro(rho_s + 0.1, {0.2, 0, 0}, 0.05, 0.0, Ubar, Cs, theta, rho_s, e);
        // at s=0 the physical densities equal the self-similar moments
        CHECK(h.varrho == doctest::Approx(rho_s + 0.1).epsilon(1e-15));
    }
}
