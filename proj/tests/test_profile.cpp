#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "landau/modified_profile.hpp"
#include "landau/rng.hpp"
#include "landau/weight.hpp"

using namespace landau;

static std::shared_ptr<const RadialProfile> shared_profile() {
    static auto p = std::make_shared<const RadialProfile>(solve_profile(1.25, 1.2679, 2.0));
    return p;
}

TEST_CASE("profile_rhs solves the 2x2 system") {
    auto e = exponents(2.0, 1.26);

    SUBCASE("generic point matches a direct matrix solve") {
        double xi = 2.0, U = 0.0, C = e.c_x * xi + 0.5;
        auto r = profile_rhs(xi, U, C, e);
        REQUIRE(!r.sonic);
        // plug back into M y' = b
        double d = e.c_x * xi + U;
        double b1 = e.c_v * C - (2.0 / 3.0) * C * U / xi;
        double b2 = e.c_v * U;
        CHECK(d * r.dC + C / 3.0 * r.dU == doctest::Approx(b1).epsilon(1e-12));
        CHECK(3.0 * C * r.dC + d * r.dU == doctest::Approx(b2).epsilon(1e-12));
    }
    SUBCASE("sonic flag on the singular locus") {
        double xi = 1.0, U = -0.4;
        double C = e.c_x * xi + U; // det = 0 exactly
        auto r = profile_rhs(xi, U, C, e);
        CHECK(r.sonic);
    }
    SUBCASE("random points: plug-back residual below 1e-12") {
        Rng rng(3u);
        int tested = 0;
        while (tested < 200) {
            double xi = rng.uniform(0.05, 20.0);
            double U = -rng.uniform(0.0, 1.0);
            double C = rng.uniform(0.05, 1.5);
            auto r = profile_rhs(xi, U, C, e);
            if (r.sonic) continue;
            ++tested;
            double d = e.c_x * xi + U;
            double b1 = e.c_v * C - (2.0 / 3.0) * C * U / xi;
            double b2 = e.c_v * U;
            double scale = std::fabs(b1) + std::fabs(b2) + 1.0;
            CHECK(std::fabs(d * r.dC + C / 3.0 * r.dU - b1) / scale < 1e-12);
            CHECK(std::fabs(3.0 * C * r.dC + d * r.dU - b2) / scale < 1e-12);
        }
    }
    CHECK_THROWS_AS(profile_rhs(0.0, 0.0, 1.0, e), std::domain_error);
}

TEST_CASE("sonic Taylor series") {
    auto e = exponents(2.0, 1.26);

    SUBCASE("order 1 reproduces the sonic condition") {
        auto s = sonic_taylor(1.0, e, true, 1);
        CHECK(std::fabs(e.c_x * 1.0 + s.eval_U(1.0) - s.eval_C(1.0)) < 1e-14);
    }
    SUBCASE("residual decays with series order at xi_* +- 1e-3") {
        auto resid = [&](const SonicSeries& s, double xi) {
            double C = s.eval_C(xi), U = s.eval_U(xi);
            double dC = s.eval_dC(xi), dU = s.eval_dU(xi);
            double d = e.c_x * xi + U;
            double b1 = e.c_v * C - (2.0 / 3.0) * C * U / xi;
            double b2 = e.c_v * U;
            return std::max(std::fabs(d * dC + C / 3.0 * dU - b1),
                            std::fabs(3.0 * C * dC + d * dU - b2));
        };
        double prev = 1e30;
        for (int order = 2; order <= 5; ++order) {
            auto s = sonic_taylor(1.0, e, true, order);
            double r = std::max(resid(s, 1.0 + 1e-3), resid(s, 1.0 - 1e-3));
            CHECK(r < 0.1 * prev); // at least one power of tau per order
            prev = r;
        }
    }
    SUBCASE("branches give distinct derivative pairs away from degeneracy") {
        auto s = sonic_taylor(1.0, e, true, 2);
        CHECK(std::fabs(s.dU1_plus - s.dU1_minus) > 0.1);
        // the degenerate double root at r_* lives in the sonic-value
        // quadratic: the two P-points merge there
        auto gap = [](double r) {
            auto ex = exponents(2.0, r);
            return std::fabs(sonic_point(1.0, ex, true).U -
                             sonic_point(1.0, ex, false).U);
        };
        CHECK(gap(r_star - 1e-7) < 1e-3);
        CHECK(gap(r_star - 1e-7) < gap(1.26));
    }
    SUBCASE("no real sonic branch beyond r_*") {
        SimilarityExponents bad;
        bad.r = r_star + 1e-3;
        bad.gamma = 2.0;
        bad.c_x = 1.0 / bad.r;
        bad.c_v = 1.0 / bad.r - 1.0;
        bad.omega = omega(bad.gamma, bad.r);
        CHECK_THROWS_AS(sonic_point(1.0, bad), std::domain_error);
    }
}

TEST_CASE("solve_profile") {
    auto p = shared_profile();

    SUBCASE("bracket structure and window") {
        CHECK(p->brackets.size() >= 1);
        CHECK(p->r > 1.25);
        CHECK(p->r < r_star);
        CHECK(p->resonance > 0);
    }
    SUBCASE("boundary and sonic calibration") {
        CHECK(std::fabs(p->U.front()) <= 1e-8);
        CHECK(p->C.front() > 0.0);
        CHECK(std::fabs(p->exps.c_x * 1.0 + p->sonic.eval_U(1.0) - p->sonic.eval_C(1.0)) <
              1e-12);
    }
    SUBCASE("pointwise ODE residual oracle") {
        double worst = 0.0;
        for (std::size_t k = 0; k < p->xi.size(); ++k) {
            if (std::fabs(p->xi[k] - 1.0) <= 1e-3 || p->xi[k] == 0.0) continue;
            worst = std::max(worst, profile_residual(*p, k));
        }
        CHECK(worst <= 10.0 * p->solver_tol);
    }
    SUBCASE("joint mismatch and C1 crossing") {
        CHECK(p->joint_mismatch < 1e-7);
        auto rep = verify_profile(*p);
        CHECK(rep.c1_jump < 1e-3);
    }
}

TEST_CASE("verify_profile report") {
    auto p = shared_profile();
    auto rep = verify_profile(*p);
    double target = -(p->r - 1.0);

    CHECK(rep.pass);
    CHECK(rep.C_Cbar > 0.0);
    CHECK(rep.slope_U == doctest::Approx(target).epsilon(0.02));
    CHECK(rep.slope_C == doctest::Approx(target).epsilon(0.02));
    CHECK(rep.min_rep10 > 0.0);
    CHECK(rep.min_outgoing > 0.0);
    CHECK(rep.min_rep22 > 0.0);

    SUBCASE("repulsivity margin stable under grid refinement") {
        double m = 1e30;
        for (std::size_t k = 0; k + 1 < p->xi.size(); ++k) {
            double x = 0.5 * (p->xi[k] + p->xi[k + 1]);
            if (x <= 0.0) continue;
            m = std::min(m, p->exps.c_x + p->dU_at(x) - std::fabs(p->dC_at(x)));
        }
        CHECK(m == doctest::Approx(rep.min_rep10).epsilon(0.1));
    }
    SUBCASE("xi^{r-1} U is Cauchy in xi (refined asymptotics)") {
        double K = 10.0 * (std::fabs(p->asym_K_U) + 1.0);
        for (double xi = 1e2; xi * 2.0 <= p->xi.back(); xi *= 1.5) {
            auto val = [&](double x) { return std::pow(x, p->r - 1.0) * p->U_at(x); };
            CHECK(std::fabs(val(2.0 * xi) - val(xi)) <= K * std::pow(xi, -p->r));
        }
    }
    SUBCASE("shooting constants agree with the regression fit") {
        CHECK(p->fit_gap_U < 1e-5);
        CHECK(p->fit_gap_C < 1e-5);
    }
}

TEST_CASE("modified profile") {
    auto p = shared_profile();

    SUBCASE("rejects cutoffs touching the sonic region") {
        CHECK_THROWS_AS(modified_profile(p, 1.5, 0.0), std::invalid_argument);
    }
    auto mp = modified_profile(p, 1e3, 0.0);

    SUBCASE("chi regions are exact") {
        ProfileEval ev{p.get()};
        for (double x : {0.5, 10.0, 500.0, 999.0})
            CHECK(mp.Cs_at(x) == doctest::Approx(ev.C(x)).epsilon(1e-10));
        double tail = std::pow(mp.Rs, -(p->r - 1.0));
        for (double x : {2001.0, 5000.0, 9000.0})
            CHECK(mp.Cs_at(x) == doctest::Approx(tail).epsilon(1e-12));
    }
    SUBCASE("two-sided comparison constants stable in s") {
        double c1_0 = mp.dec_c1, c2_0 = mp.dec_c2;
        CHECK(c1_0 > 0.0);
        for (double s : {1.0, 5.0}) {
            auto m2 = modified_profile(p, 1e3, s);
            CHECK(m2.dec_c1 > 0.5 * c1_0);
            CHECK(m2.dec_c2 < 2.0 * c2_0);
        }
    }
    SUBCASE("repulsivity of the modified profile (interior)") {
        double margin = 1e30;
        for (std::size_t i = 0; i < mp.size(); ++i)
            if (mp.xi[i] <= 4.0)
                margin = std::min(margin, p->exps.c_x + mp.dUb[i] - std::fabs(mp.dCs[i]));
        CHECK(margin > 0.0);
    }
}

TEST_CASE("macro error fields") {
    auto p = shared_profile();
    auto mp = modified_profile(p, 1e3, 0.0);
    macro_errors(mp);

    SUBCASE("identities E_rho = E_P = 3 E_C to 1e-10 (sup-relative)") {
        double sup = 0.0;
        for (std::size_t i = 0; i < mp.size(); ++i)
            sup = std::max(sup, std::fabs(3.0 * mp.E_C[i]));
        REQUIRE(sup > 0.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < mp.size(); ++i) {
            worst = std::max(worst, std::fabs(mp.E_rho[i] - 3.0 * mp.E_C[i]));
            worst = std::max(worst, std::fabs(mp.E_P[i] - 3.0 * mp.E_C[i]));
        }
        CHECK(worst <= 1e-10 * sup);
    }
    SUBCASE("support is contained in xi >= Rs") {
        for (std::size_t i = 0; i < mp.size(); ++i)
            if (mp.xi[i] < mp.Rs) {
                CHECK(mp.E_C[i] == 0.0);
                CHECK(mp.E_U[i] == 0.0);
            }
        CHECK(mp.max_error_inside < 5e-3);
    }
    SUBCASE("gradient decay |grad^k E_C| ~ xi^{-r-k} beyond the shell") {
        double s0 = decay_slope(mp.xi, mp.E_C, 2.5 * mp.Rs, 9.0 * mp.Rs);
        CHECK(s0 == doctest::Approx(-p->r).epsilon(0.05));
        auto d1 = deriv4(mp.xi, mp.E_C);
        double s1 = decay_slope(mp.xi, d1, 2.5 * mp.Rs, 9.0 * mp.Rs);
        CHECK(s1 == doctest::Approx(-p->r - 1.0).epsilon(0.05));
        auto d2 = deriv4(mp.xi, d1);
        double s2 = decay_slope(mp.xi, d2, 2.5 * mp.Rs, 9.0 * mp.Rs);
        CHECK(s2 == doctest::Approx(-p->r - 2.0).epsilon(0.08));
    }
    SUBCASE("shell amplitudes of E_C and E_U scale like Rs^{-r}") {
        std::vector<double> lr, lc, lu;
        for (double R0 : {1e2, 1e3, 1e4}) {
            auto m2 = modified_profile(p, R0, 0.0);
            macro_errors(m2);
            double ac = 0.0, au = 0.0;
            for (std::size_t i = 0; i < m2.size(); ++i)
                if (m2.xi[i] >= m2.Rs && m2.xi[i] <= 2.0 * m2.Rs) {
                    ac = std::max(ac, std::fabs(m2.E_C[i]));
                    au = std::max(au, std::fabs(m2.E_U[i]));
                }
            lr.push_back(std::log(m2.Rs));
            lc.push_back(std::log(ac));
            lu.push_back(std::log(au));
        }
        CHECK((lc[2] - lc[0]) / (lr[2] - lr[0]) == doctest::Approx(-p->r).epsilon(0.05));
        CHECK((lu[2] - lu[0]) / (lr[2] - lr[0]) == doctest::Approx(-p->r).epsilon(0.05));
    }
    SUBCASE("X-norm of Cs^3 E decays like Rs^{-r} at eta = eta_bar") {
        std::vector<double> lr, ln;
        for (double R0 : {1e2, 1e3, 1e4}) {
            auto m2 = modified_profile(p, R0, 0.0);
            macro_errors(m2);
            std::vector<double> c3E(m2.size());
            for (std::size_t i = 0; i < m2.size(); ++i)
                c3E[i] = m2.Cs[i] * m2.Cs[i] * m2.Cs[i] * m2.E_C[i];
            lr.push_back(std::log(m2.Rs));
            ln.push_back(std::log(xnorm0_radial(m2.xi, c3E, eta_bar(p->r))));
        }
        CHECK((ln[2] - ln[0]) / (lr[2] - lr[0]) == doctest::Approx(-p->r).epsilon(0.1));
    }
}

TEST_CASE("weight family") {
    auto p = shared_profile();
    auto mp = modified_profile(p, 1e3, 0.0);
    auto w = build_weight(*p, mp);

    SUBCASE("positive margins in both normalizations") {
        CHECK(w.mu1 > 0.0);
        CHECK(w.mu1_literal > 0.0);
    }
    SUBCASE("phi1 comparable to <xi> and derivative bounded") {
        double lo = 1e30, hi = 0.0, dmax = 0.0;
        for (double xi = 0.0; xi < 100.0; xi += 0.05) {
            double q = w.phi1(xi) / jbracket(xi);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            dmax = std::max(dmax, std::fabs(w.dlog_phi1(xi) * w.phi1(xi)));
        }
        CHECK(lo > 0.0);
        CHECK(hi < 10.0);
        CHECK(dmax < 10.0);
    }
    SUBCASE("lambda_eta closed form") {
        double le = lambda_eta(p->r, w.eta);
        CHECK(le ==
              doctest::Approx(p->exps.c_x * (eta_bar(p->r) - w.eta) / 4.0).epsilon(1e-14));
        CHECK(le > 0.0);
    }
    SUBCASE("flat bump with moderate c3 fails the i=1 inequality near xi_*") {
        WeightFamily flat = w;
        flat.c2 = 0.0;
        flat.c3 = 0.3;
        CHECK(repul_margin(flat, mp, true) < 0.0);
    }
    SUBCASE("margin stable under 2x grid refinement") {
        double mu = 1e30;
        ProfileEval ev{p.get()};
        for (std::size_t i = 0; i + 1 < mp.size(); ++i) {
            double xi = 0.5 * (mp.xi[i] + mp.xi[i + 1]);
            double L = w.dlog_phi1(xi);
            double cs = mp.Cs_at(xi), dcs = mp.dCs_at(xi);
            double du = ev.dU(xi), ub = ev.U(xi);
            double cx = p->exps.c_x;
            for (int di = 0; di <= 1; ++di) {
                double lhs = (cx * xi + ub) * L - (cx + du);
                if (di == 1) lhs += cs * std::fabs(L) + std::fabs(dcs);
                mu = std::min(mu, -lhs * jbracket(xi));
            }
        }
        CHECK(mu == doctest::Approx(w.mu1).epsilon(0.05));
    }
}
