#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "landau/fd.hpp"
#include "landau/io.hpp"
#include "landau/scaling.hpp"
#include "landau/series.hpp"

namespace landau {

// ---------------------------------------------------------------------------
// Radial steady profile ODE
//
// The radial reduction of the steady isentropic system is the linear solve
//   M (C', U')^T = b,   M = [[c_x xi + U, C/3], [3C, c_x xi + U]],
//   b = (c_v C - (2/3) C U / xi,  c_v U),
// singular on the sonic locus |c_x xi + U| = C.
// ---------------------------------------------------------------------------

struct ProfileRhsResult {
    double dC = 0.0;
    double dU = 0.0;
    bool sonic = false; // |det| below threshold, derivatives not returned
    double det = 0.0;
};

inline ProfileRhsResult profile_rhs(double xi, double U, double C,
                                    const SimilarityExponents& e,
                                    double det_threshold = 1e-12) {
    if (!(xi > 0.0)) throw std::domain_error("profile_rhs: xi > 0");
    double d = e.c_x * xi + U;
    double det = d * d - C * C;
    ProfileRhsResult r;
    r.det = det;
    double b1 = e.c_v * C - (2.0 / 3.0) * C * U / xi;
    double b2 = e.c_v * U;
    double scale = d * d + C * C + 1e-300;
    if (std::fabs(det) <= det_threshold * scale) {
        r.sonic = true;
        return r;
    }
    r.dC = (d * b1 - (C / 3.0) * b2) / det;
    r.dU = (d * b2 - 3.0 * C * b1) / det;
    return r;
}

// ---------------------------------------------------------------------------
// Sonic point data and local series
// ---------------------------------------------------------------------------

/// Values (U*, C*) at the sonic point xi*: C* = c_x xi* + U* with U* a root
/// of the range-compatibility quadratic
///   U*^2 + (c_x - c_v) xi* U* - (3/2) c_v c_x xi*^2 = 0.
/// `upper` picks the larger root (the one the smooth implosion profile
/// passes through); the discriminant degenerates exactly at r = 3 - sqrt(3).
struct SonicPoint {
    double xi_star;
    double U;
    double C;
};

inline SonicPoint sonic_point(double xi_star, const SimilarityExponents& e, bool upper = true) {
    double disc = 1.0 + 6.0 * e.c_v * e.c_x; // (c_x - c_v = 1)
    if (disc < 0.0) throw std::domain_error("sonic_point: no real sonic branch");
    double root = upper ? (-1.0 + std::sqrt(disc)) / 2.0 : (-1.0 - std::sqrt(disc)) / 2.0;
    SonicPoint p;
    p.xi_star = xi_star;
    p.U = xi_star * root;
    p.C = e.c_x * xi_star + p.U;
    if (!(p.C > 0.0)) throw std::domain_error("sonic_point: nonpositive sound speed");
    return p;
}

constexpr int kSonicMaxOrder = 10;
using SJet = Jet<kSonicMaxOrder>;

/// Local Taylor series of (C,U) around the sonic point, tau = xi - xi*.
struct SonicSeries {
    double xi_star;
    int order;
    SJet C, U; // coefficients up to `order`
    double dU1_plus, dU1_minus; // the two L'Hopital roots for U'(xi*)

    double eval_C(double xi) const { return C.eval(xi - xi_star); }
    double eval_U(double xi) const { return U.eval(xi - xi_star); }
    double eval_dC(double xi) const { return C.eval_deriv(xi - xi_star); }
    double eval_dU(double xi) const { return U.eval_deriv(xi - xi_star); }
};

namespace detail {

/// Jets of det and adj(M)b along a candidate series (C(tau), U(tau)).
struct OdeJets {
    SJet D, F1, F2;
};

inline OdeJets ode_jets(const SJet& xi, const SJet& C, const SJet& U,
                        const SimilarityExponents& e) {
    SJet d = xi * e.c_x + U;
    SJet xinv = xi.recip();
    SJet b1 = C * e.c_v - (C * U * xinv) * (2.0 / 3.0);
    SJet b2 = U * e.c_v;
    OdeJets j;
    j.D = d * d - C * C;
    j.F1 = d * b1 - (C * b2) * (1.0 / 3.0);
    j.F2 = d * b2 - (C * b1) * 3.0;
    return j;
}

/// Residual series of the desingularized equation G = D * y' - F.
inline void sonic_residual(const SJet& xi, const SJet& C, const SJet& U,
                           const SimilarityExponents& e, SJet& G1, SJet& G2) {
    OdeJets j = ode_jets(xi, C, U, e);
    G1 = j.D * C.deriv() - j.F1;
    G2 = j.D * U.deriv() - j.F2;
}

} // namespace detail

/// Build the sonic series to the given order (>= 1). The first derivative
/// pair solves the quadratic obtained by matching the tau^1 coefficient of
/// D y' = F (L'Hopital at the vanishing determinant); `branch_negative`
/// selects the root with the smaller U'(xi*). Higher coefficients follow
/// from exact per-order affine solves on the jet residual.
inline SonicSeries sonic_taylor(double xi_star, const SimilarityExponents& e,
                                bool branch_negative, int order,
                                bool upper_point = true) {
    if (order < 1 || order > kSonicMaxOrder)
        throw std::invalid_argument("sonic_taylor: order in [1," + std::to_string(kSonicMaxOrder) + "]");
    SonicPoint p = sonic_point(xi_star, e, upper_point);

    SJet xi = SJet::variable(xi_star);

    // order-0 range condition: C1 + U1/3 = q
    double q = e.c_v - (2.0 / 3.0) * p.U / xi_star;

    // tau^1 residual of G2 (equivalently the ell-projection) as a function
    // of U1 is an exact quadratic: sample at U1 = -1, 0, 1 and solve.
    auto g2_at = [&](double U1) {
        SJet C = SJet::constant(p.C);
        SJet U = SJet::constant(p.U);
        C.c[1] = q - U1 / 3.0;
        U.c[1] = U1;
        SJet G1, G2;
        detail::sonic_residual(xi, C, U, e, G1, G2);
        // any fixed projection works; use G2 - 3 G1 is identically handled,
        // G2's tau coefficient vanishes iff the L'Hopital condition holds
        return G2.c[1];
    };
    double gm = g2_at(-1.0), g0 = g2_at(0.0), gp = g2_at(1.0);
    double a = 0.5 * (gp + gm) - g0;
    double b = 0.5 * (gp - gm);
    double c = g0;
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw std::domain_error("sonic_taylor: no real sonic branch");
    double sq = std::sqrt(disc);
    double r1 = (-b - sq) / (2.0 * a);
    double r2 = (-b + sq) / (2.0 * a);
    double lo = std::min(r1, r2), hi = std::max(r1, r2);

    SonicSeries s;
    s.xi_star = xi_star;
    s.order = order;
    s.dU1_minus = lo;
    s.dU1_plus = hi;
    double U1 = branch_negative ? lo : hi;
    double C1 = q - U1 / 3.0;

    SJet C = SJet::constant(p.C);
    SJet U = SJet::constant(p.U);
    C.c[1] = C1;
    U.c[1] = U1;

    // per-order affine solves: coefficient tau^k of G depends affinely on
    // (C_k, U_k) and on no higher coefficient (D has no constant term).
    for (int k = 2; k <= order; ++k) {
        auto gk = [&](double Ck, double Uk) {
            SJet Ct = C, Ut = U;
            Ct.c[k] = Ck;
            Ut.c[k] = Uk;
            SJet G1, G2;
            detail::sonic_residual(xi, Ct, Ut, e, G1, G2);
            return std::array<double, 2>{G1.c[k], G2.c[k]};
        };
        auto g00 = gk(0.0, 0.0);
        auto g10 = gk(1.0, 0.0);
        auto g01 = gk(0.0, 1.0);
        double a11 = g10[0] - g00[0], a12 = g01[0] - g00[0];
        double a21 = g10[1] - g00[1], a22 = g01[1] - g00[1];
        double det = a11 * a22 - a12 * a21;
        if (std::fabs(det) < 1e-14 * (std::fabs(a11 * a22) + std::fabs(a12 * a21) + 1e-300))
            throw std::runtime_error("sonic_taylor: resonant order " + std::to_string(k));
        C.c[k] = (-g00[0] * a22 + g00[1] * a12) / det;
        U.c[k] = (-a11 * g00[1] + a21 * g00[0]) / det;
    }
    s.C = C;
    s.U = U;
    return s;
}

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) integration of the regular branches
// ---------------------------------------------------------------------------

struct OdeSample {
    double xi, C, U, dC, dU;
};

enum class StopReason {
    reached_end,
    sonic_hit,        // determinant returned to zero (subsonic pass failed)
    sound_speed_zero, // C <= 0
    slope_guard,      // |U/xi - c_v| exceeded the guard (origin instability)
    step_floor,       // step size underflow
};

struct IntegrateOptions {
    double tol = 1e-10;
    double slope_guard = 10.0;   // inf disables
    bool subsonic = false;       // watch for det returning to 0 from below
    bool record = true;
    bool log_xi = false;
};

struct IntegrationResult {
    std::vector<OdeSample> samples;
    StopReason reason = StopReason::reached_end;
    double stop_xi = 0.0;
    double slope_sign = 0.0; // sign of U/xi - c_v at the guard event
    double C_end = 0.0, U_end = 0.0;
};

namespace detail {

/// Derivative of y = (C,U) in w = xi or w = log xi.
struct DpStepper {
    const SimilarityExponents& e;
    bool log_xi;

    std::array<double, 2> f(double w, const std::array<double, 2>& y) const {
        double xi = log_xi ? std::exp(w) : w;
        auto r = profile_rhs(xi, y[1], y[0], e, 1e-14);
        if (r.sonic) throw std::runtime_error("sonic");
        double fac = log_xi ? xi : 1.0;
        return {fac * r.dC, fac * r.dU};
    }
};

} // namespace detail

/// Adaptive Dormand-Prince 5(4) from (xi0, C0, U0) toward xi1 (either
/// direction), with the event set used by the shooting solver.
inline IntegrationResult integrate_profile(double xi0, double C0, double U0, double xi1,
                                           const SimilarityExponents& e,
                                           const IntegrateOptions& opt) {
    IntegrationResult res;
    detail::DpStepper st{e, opt.log_xi};

    auto tow = [&](double xi) { return opt.log_xi ? std::log(xi) : xi; };
    auto toxi = [&](double w) { return opt.log_xi ? std::exp(w) : w; };

    double w = tow(xi0), w_end = tow(xi1);
    double dir = w_end > w ? 1.0 : -1.0;
    std::array<double, 2> y{C0, U0};
    double h = dir * std::max(1e-10, 1e-3 * std::fabs(w_end - w));
    const double h_floor = 1e-12;

    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double C_[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double B5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static const double B4[7] = {5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    auto record = [&](double xi, const std::array<double, 2>& yy) {
        if (!opt.record) return;
        auto r = profile_rhs(xi, yy[1], yy[0], e, 1e-14);
        res.samples.push_back({xi, yy[0], yy[1], r.sonic ? 0.0 : r.dC, r.sonic ? 0.0 : r.dU});
    };
    record(xi0, y);

    auto check_events = [&](double xi, const std::array<double, 2>& yy) -> bool {
        if (yy[0] <= 0.0) {
            res.reason = StopReason::sound_speed_zero;
            return true;
        }
        if (opt.subsonic) {
            double d = e.c_x * xi + yy[1];
            if (d * d - yy[0] * yy[0] >= 0.0) {
                res.reason = StopReason::sonic_hit;
                return true;
            }
        }
        if (std::isfinite(opt.slope_guard)) {
            double sl = yy[1] / xi - e.c_v;
            if (std::fabs(sl) > opt.slope_guard) {
                res.reason = StopReason::slope_guard;
                res.slope_sign = sl > 0 ? 1.0 : -1.0;
                return true;
            }
        }
        return false;
    };

    int max_steps = 4000000;
    while (--max_steps > 0) {
        if (dir * (w + h - w_end) > 0.0) h = w_end - w;
        std::array<std::array<double, 2>, 7> k;
        bool sonic_fail = false;
        try {
            k[0] = st.f(w, y);
            for (int i = 1; i < 7; ++i) {
                std::array<double, 2> yi = y;
                for (int j = 0; j < i; ++j) {
                    yi[0] += h * A[i][j] * k[j][0];
                    yi[1] += h * A[i][j] * k[j][1];
                }
                k[i] = st.f(w + C_[i] * h, yi);
            }
        } catch (const std::runtime_error&) {
            sonic_fail = true;
        }
        if (sonic_fail) {
            h *= 0.5;
            if (std::fabs(h) < h_floor) {
                res.reason = StopReason::sonic_hit;
                res.stop_xi = toxi(w);
                res.C_end = y[0];
                res.U_end = y[1];
                return res;
            }
            continue;
        }
        std::array<double, 2> y5 = y, y4 = y;
        for (int i = 0; i < 7; ++i) {
            y5[0] += h * B5[i] * k[i][0];
            y5[1] += h * B5[i] * k[i][1];
            y4[0] += h * B4[i] * k[i][0];
            y4[1] += h * B4[i] * k[i][1];
        }
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            double sc = opt.tol + opt.tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            err = std::max(err, std::fabs(y5[i] - y4[i]) / sc);
        }
        if (err <= 1.0) {
            w += h;
            y = y5;
            double xi = toxi(w);
            record(xi, y);
            if (check_events(xi, y)) {
                res.stop_xi = xi;
                res.C_end = y[0];
                res.U_end = y[1];
                return res;
            }
            if (std::fabs(w - w_end) < 1e-14 * std::max(1.0, std::fabs(w_end))) break;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::min(5.0, std::max(0.2, fac));
        h *= fac;
        if (std::fabs(h) < h_floor) {
            res.reason = StopReason::step_floor;
            res.stop_xi = toxi(w);
            res.C_end = y[0];
            res.U_end = y[1];
            return res;
        }
    }
    res.reason = StopReason::reached_end;
    res.stop_xi = toxi(w);
    res.C_end = y[0];
    res.U_end = y[1];
    return res;
}

} // namespace landau
