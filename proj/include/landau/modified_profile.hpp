#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "landau/constants.hpp"
#include "landau/cutoff.hpp"
#include "landau/fd.hpp"
#include "landau/profile_solve.hpp"

namespace landau {

/// Evaluate the base profile with its fitted power-law continuation beyond
/// the solved table (used when the cutoff shell outruns xi_max).
struct ProfileEval {
    const RadialProfile* p;

    double U(double xi) const {
        if (xi <= p->xi.back()) return p->U_at(xi);
        double t = std::pow(xi, -(p->r - 1.0));
        return (p->C_Ubar + p->asym_K_U * std::pow(xi, -p->r)) * t;
    }
    double C(double xi) const {
        if (xi <= p->xi.back()) return p->C_at(xi);
        double t = std::pow(xi, -(p->r - 1.0));
        return (p->C_Cbar + p->asym_K_C * std::pow(xi, -p->r)) * t;
    }
    double dU(double xi) const {
        if (xi <= p->xi.back()) return p->dU_at(xi);
        double r = p->r;
        return -(r - 1.0) * p->C_Ubar * std::pow(xi, -r) -
               (2.0 * r - 1.0) * p->asym_K_U * std::pow(xi, -2.0 * r);
    }
    double dC(double xi) const {
        if (xi <= p->xi.back()) return p->dC_at(xi);
        double r = p->r;
        return -(r - 1.0) * p->C_Cbar * std::pow(xi, -r) -
               (2.0 * r - 1.0) * p->asym_K_C * std::pow(xi, -2.0 * r);
    }
};

/// Tail-modified profile at self-similar time s:
///   Cs = C chi_{Rs} + Rs^{-r+1}(1 - chi_{Rs}),  Rs = R0 e^{c_x s},
/// with the monatomic closure rho_s = Cs^3, Theta_s = Cs^2/kappa,
/// P_s = Cs^5/kappa, and the macro error fields of the C-equation.
struct ModifiedProfile {
    std::shared_ptr<const RadialProfile> base;
    double R0 = 0.0;
    double s = 0.0;
    double Rs = 0.0;

    std::vector<double> xi;
    std::vector<double> Cs, dCs, dsCs; // value, d/dxi, d/ds
    std::vector<double> Cb, dCb, Ub, dUb; // base profile on this grid
    std::vector<double> E_C, E_U, E_rho, E_P;
    double max_error_inside = 0.0; // raw |E_C| for xi < Rs before masking
    double dec_c1 = 0.0, dec_c2 = 0.0; // two-sided comparison constants

    double r() const { return base->r; }
    const SimilarityExponents& exps() const { return base->exps; }

    std::size_t size() const { return xi.size(); }

    double Cs_at(double x) const { return interp_cubic(xi, Cs, x); }
    double dCs_at(double x) const { return interp_cubic(xi, dCs, x); }
    double EC_at(double x) const { return interp_cubic(xi, E_C, x); }
    double EU_at(double x) const { return interp_cubic(xi, E_U, x); }
    double rho_at(double x) const {
        double c = Cs_at(x);
        return c * c * c;
    }
};

inline ModifiedProfile modified_profile(std::shared_ptr<const RadialProfile> base,
                                        double R0, double s) {
    const RadialProfile& p = *base;
    if (!(R0 > 2.0 * p.xi_star))
        throw std::invalid_argument("modified_profile: R0 must exceed 2 xi_* "
                                    "(cutoff would touch the sonic region)");
    ModifiedProfile mp;
    mp.base = base;
    mp.R0 = R0;
    mp.s = s;
    const auto& e = p.exps;
    mp.Rs = R0 * std::exp(e.c_x * s);
    const double r = p.r;
    ProfileEval ev{&p};

    // grid: base linear core + log tail out to 10 Rs, with the cutoff shell
    // [0.7 Rs, 4 Rs] refined so the 4th-order derivatives resolve chi
    for (double x : p.xi)
        if (x <= 4.0 && x > 0.0) mp.xi.push_back(x);
    {
        double lo = 4.0, hi = 10.0 * mp.Rs;
        double sh_lo = 0.7 * mp.Rs, sh_hi = 4.0 * mp.Rs;
        int nlog = 1200;
        double lm = std::log(hi / lo) / nlog;
        for (int i = 1; i <= nlog; ++i) {
            double x = lo * std::exp(lm * i);
            if (x > sh_lo && x < sh_hi) continue; // covered by the shell band
            mp.xi.push_back(x);
        }
        int nsh = 2400;
        double sm = std::log(sh_hi / sh_lo) / nsh;
        for (int i = 0; i <= nsh; ++i) {
            double x = sh_lo * std::exp(sm * i);
            if (x > 4.0) mp.xi.push_back(x);
        }
        std::sort(mp.xi.begin(), mp.xi.end());
        mp.xi.erase(std::unique(mp.xi.begin(), mp.xi.end()), mp.xi.end());
    }

    std::size_t n = mp.xi.size();
    mp.Cs.resize(n);
    mp.dCs.resize(n);
    mp.dsCs.resize(n);
    mp.Cb.resize(n);
    mp.dCb.resize(n);
    mp.Ub.resize(n);
    mp.dUb.resize(n);

    const double tail = std::pow(mp.Rs, -(r - 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        double x = mp.xi[i];
        double cb = ev.C(x), dcb = ev.dC(x);
        double rho = x / mp.Rs;
        double chi = cutoff_chi(rho);
        double chip = cutoff_chi_prime(rho);
        mp.Cb[i] = cb;
        mp.dCb[i] = dcb;
        mp.Ub[i] = ev.U(x);
        mp.dUb[i] = ev.dU(x);
        mp.Cs[i] = cb * chi + tail * (1.0 - chi);
        mp.dCs[i] = dcb * chi + (cb - tail) * chip / mp.Rs;
        // d/ds at fixed xi: Rs' = c_x Rs
        mp.dsCs[i] = -e.c_x * rho * chip * (cb - tail) +
                     (1.0 - r) * e.c_x * tail * (1.0 - chi);
    }

    // two-sided comparison constants of eq:dec_S
    mp.dec_c1 = 1e30;
    mp.dec_c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double q = mp.Cs[i] / (std::pow(jbracket(mp.xi[i]), -(r - 1.0)) + tail);
        mp.dec_c1 = std::min(mp.dec_c1, q);
        mp.dec_c2 = std::max(mp.dec_c2, q);
    }
    return mp;
}

/// Macro error fields: E_C (relative C-equation error), E_U, and the two
/// redundant routes E_rho (via log rho_s) and E_P (via log P_s) whose exact
/// identities E_rho = E_P = 3 E_C are the pointwise regression check.
inline void macro_errors(ModifiedProfile& mp) {
    const auto& e = mp.exps();
    std::size_t n = mp.size();

    std::vector<double> logCs(n), diff_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        logCs[i] = std::log(mp.Cs[i]);
        diff_sq[i] = mp.Cs[i] * mp.Cs[i] - mp.Cb[i] * mp.Cb[i];
    }
    // 4th-order derivatives of the sampled fields on the nonuniform grid.
    // The E_rho / E_P routes share this table (log rho_s = 3 log Cs and
    // log P_s = 5 log Cs - log kappa exactly) and differ only in the
    // coefficient algebra of eq. (error_b).
    auto dlogCs = deriv4(mp.xi, logCs);
    auto ddiff = deriv4(mp.xi, diff_sq);

    mp.E_C.resize(n);
    mp.E_U.resize(n);
    mp.E_rho.resize(n);
    mp.E_P.resize(n);
    mp.max_error_inside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = mp.xi[i];
        double adv = e.c_x * x + mp.Ub[i];
        double divU = mp.dUb[i] + 2.0 * mp.Ub[i] / x;
        double dslog = mp.dsCs[i] / mp.Cs[i];
        double ec = dslog + adv * dlogCs[i] + divU / 3.0 - e.c_v;
        double erho = 3.0 * dslog + adv * (3.0 * dlogCs[i]) + divU - 3.0 * e.c_v;
        double ep = (1.0 / kappa) * (5.0 * dslog + adv * (5.0 * dlogCs[i])) + divU -
                    (5.0 / kappa) * e.c_v;
        double eu = 1.5 * ddiff[i] / mp.Cs[i];
        if (x < mp.Rs) {
            mp.max_error_inside = std::max(mp.max_error_inside, std::fabs(ec));
            ec = erho = ep = eu = 0.0; // exact identity inside the ball
        }
        mp.E_C[i] = ec;
        mp.E_rho[i] = erho;
        mp.E_P[i] = ep;
        mp.E_U[i] = eu;
    }
}

/// Log-log decay slope of |F| over xi in [a, b] (nodes with |F| > floor).
inline double decay_slope(const std::vector<double>& xi, const std::vector<double>& F,
                          double a, double b, double floor_val = 1e-300) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (xi[i] < a || xi[i] > b || std::fabs(F[i]) <= floor_val) continue;
        double lx = std::log(xi[i]), ly = std::log(std::fabs(F[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 3) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Weighted X^0_eta norm of a radial scalar field (3-D measure), trapezoid
/// on the stored grid.
inline double xnorm0_radial(const std::vector<double>& xi, const std::vector<double>& F,
                            double eta) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
        auto val = [&](std::size_t k) {
            double w = std::pow(jbracket(xi[k]), eta);
            return F[k] * F[k] * w * xi[k] * xi[k];
        };
        acc += 0.5 * (val(i) + val(i + 1)) * (xi[i + 1] - xi[i]);
    }
    return std::sqrt(4.0 * pi_const * acc);
}

} // namespace landau
