#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "landau/cutoff.hpp"
#include "landau/modified_profile.hpp"

namespace landau {

/// Stability weight phi_1 = phi_b^{c2} (1 + c3 <xi>): phi_b is a smooth
/// monotone bump equal to 1 on [0, xi_*] and 1/2 beyond R2 + 1, with the
/// transition spread over [R1 - 0.25(R2-R1), R2 + 1] so its derivative is
/// strictly negative on [R1, R2].
struct WeightFamily {
    double c2 = 0.0, c3 = 0.0;
    double R1 = 0.0, R2 = 0.0;
    double mu1 = 0.0;         // verified margin, scaled form
    double mu1_literal = 0.0; // verified margin, literal form of the lemma
    double bump_slope = 0.0;  // min |phi_b'| on [R1, R2]
    int k = 0;                // norm indices carried for downstream use
    double eta = 0.0;

    double trans_lo() const { return R1 - 0.25 * (R2 - R1); }
    double trans_hi() const { return R2 + 1.0; }

    double phi_b(double xi) const {
        double t = (xi - trans_lo()) / (trans_hi() - trans_lo());
        return 1.0 - 0.5 * smoothstep_exp(t);
    }
    double dphi_b(double xi) const {
        double w = trans_hi() - trans_lo();
        double t = (xi - trans_lo()) / w;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        double a = cutoff_phi(t), b = cutoff_phi(1.0 - t);
        double da = a / (t * t);
        double db = b / ((1.0 - t) * (1.0 - t));
        double s = a + b;
        double sp = (da * s - a * (da + db)) / (s * s); // d smoothstep/dt
        return -0.5 * sp / w;
    }
    double phi1(double xi) const { return std::pow(phi_b(xi), c2) * (1.0 + c3 * jbracket(xi)); }
    /// d log(phi1) / d xi
    double dlog_phi1(double xi) const {
        double jb = jbracket(xi);
        return c2 * dphi_b(xi) / phi_b(xi) + c3 * (xi / jb) / (1.0 + c3 * jb);
    }
};

/// Pointwise left-hand side of the repulsivity inequality; must be
/// <= -mu1/<xi>. `scaled` uses the c_x-normalized coefficients, `!scaled`
/// the literal coefficients of the lemma (both are verified).
inline double repul_lhs(const WeightFamily& w, const ModifiedProfile& mp, std::size_t i,
                        int deriv_index, bool scaled) {
    double xi = mp.xi[i];
    double L = w.dlog_phi1(xi);
    double cx = mp.exps().c_x;
    double a = scaled ? cx * xi + mp.Ub[i] : xi + mp.Ub[i];
    double c0 = scaled ? cx : 1.0;
    double lhs = a * L - (c0 + mp.dUb[i]);
    if (deriv_index == 1) lhs += mp.Cs[i] * std::fabs(L) + std::fabs(mp.dCs[i]);
    return lhs;
}

inline double repul_margin(const WeightFamily& w, const ModifiedProfile& mp, bool scaled) {
    double mu = 1e30;
    for (std::size_t i = 0; i < mp.size(); ++i) {
        double jb = jbracket(mp.xi[i]);
        for (int di = 0; di <= 1; ++di)
            mu = std::min(mu, -repul_lhs(w, mp, i, di, scaled) * jb);
    }
    return mu;
}

/// Grid search over (c2, c3, R1, R2) maximizing the scaled-form margin while
/// requiring the literal-form margin positive as well.
inline WeightFamily build_weight(const RadialProfile& p, const ModifiedProfile& mp,
                                 int k = 0, double eta_offset = 0.5) {
    if (p.C_Cbar <= 0.0) throw std::invalid_argument("build_weight: verified profile required");
    WeightFamily best;
    double best_mu = -1e30, best_mu_lit = 0.0;
    const double xs = p.xi_star;
    for (int ic2 = 0; ic2 < 12; ++ic2) {
        double c2 = 0.1 * std::pow(100.0, ic2 / 11.0); // log-spaced [0.1, 10]
        for (int ic3 = 0; ic3 < 12; ++ic3) {
            double c3 = 1e-3 * std::pow(1000.0, ic3 / 11.0); // [1e-3, 1]
            for (int ir1 = 0; ir1 < 4; ++ir1) {
                double R1 = xs * (1.5 + 2.5 * ir1 / 3.0); // (xi_*, 4 xi_*]
                for (int ir2 = 0; ir2 < 4; ++ir2) {
                    double R2 = R1 * (2.0 + 6.0 * ir2 / 3.0); // [2 R1, 8 R1]
                    WeightFamily w;
                    w.c2 = c2;
                    w.c3 = c3;
                    w.R1 = R1;
                    w.R2 = R2;
                    double mu = repul_margin(w, mp, true);
                    if (mu > best_mu) {
                        double mul = repul_margin(w, mp, false);
                        if (mul > 0.0 || mu <= 0.0) {
                            best_mu = mu;
                            best_mu_lit = mul;
                            best = w;
                        }
                    }
                }
            }
        }
    }
    if (best_mu <= 0.0)
        throw std::runtime_error("no admissible weight found; best margin " +
                                 std::to_string(best_mu));
    best.mu1 = best_mu;
    best.mu1_literal = best_mu_lit;
    best.k = k;
    best.eta = eta_bar(p.r) - eta_offset;
    double bs = 1e30;
    for (double xi = best.R1; xi <= best.R2; xi += 0.01 * (best.R2 - best.R1))
        bs = std::min(bs, -best.dphi_b(xi));
    best.bump_slope = bs;
    return best;
}

} // namespace landau
