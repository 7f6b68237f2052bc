#pragma once

#include <cmath>
#include <stdexcept>

#include "landau/vec.hpp"

namespace landau {

/// Largest admissible blowup speed for the smooth imploding-profile family,
/// r_* = 3 - sqrt(3) = 6/(3+sqrt(3)).
inline constexpr double r_star = 1.2679491924311227065; // 3 - sqrt(3)

/// Scaling skeleton of the self-similar ansatz
///   f(t,x,v) = (1-t)^{c_f} F(s, x/(1-t)^{c_x}, v/(1-t)^{c_v}),
/// with c_f = 0, c_x = 1/r, c_v = 1/r - 1 and the Type II rate
///   omega = gamma + 2 - (gamma+3)/r.
struct SimilarityExponents {
    double r = 0.0;
    double gamma = 0.0;
    double c_x = 0.0;
    double c_v = 0.0;
    double c_f = 0.0;
    double omega = 0.0;
};

inline double omega(double gamma, double r) {
    if (r <= 0.0) throw std::domain_error("omega: r must be positive");
    return gamma + 2.0 - (gamma + 3.0) / r;
}

/// Critical weight exponent eta_bar = -3 + 6(r-1) (L^2-critical for the
/// self-similar density scaling).
inline double eta_bar(double r) { return -3.0 + 6.0 * (r - 1.0); }

/// Linear decay rate of the weighted hydrodynamic norms,
/// lambda_eta = c_x (eta_bar - eta)/4, positive for eta < eta_bar.
inline double lambda_eta(double r, double eta) {
    return (1.0 / r) * (eta_bar(r) - eta) / 4.0;
}

inline SimilarityExponents exponents(double gamma, double r) {
    if (!(r > 1.0 && r < r_star))
        throw std::domain_error("exponents: need 1 < r < 3-sqrt(3)");
    if (!(gamma > std::sqrt(3.0) && gamma <= 2.0))
        throw std::domain_error("exponents: need gamma in (sqrt(3), 2]");
    SimilarityExponents e;
    e.r = r;
    e.gamma = gamma;
    e.c_x = 1.0 / r;
    e.c_v = 1.0 / r - 1.0;
    e.c_f = 0.0;
    e.omega = omega(gamma, r);
    if (e.omega <= 0.0)
        throw std::domain_error("exponents: no Type II scaling (omega <= 0)");
    return e;
}

/// Knudsen schedule eps_s = eps0 e^{-omega s} with the cutoff radius
/// R_s = R0 e^{c_x s}. Choosing R0 = eps0^{-ell_r}, ell_r = c_x/omega,
/// keeps R_s = eps_s^{-ell_r} for all s.
struct KnudsenSchedule {
    double eps0;
    double omega;
    double c_x;
    double R0;

    KnudsenSchedule(double eps0_, const SimilarityExponents& e)
        : eps0(eps0_), omega(e.omega), c_x(e.c_x),
          R0(std::exp(-ell_r() * std::log(eps0_))) {
        if (eps0_ <= 0.0) throw std::domain_error("KnudsenSchedule: eps0 > 0");
    }
    KnudsenSchedule(double eps0_, double omega_, double c_x_, double R0_)
        : eps0(eps0_), omega(omega_), c_x(c_x_), R0(R0_) {}

    double ell_r() const { return c_x / omega; }
    double eps(double s) const { return eps0 * std::exp(-omega * s); }
    // log-space so that large s cannot overflow intermediate products
    double radius(double s) const { return std::exp(std::log(R0) + c_x * s); }
};

struct SelfSimilarPoint {
    double s;
    Vec3 X;
    Vec3 V;
};

inline SelfSimilarPoint to_selfsimilar(double t, const Vec3& x, const Vec3& v,
                                       const SimilarityExponents& e) {
    if (t >= 1.0) throw std::domain_error("to_selfsimilar: t < 1 required");
    double log1mt = std::log1p(-t);
    SelfSimilarPoint p;
    p.s = -log1mt;
    double ax = std::exp(-e.c_x * log1mt);
    double av = std::exp(-e.c_v * log1mt);
    p.X = ax * x;
    p.V = av * v;
    return p;
}

struct PhysicalPoint {
    double t;
    Vec3 x;
    Vec3 v;
};

inline PhysicalPoint from_selfsimilar(double s, const Vec3& X, const Vec3& V,
                                      const SimilarityExponents& e) {
    PhysicalPoint p;
    p.t = -std::expm1(-s);
    p.x = std::exp(-e.c_x * s) * X;
    p.v = std::exp(-e.c_v * s) * V;
    return p;
}

/// Physical mass/momentum/energy densities at (t,x) from self-similar
/// hydrodynamic moments at (s,X), t = 1 - e^{-s}. The moments are the
/// total density rho = rho_tilde + rho_bar_s, and the weighted
/// perturbations (U_tilde, P_tilde); the profile enters through
/// (Ubar e_R, Cbar_s, Theta_bar_s, rho_bar_s).
struct HydroDensities {
    double varrho;
    Vec3 m;
    double e;
};

inline HydroDensities reconstruct_hydro(double rho_total, const Vec3& U_tilde,
                                        double P_tilde, double s,
                                        const Vec3& Ubar, double Cbar_s,
                                        double Theta_bar_s, double rho_bar_s,
                                        const SimilarityExponents& ex) {
    double rho_tilde = rho_total - rho_bar_s;
    // self-similar moments
    Vec3 m_ss = rho_total * Ubar + Cbar_s * U_tilde;
    double e_ss = rho_bar_s * (3.0 * Theta_bar_s + norm2(Ubar)) +
                  3.0 * Cbar_s * Cbar_s * P_tilde + norm2(Ubar) * rho_tilde +
                  2.0 * Cbar_s * dot(Ubar, U_tilde);
    double log1mt = -s; // log(1-t)
    HydroDensities h;
    h.varrho = std::exp(3.0 * ex.c_v * log1mt) * rho_total;
    h.m = std::exp(4.0 * ex.c_v * log1mt) * m_ss;
    h.e = std::exp(5.0 * ex.c_v * log1mt) * e_ss;
    return h;
}

} // namespace landau
