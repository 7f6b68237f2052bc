#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "landau/constants.hpp"
#include "landau/cutoff.hpp"
#include "landau/quadrature.hpp"
#include "landau/vec.hpp"
#include "landau/velocity_grid.hpp"

namespace landau {

/// The reference Gaussian mu(z) = (kappa/2pi)^{3/2} exp(-kappa2 |z|^2),
/// unit mass, per-axis variance 1/kappa = 3/5.
inline double mu_of_sq(double z2) {
    const double c = std::pow(kappa / (2.0 * pi_const), 1.5);
    return c * std::exp(-kappa2 * z2);
}
inline double mu(const Vec3& z) { return mu_of_sq(norm2(z)); }

/// Hydrodynamic state of the (modified) profile at one X: bulk velocity and
/// sound speed; temperature, density and pressure follow the monatomic
/// closure Theta = C^2/kappa, rho = C^3, P = C^5/kappa.
struct LocalState {
    Vec3 U{0.0, 0.0, 0.0};
    double C = 1.0;

    double theta() const { return C * C / kappa; }
    double rho() const { return C * C * C; }
    double pressure() const { return std::pow(C, 5) / kappa; }
};

/// Normalized relative velocity vring = (V - U)/C.
inline Vec3 vring(const LocalState& st, const Vec3& V) {
    if (!(st.C > 0.0)) throw std::domain_error("vring: C > 0 required");
    return (1.0 / st.C) * (V - st.U);
}

struct MaxwellianParams {
    double rho;
    Vec3 U;
    double Theta;
};

inline double maxwellian(const MaxwellianParams& p, const Vec3& V) {
    double c = p.rho / std::pow(2.0 * pi_const * p.Theta, 1.5);
    return c * std::exp(-norm2(V - p.U) / (2.0 * p.Theta));
}

/// Samples M_{rho,U,Theta} on a grid; warns (returns flag) when the grid
/// extent does not reach 6 sqrt(Theta) beyond |U|.
struct SampledMaxwellian {
    Distribution values;
    bool sufficient_support;
};

inline SampledMaxwellian local_maxwellian(const MaxwellianParams& p, const VelocityGrid& g) {
    if (!(p.rho > 0.0 && p.Theta > 0.0))
        throw std::domain_error("local_maxwellian: rho, Theta > 0");
    SampledMaxwellian s{Distribution::sample(g, [&](const Vec3& V) { return maxwellian(p, V); }),
                        g.extent() >= norm(p.U) + 6.0 * std::sqrt(p.Theta)};
    return s;
}

/// Closed-form moments of the Maxwellian: int M (1, V, V⊗V, |V|^2 V).
struct MaxwellianMoments {
    double mass;
    Vec3 momentum;
    Sym3 pressure_tensor; // rho (Theta Id + U⊗U)
    Vec3 energy_flux;     // rho U (5 Theta + |U|^2)
};

inline MaxwellianMoments maxwellian_moments(const MaxwellianParams& p) {
    MaxwellianMoments m;
    m.mass = p.rho;
    m.momentum = p.rho * p.U;
    m.pressure_tensor.a = {p.rho * (p.Theta + p.U[0] * p.U[0]),
                           p.rho * (p.Theta + p.U[1] * p.U[1]),
                           p.rho * (p.Theta + p.U[2] * p.U[2]),
                           p.rho * p.U[0] * p.U[1],
                           p.rho * p.U[0] * p.U[2],
                           p.rho * p.U[1] * p.U[2]};
    m.energy_flux = p.rho * (5.0 * p.Theta + norm2(p.U)) * p.U;
    return m;
}

/// The five orthonormal macro basis functions at a given state,
///   Phi_0 = M1^{1/2},
///   Phi_i = kappa^{1/2} vring_i M1^{1/2} (i = 1..3),
///   Phi_4 = (kappa/sqrt6)(|vring|^2 - 9/5) M1^{1/2},
/// where M1 = M_{1, U, Theta} = C^{-3} mu(vring).
inline double m1_half(const LocalState& st, const Vec3& V) {
    return std::pow(st.C, -1.5) * std::sqrt(mu_of_sq(norm2(vring(st, V))));
}

inline std::array<double, 5> phi_at(const LocalState& st, const Vec3& V) {
    Vec3 z = vring(st, V);
    double m12 = std::pow(st.C, -1.5) * std::sqrt(mu_of_sq(norm2(z)));
    double rk = std::sqrt(kappa);
    return {m12, rk * z[0] * m12, rk * z[1] * m12, rk * z[2] * m12,
            kappa / std::sqrt(6.0) * (norm2(z) - 9.0 / 5.0) * m12};
}

struct MacroBasis {
    LocalState state;
    std::array<Distribution, 5> phi;
    std::array<std::array<double, 5>, 5> gram;
    double gram_deviation; // max |gram - Id|

    MacroBasis(const LocalState& st, const VelocityGrid& g)
        : state(st), phi{Distribution(g), Distribution(g), Distribution(g),
                         Distribution(g), Distribution(g)} {
        const int n = g.n();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    auto p = phi_at(st, g.node(i, j, k));
                    for (int q = 0; q < 5; ++q) phi[q].values[g.idx(i, j, k)] = p[q];
                }
        gram_deviation = 0.0;
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
                gram[a][b] = phi[a].inner(phi[b]);
                double dev = std::fabs(gram[a][b] - (a == b ? 1.0 : 0.0));
                gram_deviation = std::max(gram_deviation, dev);
            }
    }
};

/// Macro/micro split g = P_M g + P_m g, P_M g = sum <g,Phi_i> Phi_i.
struct MacroMicro {
    Distribution macro;
    Distribution micro;
    std::array<double, 5> coeff;
};

inline MacroMicro project(const Distribution& g, const MacroBasis& basis,
                          double gram_tol = 1e-6) {
    if (basis.gram_deviation > gram_tol)
        throw std::runtime_error("project: basis Gram deviates from identity; refine grid");
    MacroMicro r{Distribution(g.grid), g, {}};
    for (int q = 0; q < 5; ++q) {
        r.coeff[q] = g.inner(basis.phi[q]);
        r.macro.axpy(r.coeff[q], basis.phi[q]);
        r.micro.axpy(-r.coeff[q], basis.phi[q]);
    }
    return r;
}

/// Weighted hydrodynamic fields of a perturbation F_tilde:
///   (rho~, U~, P~) = int M1^{1/2} F~ (1, vring, |vring|^2/3) dV,  B~ = rho~ - P~.
struct HydroTriple {
    Vec3 Ut{0.0, 0.0, 0.0};
    double Pt = 0.0;
    double Bt = 0.0;

    double rho() const { return Pt + Bt; }
};

inline HydroTriple f_E(const Distribution& f_tilde, const MacroBasis& basis) {
    const VelocityGrid& g = f_tilde.grid;
    const LocalState& st = basis.state;
    const int n = g.n();
    double rho = 0.0, P = 0.0;
    Vec3 U{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 V = g.node(i, j, k);
                Vec3 z = vring(st, V);
                double w = m1_half(st, V) * f_tilde.values[g.idx(i, j, k)];
                rho += w;
                U[0] += w * z[0];
                U[1] += w * z[1];
                U[2] += w * z[2];
                P += w * norm2(z) / 3.0;
            }
    double cw = g.cell_weight();
    HydroTriple t;
    t.Ut = cw * U;
    t.Pt = cw * P;
    t.Bt = cw * rho - t.Pt;
    return t;
}

/// Inverse map onto the macro span:
///   F_M(U~,P~,B~) = (P~+B~) Phi_0 + kappa^{1/2} U~_i Phi_i + (2P~-3B~)/sqrt6 Phi_4.
inline Distribution f_M(const HydroTriple& w, const MacroBasis& basis) {
    Distribution d(basis.phi[0].grid);
    double rk = std::sqrt(kappa);
    d.axpy(w.Pt + w.Bt, basis.phi[0]);
    d.axpy(rk * w.Ut[0], basis.phi[1]);
    d.axpy(rk * w.Ut[1], basis.phi[2]);
    d.axpy(rk * w.Ut[2], basis.phi[3]);
    d.axpy((2.0 * w.Pt - 3.0 * w.Bt) / std::sqrt(6.0), basis.phi[4]);
    return d;
}

/// Gauss-Hermite oracle: Gram matrix of the Phi basis computed in vring
/// variables (state-independent Gaussian integrals), the quadrature of
/// record for the orthonormality checks.
inline std::array<std::array<double, 5>, 5> phi_gram_gh(int nodes = 40) {
    GaussHermite3 gh(nodes, kappa2);
    std::array<std::array<double, 5>, 5> g{};
    double rk = std::sqrt(kappa);
    for (std::size_t q = 0; q < gh.z.size(); ++q) {
        const Vec3& z = gh.z[q];
        double m = mu_of_sq(norm2(z)); // = M1 C^3 in vring variables
        std::array<double, 5> p = {1.0, rk * z[0], rk * z[1], rk * z[2],
                                   kappa / std::sqrt(6.0) * (norm2(z) - 9.0 / 5.0)};
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) g[a][b] += gh.w[q] * m * p[a] * p[b];
    }
    return g;
}

/// Limiting density of the blowup solution away from x = 0:
///   mu(vring_lim),  vring_lim = (v - C_U e_R |x|^{-r+1}) / c_{R0}(x),
///   c_{R0}(x) = C_C |x|^{-r+1} chi_{R0}(x) + (1 - chi_{R0}(x)) R0^{-(r-1)}.
/// chi is the shared smooth radial cutoff (1 on B_1, 0 outside B_2);
/// R0 = infinity collapses c_{R0} to the pure power law.
inline double limit_density_cval(double ax, double r, double R0, double C_C) {
    double pow_term = std::pow(ax, -(r - 1.0));
    if (!std::isfinite(R0)) return C_C * pow_term;
    double chi = cutoff_chi(ax / R0);
    return C_C * pow_term * chi + (1.0 - chi) * std::pow(R0, -(r - 1.0));
}

inline double limit_density(const Vec3& x, const Vec3& v, double r, double R0,
                            double C_U, double C_C) {
    double ax = norm(x);
    if (ax == 0.0) throw std::domain_error("limit_density: x != 0 (limit is discontinuous)");
    double c = limit_density_cval(ax, r, R0, C_C);
    Vec3 eR = (1.0 / ax) * x;
    Vec3 z = (1.0 / c) * (v - C_U * std::pow(ax, -(r - 1.0)) * eR);
    return mu(z);
}

} // namespace landau
