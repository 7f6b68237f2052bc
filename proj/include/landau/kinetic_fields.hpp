#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "landau/collision.hpp"
#include "landau/maxwellian.hpp"
#include "landau/modified_profile.hpp"
#include "landau/quadrature.hpp"

namespace landau {

// ---------------------------------------------------------------------------
// Radially symmetric kinetic fields: per-X velocity slices in the local
// frame with e_R mapped to e_z. For fields of this class,
//   V . grad_X g = V_z d_xi g - (1/xi)[V_z Vperp . grad_perp g - |Vperp|^2 d_z g],
// the second piece being the frame-rotation (angular) contribution.
// ---------------------------------------------------------------------------

struct RadialKineticField {
    std::vector<double> xi;          // radial nodes
    std::vector<LocalState> state;   // profile state per node (U along e_z)
    VelocityGrid grid;
    std::vector<Distribution> slice; // one Distribution per node

    RadialKineticField(std::vector<double> nodes, const ModifiedProfile& mp,
                       const VelocityGrid& g)
        : xi(std::move(nodes)), grid(g) {
        ProfileEval ev{mp.base.get()};
        for (double x : xi) {
            LocalState st;
            st.U = {0.0, 0.0, ev.U(x)};
            st.C = mp.Cs_at(x);
            state.push_back(st);
            slice.emplace_back(g);
        }
    }

    std::size_t nodes() const { return xi.size(); }

    template <class F>
    void fill(F&& f) { // f(node_index, state, V) -> value
        for (std::size_t j = 0; j < xi.size(); ++j)
            slice[j] = Distribution::sample(grid, [&](const Vec3& V) {
                return f(j, state[j], V);
            });
    }
};

namespace detail {

/// Centered difference of a box field (zero extension) along axis d.
inline Distribution box_diff(const Distribution& u, int d) {
    static const DiffStencil st = DiffStencil::order(4);
    const int n = u.grid.n();
    const double invh = 1.0 / u.grid.h();
    Distribution out(u.grid);
    auto val = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
        return u.at(i, j, k);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int t = 1; t <= st.taps; ++t) {
                    int di = d == 0 ? t : 0, dj = d == 1 ? t : 0, dk = d == 2 ? t : 0;
                    acc += st.a[t - 1] *
                           (val(i + di, j + dj, k + dk) - val(i - di, j - dj, k - dk));
                }
                out.at(i, j, k) = acc * invh;
            }
    return out;
}

} // namespace detail

/// V . grad_X of a radial kinetic field, with d_xi by 4th-order radial
/// finite differences and the angular part by velocity-space differences.
inline RadialKineticField transport_x(const RadialKineticField& W) {
    RadialKineticField out = W;
    const int n = W.grid.n();
    std::size_t m = W.nodes();

    // radial derivative of each velocity node value across the xi nodes
    std::vector<std::vector<double>> radial_d(m, std::vector<double>(W.grid.size()));
    {
        std::vector<double> y(m);
        for (std::size_t q = 0; q < W.grid.size(); ++q) {
            for (std::size_t j = 0; j < m; ++j) y[j] = W.slice[j].values[q];
            // local 5-point polynomial derivative per node
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t lo = j >= 2 ? j - 2 : 0;
                if (lo > m - 5) lo = m - 5;
                radial_d[j][q] = lagrange_deriv(&W.xi[lo], &y[lo], 5, W.xi[j]);
            }
        }
    }

    for (std::size_t j = 0; j < m; ++j) {
        auto dx = detail::box_diff(W.slice[j], 0);
        auto dy = detail::box_diff(W.slice[j], 1);
        auto dz = detail::box_diff(W.slice[j], 2);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    std::size_t q = W.grid.idx(a, b, c);
                    Vec3 V = W.grid.node(a, b, c);
                    double vperp2 = V[0] * V[0] + V[1] * V[1];
                    double ang = V[2] * (V[0] * dx.values[q] + V[1] * dy.values[q]) -
                                 vperp2 * dz.values[q];
                    out.slice[j].values[q] =
                        V[2] * radial_d[j][q] - ang / W.xi[j];
                }
    }
    return out;
}

struct MicroMoments {
    std::vector<Vec3> I1;
    std::vector<double> I2;
    std::vector<double> mass_moment; // <V.grad_X(M1^{1/2} Fm), 1>_V per node
    double mass_integral = 0.0;      // its X-integral (should vanish)
};

/// Micro moments I1, I2 of a micro field F_m (values of F~_m; the weight
/// M1^{1/2} is applied internally). Throws if the input has a macro part.
inline MicroMoments micro_moments(const RadialKineticField& Fm, double macro_tol = 1e-8) {
    RadialKineticField weighted = Fm;
    for (std::size_t j = 0; j < Fm.nodes(); ++j) {
        MacroBasis basis(Fm.state[j], Fm.grid);
        auto mm = project(Fm.slice[j], basis);
        double macro_sz = 0.0;
        for (double c : mm.coeff) macro_sz = std::max(macro_sz, std::fabs(c));
        double scale = std::sqrt(Fm.slice[j].inner(Fm.slice[j])) + 1e-300;
        if (macro_sz > macro_tol * scale)
            throw std::invalid_argument("micro_moments: input has a macro component");
        weighted.slice[j] = Distribution::sample(Fm.grid, [&](const Vec3& V) {
            return m1_half(Fm.state[j], V);
        });
        for (std::size_t q = 0; q < Fm.grid.size(); ++q)
            weighted.slice[j].values[q] *= Fm.slice[j].values[q];
    }
    auto T = transport_x(weighted);
    MicroMoments out;
    out.I1.resize(Fm.nodes());
    out.I2.resize(Fm.nodes());
    out.mass_moment.resize(Fm.nodes());
    const int n = Fm.grid.n();
    for (std::size_t j = 0; j < Fm.nodes(); ++j) {
        Vec3 i1{0, 0, 0};
        double i2 = 0.0, m0 = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    std::size_t q = Fm.grid.idx(a, b, c);
                    Vec3 z = vring(Fm.state[j], Fm.grid.node(a, b, c));
                    double w = T.slice[j].values[q];
                    i1 = i1 + w * z;
                    i2 += w * norm2(z) / 3.0;
                    m0 += w;
                }
        double cw = Fm.grid.cell_weight();
        out.I1[j] = cw * i1;
        out.I2[j] = cw * i2;
        out.mass_moment[j] = cw * m0;
    }
    // X-integral of the mass moment (3-D radial measure)
    for (std::size_t j = 0; j + 1 < Fm.nodes(); ++j) {
        auto cell = [&](std::size_t q) {
            return out.mass_moment[q] * Fm.xi[q] * Fm.xi[q];
        };
        out.mass_integral += 2.0 * pi_const * (cell(j) + cell(j + 1)) *
                             (Fm.xi[j + 1] - Fm.xi[j]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile micro error E_M
// ---------------------------------------------------------------------------

/// (d_s + T) vring at (xi, V) in the local frame (closed form):
///   -E_U + 3 grad Cs - vring . grad U - (E_C - divU/3 + vring . grad Cs) vring.
inline Vec3 ds_t_vring(const ModifiedProfile& mp, double x, const Vec3& z) {
    ProfileEval ev{mp.base.get()};
    double ub = ev.U(x), dub = ev.dU(x);
    double dcs = mp.dCs_at(x);
    double ec = mp.EC_at(x), eu = mp.EU_at(x);
    double divU = dub + 2.0 * ub / x;
    double zr = z[2]; // radial component in the local frame
    // vring . grad (U e_R) = zr dU e_R + (U/xi)(vperp part)
    Vec3 vgradU = {(ub / x) * z[0], (ub / x) * z[1], zr * dub};
    double scal = ec - divU / 3.0 + zr * dcs;
    return Vec3{0.0, 0.0, -eu + 3.0 * dcs} - vgradU - scal * z;
}

/// E_M(V) = -kappa M vring . (d_s + T) vring, M = mu(vring).
inline Distribution profile_error_EM(const ModifiedProfile& mp, double x,
                                     const VelocityGrid& g) {
    ProfileEval ev{mp.base.get()};
    LocalState st;
    st.U = {0.0, 0.0, ev.U(x)};
    st.C = mp.Cs_at(x);
    return Distribution::sample(g, [&](const Vec3& V) {
        Vec3 z = vring(st, V);
        return -kappa * mu(z) * dot(z, ds_t_vring(mp, x, z));
    });
}

/// Second route: (d_s + T) M with the (d_s, d_xi) pieces by central finite
/// differences of the profile dependence and the V-parts analytic; the
/// Richardson oracle checks 2nd-order agreement with the closed form.
inline Distribution profile_error_EM_fd(std::shared_ptr<const RadialProfile> base,
                                        double R0, double s, double x,
                                        const VelocityGrid& g, double step) {
    auto mp0 = modified_profile(base, R0, s);
    auto mp_sp = modified_profile(base, R0, s + step);
    auto mp_sm = modified_profile(base, R0, s - step);
    ProfileEval ev{base.get()};
    const auto& e = base->exps;
    double dxi = step * std::max(x, 1.0);

    LocalState st{{0.0, 0.0, ev.U(x)}, mp0.Cs_at(x)};
    LocalState stp{{0.0, 0.0, ev.U(x)}, mp_sp.Cs_at(x)};
    LocalState stm{{0.0, 0.0, ev.U(x)}, mp_sm.Cs_at(x)};
    LocalState sxp{{0.0, 0.0, ev.U(x + dxi)}, mp0.Cs_at(x + dxi)};
    LocalState sxm{{0.0, 0.0, ev.U(x - dxi)}, mp0.Cs_at(x - dxi)};

    return Distribution::sample(g, [&](const Vec3& V) {
        double dsM = (mu(vring(stp, V)) - mu(vring(stm, V))) / (2.0 * step);
        double dxM = (mu(vring(sxp, V)) - mu(vring(sxm, V))) / (2.0 * dxi);
        Vec3 z = vring(st, V);
        double M = mu(z);
        Vec3 gradVM = (-kappa / st.C * M) * z; // analytic velocity gradient
        // angular frame-rotation part of V . grad_X for the radial class
        double ang = -(V[2] * (V[0] * gradVM[0] + V[1] * gradVM[1]) -
                       (V[0] * V[0] + V[1] * V[1]) * gradVM[2]) *
                     (st.U[2] / (x * st.C)) * st.C / st.C;
        // note: rotating the frame moves the bulk-velocity offset; the
        // generator acts through gradVM scaled by U/x
        ang = -(1.0 / x) * (st.U[2] / 1.0) *
              (V[2] * (z[0] * gradVM[0] + z[1] * gradVM[1]) / std::max(1e-300, 1.0));
        // direct derivation: d_{perp} of |V - U(xi) e_R(X)|ring under frame
        // rotation equals (U/x) * (V_z gradVM_perp . eperp - Vperp ... );
        // implement via the exact identity below instead.
        (void)ang;
        // Exact angular contribution: V.grad_X M - V_z d_xi M evaluated with
        // the frame formula: -(1/x)[V_z Vperp . gradVperp M - |Vperp|^2 d_{Vz} M]
        double angular = -(1.0 / x) * (V[2] * (V[0] * gradVM[0] + V[1] * gradVM[1]) -
                                       (V[0] * V[0] + V[1] * V[1]) * gradVM[2]);
        return dsM + e.c_x * x * dxM + V[2] * dxM + angular +
               e.c_v * dot(V, gradVM);
    });
}

// ---------------------------------------------------------------------------
// Positivity-ready initial data
// ---------------------------------------------------------------------------

struct InitialDataCoefficients {
    double c1 = 0.0, c2 = 0.0;
    double resid_mass = 0.0, resid_energy = 0.0; // orthogonality residuals
};

/// Solve the 2x2 system for (c1,c2) in the specific micro-perturbation
///   F_m,pos = <X>^{-l}(Cs^{-3/2} <vring>^{-2} + (c1 + c2(|vring|^2 - 9/5)) M1^{1/2})
/// enforcing <M1^{1/2} F_m,pos, {1, |vring|^2}>_V = 0. The system is
/// X-independent; the integrals reduce to radial 1-D quadrature
/// (composite Simpson; the <z>^{-2} integrand is not Gaussian-polynomial,
/// so the tensor Gauss-Hermite rule is not exact for it).
inline InitialDataCoefficients initial_data_coefficients(int panels = 4000) {
    auto radial = [&](auto&& f, int np) {
        // int_0^inf f(r) r^2 dr by composite Simpson on [0, 30]
        double a = 0.0, b = 30.0, h = (b - a) / np, acc = 0.0;
        for (int i = 0; i <= np; ++i) {
            double r = a + i * h;
            double w = (i == 0 || i == np) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * f(r) * r * r;
        }
        return acc * h / 3.0 * 4.0 * pi_const;
    };
    auto mu_r = [](double r) { return mu_of_sq(r * r); };
    auto mu_half_r = [](double r) { return std::sqrt(mu_of_sq(r * r)); };

    auto solve_with = [&](int np) {
        double m1 = radial([&](double r) { return mu_half_r(r) / (1.0 + r * r); }, np);
        double m2 = radial([&](double r) { return mu_half_r(r) / (1.0 + r * r) * r * r; }, np);
        double a11 = radial(mu_r, np);
        double a12 = radial([&](double r) { return mu_r(r) * (r * r - 9.0 / 5.0); }, np);
        double a21 = radial([&](double r) { return mu_r(r) * r * r; }, np);
        double a22 = radial([&](double r) { return mu_r(r) * (r * r - 9.0 / 5.0) * r * r; }, np);
        double det = a11 * a22 - a12 * a21;
        return std::array<double, 4>{(-m1 * a22 + m2 * a12) / det,
                                     (-a11 * m2 + a21 * m1) / det, m1, m2};
    };
    auto c = solve_with(panels);
    InitialDataCoefficients out;
    out.c1 = c[0];
    out.c2 = c[1];
    // orthogonality residuals re-evaluated with an independent finer rule
    auto fine = [&](auto&& h) {
        return radial([&](double r) {
            double z2 = r * r;
            return (mu_half_r(r) / (1.0 + z2) +
                    (out.c1 + out.c2 * (z2 - 9.0 / 5.0)) * mu_r(r)) *
                   h(z2);
        }, panels * 2 + 2);
    };
    out.resid_mass = std::fabs(fine([](double) { return 1.0; }));
    out.resid_energy = std::fabs(fine([](double z2) { return z2; }));
    return out;
}

struct InitialDataReport {
    double c1 = 0.0, c2 = 0.0;
    double delta1 = 0.0;
    double b_used = 0.0;
    double min_margin = 0.0; // min over grid of F_in - M/2
    double worst_x = 0.0;
    double ortho_resid = 0.0;
    bool positive = true;
};

/// Assemble F_in = M + M1^{1/2}(delta1 (F_m,pos + P_m H) + F_M(w)) over the
/// radial x nodes and velocity grid; backtracks b in delta1 = b delta^{2/3}
/// until F_in >= M/2 (mirrors the existence-of-b argument).
inline InitialDataReport build_initial_data(
    double delta, const ModifiedProfile& mp, const VelocityGrid& g,
    const std::vector<double>& xnodes, double l_exp,
    const std::vector<Distribution>* micro_H = nullptr,
    const std::vector<HydroTriple>* macro_w = nullptr) {
    auto co = initial_data_coefficients();
    InitialDataReport rep;
    rep.c1 = co.c1;
    rep.c2 = co.c2;
    rep.ortho_resid = std::max(co.resid_mass, co.resid_energy);
    ProfileEval ev{mp.base.get()};

    double b = 1.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        double delta1 = b * std::pow(delta, 2.0 / 3.0);
        double worst = 1e300, worst_x = 0.0;
        for (std::size_t j = 0; j < xnodes.size(); ++j) {
            double x = xnodes[j];
            LocalState st;
            st.U = {0.0, 0.0, ev.U(x)};
            st.C = mp.Cs_at(x);
            double xl = std::pow(jbracket(x), -l_exp);
            MacroBasis* basis = nullptr;
            Distribution macro_term(g);
            if (macro_w) {
                basis = new MacroBasis(st, g);
                macro_term = f_M((*macro_w)[j], *basis);
            }
            const int n = g.n();
            for (int a = 0; a < n; ++a)
                for (int bb = 0; bb < n; ++bb)
                    for (int c = 0; c < n; ++c) {
                        Vec3 V = g.node(a, bb, c);
                        Vec3 z = vring(st, V);
                        double z2 = norm2(z);
                        double M = mu_of_sq(z2);
                        double m1h = std::pow(st.C, -1.5) * std::sqrt(M);
                        double fmpos =
                            xl * (std::pow(st.C, -1.5) / (1.0 + z2) +
                                  (co.c1 + co.c2 * (z2 - 9.0 / 5.0)) * m1h);
                        double pert = delta1 * fmpos;
                        if (micro_H) pert += delta1 * (*micro_H)[j].at(a, bb, c);
                        if (macro_w) pert += macro_term.at(a, bb, c);
                        double fin = M + m1h * pert;
                        double margin = fin - 0.5 * M;
                        if (margin < worst) {
                            worst = margin;
                            worst_x = x;
                        }
                    }
            delete basis;
        }
        rep.delta1 = delta1;
        rep.b_used = b;
        rep.min_margin = worst;
        rep.worst_x = worst_x;
        rep.positive = worst >= 0.0;
        if (rep.positive) break;
        b *= 0.5;
    }
    return rep;
}

} // namespace landau
