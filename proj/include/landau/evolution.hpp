#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "landau/collision.hpp"
#include "landau/modified_profile.hpp"
#include "landau/weight.hpp"

namespace landau {

// ---------------------------------------------------------------------------
// Radial hydrodynamic state and weighted norms
// ---------------------------------------------------------------------------

/// Radial perturbation fields (U~ e_R, P~, B~) on a fixed xi grid.
struct HydroState {
    std::vector<double> xi;
    std::vector<double> Ut, Pt, Bt;

    explicit HydroState(std::vector<double> grid)
        : xi(std::move(grid)), Ut(xi.size(), 0.0), Pt(xi.size(), 0.0), Bt(xi.size(), 0.0) {}

    std::size_t size() const { return xi.size(); }
    HydroState& axpy(double a, const HydroState& o) {
        for (std::size_t i = 0; i < xi.size(); ++i) {
            Ut[i] += a * o.Ut[i];
            Pt[i] += a * o.Pt[i];
            Bt[i] += a * o.Bt[i];
        }
        return *this;
    }
    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i)
            m = std::max({m, std::fabs(Ut[i]), std::fabs(Pt[i]), std::fabs(Bt[i])});
        return m;
    }
    /// innermost radius where any field exceeds tol (1e30 if none).
    double support_min(double tol) const {
        for (std::size_t i = 0; i < xi.size(); ++i)
            if (std::fabs(Ut[i]) > tol || std::fabs(Pt[i]) > tol || std::fabs(Bt[i]) > tol)
                return xi[i];
        return 1e30;
    }
};

struct NormSpec {
    int k = 0;
    double eta = 0.0;
    const WeightFamily* weight = nullptr; // needed for k >= 1
    double varpi = 1.0;
    double nu = 1.0;
    double w_B = 1.5;
};

namespace detail {

/// First- and second-derivative stencil tables for a radial grid with
/// odd/even parity ghosts at the origin and one-sided closure at xi_max.
struct RadialDeriv {
    const std::vector<double>* xi;

    double d1(const std::vector<double>& y, std::size_t i, int parity) const {
        return apply(y, i, parity, 1);
    }
    double d2(const std::vector<double>& y, std::size_t i, int parity) const {
        return apply(y, i, parity, 2);
    }

  private:
    double apply(const std::vector<double>& y, std::size_t i, int parity, int order) const {
        const auto& x = *xi;
        const int n = static_cast<int>(x.size());
        double xs[5], ys[5];
        int lo = static_cast<int>(i) - 2;
        if (lo > n - 5) lo = n - 5;
        // allow the stencil to run into mirrored ghosts at the center
        for (int q = 0; q < 5; ++q) {
            int m = lo + q;
            if (m >= 0) {
                xs[q] = x[m];
                ys[q] = y[m];
            } else {
                int mm = -m - 1; // mirror across xi = 0
                xs[q] = -x[mm];
                ys[q] = parity < 0 ? -y[mm] : y[mm];
            }
        }
        if (order == 1) return lagrange_deriv(xs, ys, 5, x[i]);
        // 2nd derivative of the quartic interpolant
        double d2 = 0.0;
        for (int j = 0; j < 5; ++j) {
            double s = 0.0;
            for (int a = 0; a < 5; ++a) {
                if (a == j) continue;
                for (int b = 0; b < 5; ++b) {
                    if (b == j || b == a) continue;
                    double p = 1.0;
                    for (int c = 0; c < 5; ++c) {
                        if (c == j || c == a || c == b) continue;
                        p *= (x[i] - xs[c]) / (xs[j] - xs[c]);
                    }
                    s += p / ((xs[j] - xs[a]) * (xs[j] - xs[b]));
                }
            }
            d2 += s * ys[j];
        }
        return d2;
    }
};

} // namespace detail

/// Weighted X-norm of a radial state: k = 0 is the plain weighted L^2 of
/// norm X^0_eta; k >= 1 adds w_g |Lap^k g|^2 phi_{2k}^2 + varpi g^2 terms.
inline double x_norm(const HydroState& W, const NormSpec& spec) {
    detail::RadialDeriv D{&W.xi};
    std::size_t n = W.size();
    std::vector<double> lapU(n, 0.0), lapP(n, 0.0), lapB(n, 0.0);
    if (spec.k >= 1) {
        const std::vector<double>*srcU = &W.Ut, *srcP = &W.Pt, *srcB = &W.Bt;
        std::vector<double> tU, tP, tB;
        for (int rep = 0; rep < spec.k; ++rep) {
            tU.assign(n, 0.0);
            tP.assign(n, 0.0);
            tB.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double x = W.xi[i];
                // vector Laplacian for U e_R, scalar for P and B
                tU[i] = D.d2(*srcU, i, -1) + 2.0 * D.d1(*srcU, i, -1) / x -
                        2.0 * (*srcU)[i] / (x * x);
                tP[i] = D.d2(*srcP, i, +1) + 2.0 * D.d1(*srcP, i, +1) / x;
                tB[i] = D.d2(*srcB, i, +1) + 2.0 * D.d1(*srcB, i, +1) / x;
            }
            lapU = tU;
            lapP = tP;
            lapB = tB;
            srcU = &lapU;
            srcP = &lapP;
            srcB = &lapB;
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto cell = [&](std::size_t q) {
            double x = W.xi[q];
            double wx = std::pow(jbracket(x), spec.eta) * x * x;
            double phi2k = spec.k >= 1 && spec.weight
                               ? std::pow(spec.weight->phi1(x), 2 * spec.k)
                               : 1.0;
            double s = W.Ut[q] * W.Ut[q] + W.Pt[q] * W.Pt[q] +
                       spec.w_B * W.Bt[q] * W.Bt[q];
            if (spec.k == 0) return wx * s;
            double d = lapU[q] * lapU[q] + lapP[q] * lapP[q] +
                       spec.w_B * lapB[q] * lapB[q];
            return wx * (d * phi2k * phi2k + spec.varpi * s);
        };
        acc += 0.5 * (cell(i) + cell(i + 1)) * (W.xi[i + 1] - W.xi[i]);
    }
    return std::sqrt(4.0 * pi_const * acc);
}

// ---------------------------------------------------------------------------
// Linearized Euler operator (s-dependent and limiting forms)
// ---------------------------------------------------------------------------

/// Frozen coefficient tables for L_{E,s} (or the limiting L_E) on a grid.
struct LinEulerOp {
    std::vector<double> xi;
    bool limiting;
    // coefficients per node
    std::vector<double> adv;   // c_x xi + U
    std::vector<double> Cs, dCs, Cb, dCb, dU, divU, EC, EU;
    double c_v, c_x;

    /// Coefficients evaluated on the caller's grid (the grid the evolved
    /// state lives on), via the profile interpolants.
    LinEulerOp(const ModifiedProfile& mp, std::vector<double> grid, bool limit)
        : xi(std::move(grid)), limiting(limit) {
        const auto& e = mp.exps();
        c_v = e.c_v;
        c_x = e.c_x;
        ProfileEval ev{mp.base.get()};
        std::size_t n = xi.size();
        adv.resize(n);
        Cs.resize(n);
        dCs.resize(n);
        Cb.resize(n);
        dCb.resize(n);
        dU.resize(n);
        divU.resize(n);
        EC.assign(n, 0.0);
        EU.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double x = xi[i];
            double ub = ev.U(x);
            adv[i] = e.c_x * x + ub;
            Cb[i] = ev.C(x);
            dCb[i] = ev.dC(x);
            Cs[i] = limit ? Cb[i] : mp.Cs_at(x);
            dCs[i] = limit ? dCb[i] : mp.dCs_at(x);
            dU[i] = ev.dU(x);
            divU[i] = dU[i] + 2.0 * ub / x;
            if (!limit && !mp.E_C.empty()) {
                EC[i] = mp.EC_at(x);
                EU[i] = mp.EU_at(x);
            }
        }
    }

    /// CFL bound 0.4 min(dxi / (c_x xi + |U| + Cs)).
    double cfl_dt() const {
        double dt = 1e30;
        for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
            double speed = std::fabs(adv[i]) + Cs[i];
            dt = std::min(dt, 0.4 * (xi[i + 1] - xi[i]) / speed);
        }
        return dt;
    }

    HydroState apply(const HydroState& W) const {
        detail::RadialDeriv D{&W.xi};
        std::size_t n = W.size();
        HydroState out(W.xi);
        for (std::size_t i = 0; i < n; ++i) {
            double x = W.xi[i];
            double dUt = D.d1(W.Ut, i, -1);
            double dPt = D.d1(W.Pt, i, +1);
            double dBt = D.d1(W.Bt, i, +1);
            double divUt = dUt + 2.0 * W.Ut[i] / x;
            double cp_grad = limiting ? dCb[i] : dCs[i];
            // L_U
            double LU = -adv[i] * dUt - Cs[i] * dPt +
                        (3.0 * c_v - (2.0 / 3.0) * divU[i] - dU[i] - EC[i]) * W.Ut[i] -
                        2.0 * cp_grad * W.Pt[i];
            LU += limiting ? 3.0 * dCb[i] * (W.Pt[i] + W.Bt[i])
                           : 3.0 * (Cb[i] / Cs[i]) * dCb[i] * (W.Pt[i] + W.Bt[i]);
            // L_P
            double LP = -adv[i] * dPt - Cs[i] * divUt +
                        (3.0 * c_v - divU[i] - 2.0 * EC[i]) * W.Pt[i] -
                        (cp_grad + (2.0 / 3.0) * EU[i]) * W.Ut[i];
            // L_B
            double LB = -adv[i] * dBt + (3.0 * c_v - divU[i]) * W.Bt[i] +
                        2.0 * EC[i] * W.Pt[i] + (2.0 / 3.0) * EU[i] * W.Ut[i];
            out.Ut[i] = LU;
            out.Pt[i] = LP;
            out.Bt[i] = LB;
        }
        return out;
    }

};

struct EvolveResult {
    std::vector<double> s;
    std::vector<double> norm;        // ||W(s)||_{X^0_eta}
    std::vector<double> support_min; // inner support edge
    HydroState final;
    bool aborted = false;

    EvolveResult(HydroState f) : final(std::move(f)) {}

    /// least-squares slope of log norm vs s over [s0, s1]
    double decay_slope(double s0, double s1) const {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < s0 || s[i] > s1 || norm[i] <= 0.0) continue;
            double lx = s[i], ly = std::log(norm[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++m;
        }
        return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
};

/// Classical RK4 evolution of dW/ds = L W with the X^0_eta norm series.
inline EvolveResult lin_euler_evolve(const LinEulerOp& op, HydroState W0, double T,
                                     double dt, double eta) {
    if (dt > op.cfl_dt())
        throw std::invalid_argument("lin_euler_evolve: dt violates the CFL bound");
    NormSpec ns;
    ns.k = 0;
    ns.eta = eta;
    EvolveResult res(W0);
    HydroState W = std::move(W0);
    int steps = static_cast<int>(std::ceil(T / dt));
    double supp_tol = 1e-12 * std::max(W.max_abs(), 1e-300);
    int record_every = std::max(1, steps / 400);
    for (int n = 0; n <= steps; ++n) {
        if (n % record_every == 0 || n == steps) {
            res.s.push_back(n * dt);
            res.norm.push_back(x_norm(W, ns));
            res.support_min.push_back(W.support_min(supp_tol));
            if (res.norm.back() > 1e10 * (res.norm.front() + 1e-300)) {
                res.aborted = true;
                break;
            }
        }
        if (n == steps) break;
        HydroState k1 = op.apply(W);
        HydroState w2 = W;
        w2.axpy(0.5 * dt, k1);
        HydroState k2 = op.apply(w2);
        HydroState w3 = W;
        w3.axpy(0.5 * dt, k2);
        HydroState k3 = op.apply(w3);
        HydroState w4 = W;
        w4.axpy(dt, k3);
        HydroState k4 = op.apply(w4);
        W.axpy(dt / 6.0, k1);
        W.axpy(dt / 3.0, k2);
        W.axpy(dt / 3.0, k3);
        W.axpy(dt / 6.0, k4);
    }
    res.final = std::move(W);
    return res;
}

// ---------------------------------------------------------------------------
// Homogeneous relaxation
// ---------------------------------------------------------------------------

enum class KineticScheme { explicit_euler, semi_implicit_diagonal };

/// One forward step of d_t f = Q(f,f).
/// The semi-implicit option freezes A[f], divA[f], treats the axis-diagonal
/// diffusion+drift implicitly (Chang-Cooper weighted tridiagonal sweeps,
/// positivity-preserving) and the off-diagonal diffusion explicitly.
struct HomogeneousStepper {
    std::shared_ptr<const KernelTable> kt;
    KineticScheme scheme;
    double cfl = 0.4;
    int refresh_every = 1; // coefficient refresh cadence (semi-implicit)

    mutable DiffusionField frozen;
    mutable int since_refresh = 1 << 30;
    std::vector<double> coeff_mask; // rolls the huge corner coefficients off

    HomogeneousStepper(std::shared_ptr<const KernelTable> table, KineticScheme sc)
        : kt(std::move(table)), scheme(sc) {
        // The diffusion coefficients grow like |v|^{gamma+2}; grid corners
        // where f vanishes would otherwise dictate the stable step. Roll the
        // coefficients off smoothly beyond |v| = L - 5h (flux form keeps the
        // mass conservation exact regardless).
        const KernelTable& t = *kt;
        const int P = t.pad();
        const double L = t.grid().extent();
        const double h = t.grid().h();
        double r_hi = L - 2.0 * h, r_lo = L - 5.0 * h;
        coeff_mask.assign(t.cube_size(), 0.0);
        for (int i = 0; i < P; ++i)
            for (int j = 0; j < P; ++j)
                for (int k = 0; k < P; ++k) {
                    double r = norm(torus_coord(t, i, j, k));
                    coeff_mask[t.idx(i, j, k)] =
                        r <= r_lo ? 1.0
                                  : (r >= r_hi ? 0.0
                                               : smoothstep_exp((r_hi - r) / (r_hi - r_lo)));
                }
    }

    DiffusionField masked_coeff(const Distribution& f) const {
        DiffusionField D = coeff_A(f, *kt);
        for (int c = 0; c < 6; ++c)
            for (std::size_t q = 0; q < D.A[c].size(); ++q) D.A[c][q] *= coeff_mask[q];
        for (int c = 0; c < 3; ++c)
            for (std::size_t q = 0; q < D.divA[c].size(); ++q) D.divA[c][q] *= coeff_mask[q];
        return D;
    }

    double max_diag_A(const DiffusionField& D) const {
        double m = 0.0;
        const int n = kt->grid().n();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    std::size_t q = kt->idx(i, j, k);
                    m = std::max({m, D.A[0][q], D.A[1][q], D.A[2][q]});
                }
        return m;
    }

    /// Largest stable explicit dt estimate for the current state.
    double stable_dt(const Distribution& f) const {
        auto D = masked_coeff(f);
        double h = kt->grid().h();
        return cfl * h * h / std::max(max_diag_A(D), 1e-300);
    }

    Distribution step(const Distribution& f, double dt) const {
        if (scheme == KineticScheme::explicit_euler) {
            auto D = masked_coeff(f);
            double h = kt->grid().h();
            double dt_max = cfl * h * h / std::max(max_diag_A(D), 1e-300);
            if (dt > dt_max)
                throw std::invalid_argument("step_homogeneous: dt violates the diffusion CFL");
            Distribution out = f;
            out.axpy(dt, apply_Q(D, f));
            return out;
        }
        return semi_implicit_step(f, dt);
    }

    /// Q with the given (possibly masked) coefficient tables, centered flux form.
    Distribution apply_Q(const DiffusionField& D, const Distribution& g) const {
        const KernelTable& t = *kt;
        TorusField gt = TorusField::embed(t, g);
        std::array<std::vector<double>, 3> dg;
        for (int d = 0; d < 3; ++d) detail::centered_diff(t, gt.v, d, dg[d]);
        const std::size_t tot = t.cube_size();
        static const int comp[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
        TorusField Q(t);
        std::vector<double> flux(tot), tmp;
        for (int c = 0; c < 3; ++c) {
            for (std::size_t q = 0; q < tot; ++q) {
                double acc = 0.0;
                for (int d = 0; d < 3; ++d) acc += D.A[comp[c][d]][q] * dg[d][q];
                flux[q] = acc - D.divA[c][q] * gt.v[q];
            }
            detail::centered_diff(t, flux, c, tmp);
            for (std::size_t q = 0; q < tot; ++q) Q.v[q] += tmp[q];
        }
        return Q.restrict_box(g.grid);
    }

  private:
    Distribution semi_implicit_step(const Distribution& f, double dt) const {
        const KernelTable& t = *kt;
        const int n = t.grid().n();
        const double h = t.grid().h();
        if (since_refresh >= refresh_every) {
            frozen = masked_coeff(f);
            since_refresh = 0;
        }
        ++since_refresh;
        const DiffusionField& D = frozen;

        // explicit off-diagonal diffusion in conservative flux form:
        // for each pair (a,b), d_a(A_ab d_b f) + d_b(A_ab d_a f) via
        // centered 2nd-order differences of node fluxes
        Distribution work = f;
        {
            TorusField ft = TorusField::embed(t, f);
            std::array<std::vector<double>, 3> df;
            for (int d = 0; d < 3; ++d) detail::centered_diff(t, ft.v, d, df[d]);
            static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            static const int comp_of[3] = {3, 4, 5}; // xy, xz, yz
            const std::size_t tot = t.cube_size();
            std::vector<double> fa(tot), fb(tot), tmp;
            TorusField acc(t);
            for (int p = 0; p < 3; ++p) {
                int a = pairs[p][0], b = pairs[p][1], c = comp_of[p];
                for (std::size_t q = 0; q < tot; ++q) {
                    fa[q] = D.A[c][q] * df[b][q];
                    fb[q] = D.A[c][q] * df[a][q];
                }
                detail::centered_diff(t, fa, a, tmp);
                for (std::size_t q = 0; q < tot; ++q) acc.v[q] += tmp[q];
                detail::centered_diff(t, fb, b, tmp);
                for (std::size_t q = 0; q < tot; ++q) acc.v[q] += tmp[q];
            }
            Distribution expl = acc.restrict_box(t.grid());
            work.axpy(dt, expl);
        }

        // implicit Chang-Cooper sweeps along each axis:
        // (I - dt d_a(A_aa d_a . - b_a .)) f = work
        Distribution cur = work;
        std::vector<double> diag(n), lower(n), upper(n), rhs(n), sol(n);
        for (int axis = 0; axis < 3; ++axis) {
            Distribution next = cur;
            for (int u = 0; u < n; ++u)
                for (int v = 0; v < n; ++v) {
                    // build the pencil along `axis`
                    auto node_index = [&](int m) {
                        int i = axis == 0 ? m : (axis == 1 ? u : u);
                        int j = axis == 1 ? m : (axis == 0 ? u : v);
                        int k = axis == 2 ? m : v;
                        return std::pair<std::size_t, std::size_t>(
                            cur.grid.idx(i, j, k), t.idx(i, j, k));
                    };
                    for (int m = 0; m < n; ++m) {
                        diag[m] = 1.0;
                        lower[m] = upper[m] = 0.0;
                        rhs[m] = cur.values[node_index(m).first];
                    }
                    // interior faces m+1/2, m = 0..n-2
                    for (int m = 0; m + 1 < n; ++m) {
                        auto [bi0, ti0] = node_index(m);
                        auto [bi1, ti1] = node_index(m + 1);
                        double Aface =
                            0.5 * (D.A[axis][ti0] + D.A[axis][ti1]);
                        if (Aface <= 0.0) Aface = 1e-300;
                        double bface = 0.5 * (D.divA[axis][ti0] + D.divA[axis][ti1]);
                        double w = bface * h / Aface;
                        // Chang-Cooper weight: delta in (0,1), 1/2 at w=0
                        double delta;
                        if (std::fabs(w) < 1e-8)
                            delta = 0.5 - w / 12.0;
                        else
                            delta = 1.0 / w - 1.0 / std::expm1(w);
                        // flux = Aface (f1 - f0)/h - bface ((1-delta) f1 + delta f0)
                        double cdt = dt / h;
                        double a0 = Aface / h;
                        // contribution to node m: +flux/h ; node m+1: -flux/h
                        double c_f0 = (a0 * -1.0 - bface * delta) * cdt;
                        double c_f1 = (a0 * 1.0 - bface * (1.0 - delta)) * cdt;
                        // implicit: move to the matrix (I - dt L)
                        diag[m] -= c_f0;
                        upper[m] -= c_f1;
                        diag[m + 1] += c_f1;
                        lower[m + 1] += c_f0;
                    }
                    // Thomas solve
                    for (int m = 1; m < n; ++m) {
                        double w = lower[m] / diag[m - 1];
                        diag[m] -= w * upper[m - 1];
                        rhs[m] -= w * rhs[m - 1];
                    }
                    sol[n - 1] = rhs[n - 1] / diag[n - 1];
                    for (int m = n - 2; m >= 0; --m)
                        sol[m] = (rhs[m] - upper[m] * sol[m + 1]) / diag[m];
                    for (int m = 0; m < n; ++m) next.values[node_index(m).first] = sol[m];
                }
            cur = next;
        }
        return cur;
    }
};

struct RelaxDiagnostics {
    std::vector<double> t;
    std::vector<double> mass, mom_x, mom_y, mom_z, energy, entropy, l1_dist, min_f;
    bool entropy_monotone = true;
    double worst_entropy_jump = 0.0;
    Distribution final;

    RelaxDiagnostics(Distribution f) : final(std::move(f)) {}
};

inline double entropy_of(const Distribution& f) {
    double s = 0.0;
    for (double v : f.values)
        if (v > 0.0) s += v * std::log(v);
    return s * f.grid.cell_weight();
}

/// L1 distance to the Maxwellian with the same (rho, U, Theta).
inline double l1_to_matched_maxwellian(const Distribution& f) {
    double rho = f.integral();
    Vec3 U = {f.moment([](const Vec3& v) { return v[0]; }) / rho,
              f.moment([](const Vec3& v) { return v[1]; }) / rho,
              f.moment([](const Vec3& v) { return v[2]; }) / rho};
    double e2 = f.moment([&](const Vec3& v) { return norm2(v - U); });
    double theta = e2 / (3.0 * rho);
    MaxwellianParams p{rho, U, theta};
    double d = 0.0;
    const int n = f.grid.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                d += std::fabs(f.at(i, j, k) - maxwellian(p, f.grid.node(i, j, k)));
    return d * f.grid.cell_weight() / rho;
}

inline RelaxDiagnostics relax_run(const Distribution& f0, double T, double gamma,
                                  KineticScheme scheme, double dt = 0.0,
                                  int refresh_every = 2, int record_every = 10) {
    auto kt = std::make_shared<KernelTable>(f0.grid, gamma);
    HomogeneousStepper st(kt, scheme);
    st.refresh_every = refresh_every;
    double dmin = 0.0;
    for (double v : f0.values) dmin = std::min(dmin, v);
    RelaxDiagnostics diag(f0);
    Distribution f = f0;
    if (dt <= 0.0) {
        double expl = st.stable_dt(f0);
        dt = scheme == KineticScheme::explicit_euler ? expl : 1.5 * expl;
    }
    int steps = static_cast<int>(std::ceil(T / dt));
    double scale = std::fabs(entropy_of(f0)) + 1.0;
    double prev_entropy = 1e300;
    for (int n = 0; n <= steps; ++n) {
        if (n % record_every == 0 || n == steps) {
            diag.t.push_back(n * dt);
            diag.mass.push_back(f.integral());
            diag.mom_x.push_back(f.moment([](const Vec3& v) { return v[0]; }));
            diag.mom_y.push_back(f.moment([](const Vec3& v) { return v[1]; }));
            diag.mom_z.push_back(f.moment([](const Vec3& v) { return v[2]; }));
            diag.energy.push_back(f.moment([](const Vec3& v) { return norm2(v); }));
            double S = entropy_of(f);
            diag.entropy.push_back(S);
            diag.l1_dist.push_back(l1_to_matched_maxwellian(f));
            double mn = 0.0;
            for (double v : f.values) mn = std::min(mn, v);
            diag.min_f.push_back(mn);
            if (S > prev_entropy + 1e-8 * scale) {
                diag.entropy_monotone = false;
                diag.worst_entropy_jump = std::max(diag.worst_entropy_jump, S - prev_entropy);
            }
            prev_entropy = S;
        }
        if (n == steps) break;
        f = st.step(f, dt);
    }
    diag.final = std::move(f);
    return diag;
}

} // namespace landau
