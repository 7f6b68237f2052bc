#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace landau {

/// Truncated power series in one variable, coefficients c[k] for tau^k,
/// fixed max order. Exact arithmetic on jets; used for the sonic-point and
/// origin expansions of the profile ODE.
template <int Ord>
struct Jet {
    std::array<double, Ord + 1> c{};

    static Jet constant(double a) {
        Jet j;
        j.c[0] = a;
        return j;
    }
    static Jet variable(double a) { // a + tau
        Jet j;
        j.c[0] = a;
        if constexpr (Ord >= 1) j.c[1] = 1.0;
        return j;
    }

    Jet operator+(const Jet& o) const {
        Jet r;
        for (int k = 0; k <= Ord; ++k) r.c[k] = c[k] + o.c[k];
        return r;
    }
    Jet operator-(const Jet& o) const {
        Jet r;
        for (int k = 0; k <= Ord; ++k) r.c[k] = c[k] - o.c[k];
        return r;
    }
    Jet operator*(const Jet& o) const {
        Jet r;
        for (int k = 0; k <= Ord; ++k)
            for (int j = 0; j <= k; ++j) r.c[k] += c[j] * o.c[k - j];
        return r;
    }
    Jet operator*(double s) const {
        Jet r;
        for (int k = 0; k <= Ord; ++k) r.c[k] = c[k] * s;
        return r;
    }
    Jet operator-() const { return (*this) * -1.0; }

    /// 1/this; requires nonzero constant term.
    Jet recip() const {
        if (c[0] == 0.0) throw std::domain_error("Jet::recip at zero");
        Jet r;
        r.c[0] = 1.0 / c[0];
        for (int k = 1; k <= Ord; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j) s += c[j] * r.c[k - j];
            r.c[k] = -s / c[0];
        }
        return r;
    }

    /// d/dtau.
    Jet deriv() const {
        Jet r;
        for (int k = 0; k < Ord; ++k) r.c[k] = (k + 1) * c[k + 1];
        return r;
    }

    /// this / tau; requires zero constant term.
    Jet div_tau() const {
        if (std::fabs(c[0]) > 1e-300) throw std::domain_error("Jet::div_tau");
        Jet r;
        for (int k = 0; k < Ord; ++k) r.c[k] = c[k + 1];
        return r;
    }

    double eval(double tau) const {
        double r = c[Ord];
        for (int k = Ord - 1; k >= 0; --k) r = r * tau + c[k];
        return r;
    }
    double eval_deriv(double tau) const {
        double r = Ord * c[Ord];
        for (int k = Ord - 1; k >= 1; --k) r = r * tau + k * c[k];
        return r;
    }
};

} // namespace landau
