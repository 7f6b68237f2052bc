#pragma once

#include <cmath>

namespace landau {

/// Fixed C^infinity radial bump shared by every module that cuts off a
/// profile: chi(rho) = 1 for rho <= 1, 0 for rho >= 2, and in between the
/// exponential partition  chi = phi(2-rho) / (phi(2-rho) + phi(rho-1)),
/// phi(t) = exp(-1/t) (t > 0), phi = 0 otherwise.
inline double cutoff_phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double cutoff_chi(double rho) {
    if (rho <= 1.0) return 1.0;
    if (rho >= 2.0) return 0.0;
    double a = cutoff_phi(2.0 - rho);
    double b = cutoff_phi(rho - 1.0);
    return a / (a + b);
}

/// d chi / d rho (closed form; zero outside (1,2)).
inline double cutoff_chi_prime(double rho) {
    if (rho <= 1.0 || rho >= 2.0) return 0.0;
    double a = cutoff_phi(2.0 - rho);
    double b = cutoff_phi(rho - 1.0);
    double da = -a / ((2.0 - rho) * (2.0 - rho)); // d/drho exp(-1/(2-rho))
    double db = b / ((rho - 1.0) * (rho - 1.0));
    double s = a + b;
    return (da * s - a * (da + db)) / (s * s);
}

/// Smooth monotone step: 0 for t <= 0, 1 for t >= 1.
inline double smoothstep_exp(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = cutoff_phi(t);
    double b = cutoff_phi(1.0 - t);
    return a / (a + b);
}

} // namespace landau
