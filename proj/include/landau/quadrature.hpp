#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "landau/vec.hpp"

namespace landau {

/// Gauss-Hermite rule: integrates f(x) exp(-x^2) dx exactly for
/// polynomials of degree <= 2n-1. Nodes by Newton iteration on H_n
/// with long double recurrences.
struct GaussHermite {
    std::vector<double> x, w;

    explicit GaussHermite(int n) {
        if (n < 2) throw std::invalid_argument("GaussHermite: n >= 2");
        x.resize(n);
        w.resize(n);
        const long double pi4 = 0.7511255444649424828587030047762276930510L; // pi^{-1/4}
        long double z = 0.0L;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            // initial guesses carry the previously found root in z
            if (i == 0)
                z = std::sqrt((long double)(2 * n + 1)) - 1.85575L * std::pow((long double)(2 * n + 1), -0.16667L);
            else if (i == 1)
                z -= 1.14L * std::pow((long double)n, 0.426L) / z;
            else if (i == 2)
                z = 1.86L * z - 0.86L * (long double)x[n - 1];
            else if (i == 3)
                z = 1.91L * z - 0.91L * (long double)x[n - 2];
            else
                z = 2.0L * z - (long double)x[n - i + 1];

            long double pp = 0.0L;
            for (int it = 0; it < 100; ++it) {
                long double p1 = pi4, p2 = 0.0L;
                for (int j = 0; j < n; ++j) {
                    long double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0L / (j + 1)) * p2 - std::sqrt((long double)j / (j + 1)) * p3;
                }
                pp = std::sqrt((long double)2 * n) * p2;
                long double dz = p1 / pp;
                z -= dz;
                if (std::fabs(dz) < 1e-19L) break;
            }
            x[n - 1 - i] = (double)z;
            x[i] = -(double)z;
            double wi = (double)(2.0L / (pp * pp));
            w[n - 1 - i] = wi;
            w[i] = wi;
        }
    }
};

/// Tensorized 3-D Gaussian quadrature adapted to the kinetic Gaussian
/// mu(z) = (kappa/2pi)^{3/2} exp(-kappa2 |z|^2), kappa2 = 5/6.
/// Integrates f(z) dz over R^3 for f with Gaussian-times-polynomial decay:
///   int f(z) dz = sum_i W_i f(Z_i),  W_i = w_i exp(+|x_i|^2) / kappa2^{3/2}-scaled.
struct GaussHermite3 {
    std::vector<Vec3> z;     // nodes
    std::vector<double> w;   // weights including the e^{+x^2} de-weighting
    int n1d;

    explicit GaussHermite3(int n, double alpha) : n1d(n) {
        // 1-D: int g(t) dt with substitution t = x / sqrt(alpha):
        //   int g = sum w_i e^{x_i^2} g(x_i/sqrt(alpha)) / sqrt(alpha)
        GaussHermite gh(n);
        std::vector<double> t(n), wt(n);
        double ra = 1.0 / std::sqrt(alpha);
        for (int i = 0; i < n; ++i) {
            t[i] = gh.x[i] * ra;
            wt[i] = gh.w[i] * std::exp(gh.x[i] * gh.x[i]) * ra;
        }
        z.reserve(static_cast<std::size_t>(n) * n * n);
        w.reserve(z.capacity());
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    z.push_back({t[a], t[b], t[c]});
                    w.push_back(wt[a] * wt[b] * wt[c]);
                }
    }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) s += w[i] * f(z[i]);
        return s;
    }
};

} // namespace landau
