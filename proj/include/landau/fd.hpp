#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace landau {

/// Derivative of the Lagrange interpolant through (x[i],y[i]) at xc.
/// Used for high-order finite differences on nonuniform grids.
inline double lagrange_deriv(const double* x, const double* y, int n, double xc) {
    double d = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            double p = 1.0;
            for (int k = 0; k < n; ++k) {
                if (k == j || k == i) continue;
                p *= (xc - x[k]) / (x[j] - x[k]);
            }
            s += p / (x[j] - x[i]);
        }
        d += s * y[j];
    }
    return d;
}

/// 4th-order first derivative of sampled values on a (possibly nonuniform)
/// strictly increasing grid, via local 5-point polynomial fit.
inline std::vector<double> deriv4(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 5 || y.size() != x.size())
        throw std::invalid_argument("deriv4: need >=5 samples");
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) {
        int lo = i - 2;
        if (lo < 0) lo = 0;
        if (lo > n - 5) lo = n - 5;
        d[i] = lagrange_deriv(&x[lo], &y[lo], 5, x[i]);
    }
    return d;
}

/// Linear interpolation with clamped ends.
inline double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double xc) {
    if (xc <= x.front()) return y.front();
    if (xc >= x.back()) return y.back();
    std::size_t hi = std::lower_bound(x.begin(), x.end(), xc) - x.begin();
    std::size_t lo = hi - 1;
    double t = (xc - x[lo]) / (x[hi] - x[lo]);
    return (1.0 - t) * y[lo] + t * y[hi];
}

/// Cubic (4-point Lagrange) interpolation on a strictly increasing grid.
inline double interp_cubic(const std::vector<double>& x, const std::vector<double>& y, double xc) {
    const int n = static_cast<int>(x.size());
    if (n < 4) return interp_linear(x, y, xc);
    if (xc <= x.front()) xc = x.front();
    if (xc >= x.back()) xc = x.back();
    int hi = static_cast<int>(std::lower_bound(x.begin(), x.end(), xc) - x.begin());
    int lo = hi - 2;
    if (lo < 0) lo = 0;
    if (lo > n - 4) lo = n - 4;
    double r = 0.0;
    for (int j = lo; j < lo + 4; ++j) {
        double p = y[j];
        for (int k = lo; k < lo + 4; ++k)
            if (k != j) p *= (xc - x[k]) / (x[j] - x[k]);
        r += p;
    }
    return r;
}

} // namespace landau
