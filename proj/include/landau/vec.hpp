#pragma once

#include <array>
#include <cmath>

namespace landau {

using Vec3 = std::array<double, 3>;

/// Symmetric 3x3 matrix stored as (xx, yy, zz, xy, xz, yz).
struct Sym3 {
    std::array<double, 6> a{};

    double xx() const { return a[0]; }
    double yy() const { return a[1]; }
    double zz() const { return a[2]; }
    double xy() const { return a[3]; }
    double xz() const { return a[4]; }
    double yz() const { return a[5]; }

    double operator()(int i, int j) const {
        if (i == j) return a[i];
        int k = i + j; // 0+1->xy(3), 0+2->xz(4), 1+2->yz(5)
        return a[k + 2];
    }

    Sym3& operator+=(const Sym3& o) {
        for (int i = 0; i < 6; ++i) a[i] += o.a[i];
        return *this;
    }
    Sym3 operator*(double s) const {
        Sym3 r;
        for (int i = 0; i < 6; ++i) r.a[i] = a[i] * s;
        return r;
    }

    Vec3 apply(const Vec3& v) const {
        return {a[0] * v[0] + a[3] * v[1] + a[4] * v[2],
                a[3] * v[0] + a[1] * v[1] + a[5] * v[2],
                a[4] * v[0] + a[5] * v[1] + a[2] * v[2]};
    }
    double quad(const Vec3& v) const {
        Vec3 w = apply(v);
        return v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
    }
    double trace() const { return a[0] + a[1] + a[2]; }
};

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Japanese bracket <x> = sqrt(1+|x|^2).
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }
inline double jbracket(const Vec3& x) { return std::sqrt(1.0 + norm2(x)); }

} // namespace landau
