#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace landau {

/// Iterative radix-2 complex FFT (in place) plus a cube (P^3) transform.
/// P must be a power of two. Used for the collision-kernel convolutions.
class Fft {
  public:
    using cplx = std::complex<double>;

    explicit Fft(int p) : p_(p) {
        if (p < 2 || (p & (p - 1)) != 0) throw std::invalid_argument("Fft: power of two");
        tw_.resize(static_cast<std::size_t>(p) / 2);
        const double two_pi = 6.283185307179586476925286766559;
        for (int k = 0; k < p / 2; ++k) {
            double a = -two_pi * k / p;
            tw_[k] = {std::cos(a), std::sin(a)};
        }
        rev_.resize(p);
        int lg = 0;
        while ((1 << lg) < p) ++lg;
        for (int i = 0; i < p; ++i) {
            int r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (1 << b)) r |= 1 << (lg - 1 - b);
            rev_[i] = r;
        }
    }

    int size() const { return p_; }

    /// 1-D transform of p_ elements with given stride; inverse applies the
    /// conjugate twiddles (no 1/P normalization; caller scales once).
    void transform(cplx* a, std::ptrdiff_t stride, bool inverse) const {
        const int p = p_;
        for (int i = 0; i < p; ++i) {
            int j = rev_[i];
            if (i < j) std::swap(a[i * stride], a[j * stride]);
        }
        for (int len = 2; len <= p; len <<= 1) {
            int half = len >> 1;
            int step = p / len;
            for (int i = 0; i < p; i += len) {
                for (int k = 0; k < half; ++k) {
                    cplx w = tw_[static_cast<std::size_t>(k) * step];
                    if (inverse) w = std::conj(w);
                    cplx& u = a[(i + k) * stride];
                    cplx& v = a[(i + k + half) * stride];
                    cplx t = v * w;
                    v = u - t;
                    u = u + t;
                }
            }
        }
    }

    /// In-place 3-D transform of a P^3 cube (index = (ix*P + iy)*P + iz).
    void cube(std::vector<cplx>& a, bool inverse) const {
        const int p = p_;
        if (a.size() != static_cast<std::size_t>(p) * p * p)
            throw std::invalid_argument("Fft::cube size");
        // z lines
        for (int x = 0; x < p; ++x)
            for (int y = 0; y < p; ++y)
                transform(&a[(static_cast<std::size_t>(x) * p + y) * p], 1, inverse);
        // y lines
        for (int x = 0; x < p; ++x)
            for (int z = 0; z < p; ++z)
                transform(&a[static_cast<std::size_t>(x) * p * p + z], p, inverse);
        // x lines
        for (int y = 0; y < p; ++y)
            for (int z = 0; z < p; ++z)
                transform(&a[static_cast<std::size_t>(y) * p + z], static_cast<std::ptrdiff_t>(p) * p, inverse);
        if (inverse) {
            double s = 1.0 / (static_cast<double>(p) * p * p);
            for (auto& c : a) c *= s;
        }
    }

  private:
    int p_;
    std::vector<cplx> tw_;
    std::vector<int> rev_;
};

} // namespace landau
