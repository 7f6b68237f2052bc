#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "landau/io.hpp"
#include "landau/vec.hpp"

namespace landau {

/// Uniform cubic velocity lattice on [-L, L)^3 with N (even) nodes per axis,
/// node coordinates v_k = -L + (k + 1/2) h, h = 2L/N, quadrature weight h^3.
/// The half-cell offset keeps the lattice symmetric under v -> -v.
class VelocityGrid {
  public:
    VelocityGrid(int n, double half_extent) : n_(n), L_(half_extent) {
        if (n < 4 || n % 2 != 0) throw std::invalid_argument("VelocityGrid: N even, >= 4");
        if (!(half_extent > 0.0)) throw std::invalid_argument("VelocityGrid: L > 0");
        h_ = 2.0 * L_ / n_;
        axis_.resize(n_);
        for (int k = 0; k < n_; ++k) axis_[k] = -L_ + (k + 0.5) * h_;
    }

    int n() const { return n_; }
    double extent() const { return L_; }
    double h() const { return h_; }
    double cell_weight() const { return h_ * h_ * h_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

    double coord(int k) const { return axis_[k]; }
    Vec3 node(int i, int j, int k) const { return {axis_[i], axis_[j], axis_[k]}; }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }

    bool operator==(const VelocityGrid& o) const { return n_ == o.n_ && L_ == o.L_; }

  private:
    int n_;
    double L_;
    double h_;
    std::vector<double> axis_;
};

/// Real-valued samples over a VelocityGrid (one slice of f in V).
struct Distribution {
    VelocityGrid grid;
    std::vector<double> values;

    explicit Distribution(const VelocityGrid& g) : grid(g), values(g.size(), 0.0) {}

    double& at(int i, int j, int k) { return values[grid.idx(i, j, k)]; }
    double at(int i, int j, int k) const { return values[grid.idx(i, j, k)]; }

    template <class F>
    static Distribution sample(const VelocityGrid& g, F&& f) {
        Distribution d(g);
        const int n = g.n();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    d.values[g.idx(i, j, k)] = f(g.node(i, j, k));
        return d;
    }

    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * grid.cell_weight();
    }

    template <class F>
    double moment(F&& weight) const {
        double s = 0.0;
        const int n = grid.n();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    s += values[grid.idx(i, j, k)] * weight(grid.node(i, j, k));
        return s * grid.cell_weight();
    }

    double inner(const Distribution& o) const {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * o.values[i];
        return s * grid.cell_weight();
    }

    double l2_norm() const { return std::sqrt(inner(*this)); }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::fabs(v));
        return m;
    }

    Distribution& axpy(double a, const Distribution& o) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += a * o.values[i];
        return *this;
    }
    Distribution& scale(double a) {
        for (double& v : values) v *= a;
        return *this;
    }
};

/// Flat binary layout: header (u64 N, f64 L, u64 count) then count * N^3
/// little-endian doubles, row-major (x,y,z).
inline void save_distributions(const std::string& path, const VelocityGrid& g,
                               const std::vector<const Distribution*>& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    std::uint64_t n = static_cast<std::uint64_t>(g.n());
    std::uint64_t count = ds.size();
    double L = g.extent();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&L), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const Distribution* d : ds) {
        if (!(d->grid == g)) throw std::invalid_argument("save_distributions: grid mismatch");
        out.write(reinterpret_cast<const char*>(d->values.data()),
                  static_cast<std::streamsize>(d->values.size() * sizeof(double)));
    }
}

inline std::vector<Distribution> load_distributions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t n = 0, count = 0;
    double L = 0.0;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&L), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in) throw std::runtime_error("truncated distribution file " + path);
    VelocityGrid g(static_cast<int>(n), L);
    std::vector<Distribution> ds;
    for (std::uint64_t c = 0; c < count; ++c) {
        Distribution d(g);
        in.read(reinterpret_cast<char*>(d.values.data()),
                static_cast<std::streamsize>(d.values.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated distribution file " + path);
        ds.push_back(std::move(d));
    }
    return ds;
}

/// CSV export for small grids (vx,vy,vz,value).
inline void distribution_to_csv(const std::string& path, const Distribution& d) {
    CsvWriter csv(path, {"vx", "vy", "vz", "value"});
    const int n = d.grid.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 v = d.grid.node(i, j, k);
                csv.row({v[0], v[1], v[2], d.at(i, j, k)});
            }
}

} // namespace landau
