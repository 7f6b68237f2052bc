#pragma once

#include <cmath>
#include <cstdint>

namespace landau {

/// Counter-based splittable generator. Every draw is a pure hash of
/// (seed, stream, counter), so independent streams can be split off a
/// single 64-bit seed and replayed deterministically in any order.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    /// Derive an independent stream (e.g. one per experiment or worker).
    Rng split(std::uint64_t substream) const {
        return Rng(seed_, mix(stream_ ^ 0x9e3779b97f4a7c15ull, substream));
    }

    std::uint64_t next_u64() { return mix(seed_ ^ stream_, counter_++); }

    /// Uniform in [0,1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal (Box-Muller; one value per call, cache unused).
    double normal() {
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

  private:
    static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
        // splitmix64 finalizer over key-offset counter
        std::uint64_t z = ctr + 0x9e3779b97f4a7c15ull + (key << 1 | 1);
        z ^= key;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace landau
