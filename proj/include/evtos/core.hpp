#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evtos {

// Thrown for invalid configuration (bad parameter values, unknown config
// keys, inconsistent tables). CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for malformed or inconsistent input data (parse failures,
// non-monotone streams, unreadable files). CLI maps this to exit code 3.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SensorGeometry {
    int width = 0;
    int height = 0;

    bool contains(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    int64_t pixels() const { return int64_t(width) * int64_t(height); }
    bool operator==(const SensorGeometry&) const = default;

    void validate() const {
        if (width < 1 || height < 1)
            throw config_error("geometry: width and height must be >= 1, got " +
                               std::to_string(width) + "x" + std::to_string(height));
    }
};

// One AER tuple. Timestamps are integer microseconds; streams are sorted by
// t (equal timestamps allowed).
struct Event {
    int x = 0;
    int y = 0;
    bool polarity = false;  // ON = true, OFF = false
    int64_t t = 0;          // microseconds

    bool operator==(const Event&) const = default;
};

// SplitMix64. Small, fast, and identical output on every platform, which
// keeps seeded runs reproducible across machines (the std:: distributions
// are implementation-defined and are avoided throughout).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        return uint64_t((__uint128_t(next_u64()) * __uint128_t(bound)) >> 64);
    }

    bool next_bool(double p) { return next_double() < p; }

    // Knuth's method; fine for the small lambdas used here.
    int next_poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_double();
        } while (p > limit);
        return k - 1;
    }

  private:
    uint64_t state_;
};

// Derives a per-stage seed from the master seed so that independent stages
// (stream synthesis, fault injection, scene rendering, ...) never share a
// generator. FNV-1a over the tag, mixed once through SplitMix64.
inline uint64_t derive_seed(uint64_t master, std::string_view stage) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : stage) {
        h ^= uint64_t(uint8_t(c));
        h *= 0x100000001b3ull;
    }
    Rng mix(master ^ h);
    return mix.next_u64();
}

}  // namespace evtos
