#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "atsc/errors.hpp"

namespace atsc {

// splitmix64; used to derive independent stream seeds from (seed, tag) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// Deterministic RNG. The raw-bit mapping to (0,1) is pinned here so that draw
// sequences are reproducible byte-for-byte across standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1): never returns 0 or 1.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive bounds.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

    // Box-Muller; one value per call, the spare is kept.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Weibull quantile function: scale * (-ln u)^(1/shape) for u in (0,1).
inline double weibull_inverse_cdf(double u, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw ArgumentError("weibull: shape and scale must be > 0");
    if (!(u > 0.0) || !(u < 1.0))
        throw ArgumentError("weibull: u must lie in (0,1)");
    return scale * std::pow(-std::log(u), 1.0 / shape);
}

// One Weibull-distributed interarrival gap, seconds. Strictly positive.
inline double sample_interarrival(Rng& rng, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw ArgumentError("weibull: shape and scale must be > 0");
    return weibull_inverse_cdf(rng.uniform01(), shape, scale);
}

} // namespace atsc
