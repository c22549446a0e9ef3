// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace dda {

// splitmix64 finalizer, used to derive independent stream seeds from a
// base seed and a stream tag.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable random stream. The engine (mt19937_64) and all variate
/// conversions below are fully specified, so sequences are identical
/// across platforms and standard libraries. Distinct logical streams
/// (path sampling, noise draws, weight init) are derived from one base
/// seed via Rng::stream(seed, tag) and never share state.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    static Rng stream(uint64_t base_seed, uint64_t tag) {
        return Rng(mix64(base_seed ^ mix64(tag)));
    }

    uint64_t bits() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer uniform in [0, n). Uses rejection to avoid modulo bias.
    uint64_t uniform_index(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> cgauss() {
        const double s = std::sqrt(0.5);
        return {s * gauss(), s * gauss()};
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stream tags. Keeping them in one place guarantees two modules never
// collide on the same derived stream.
namespace rng_stream {
constexpr uint64_t kPaths = 0x70617468u;   // path parameter sampling
constexpr uint64_t kNoise = 0x6e6f6973u;   // observation noise
constexpr uint64_t kWeights = 0x77656967u; // denoiser weight init
} // namespace rng_stream

} // namespace dda
