#ifndef TSBENCH_RNG_HPP
#define TSBENCH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tsbench {

/// Seeded random stream. Wraps mt19937_64 but draws uniforms and normals
/// through fixed arithmetic so sequences are reproducible bit-for-bit on
/// one machine regardless of standard-library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        // 53 random bits -> double in [0,1)
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second draw.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double std) { return mean + std * normal(); }

    /// Integer in [0, n).
    std::size_t index(std::size_t n) {
        // rejection-free modulo bias is negligible for n << 2^64; keep exact anyway
        std::uint64_t x = engine_();
        return static_cast<std::size_t>(x % n);
    }

    /// Bernoulli(p).
    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates shuffle of an index vector.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit hash; stable across platforms and runs.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Derive an independent stream seed from (base seed, stream name).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = fnv1a64(stream);
    h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

} // namespace tsbench

#endif
