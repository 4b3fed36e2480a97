#pragma once

// Counter-based random streams and the handful of variate generators the
// simulator needs. Everything here is implemented explicitly (no <random>
// distributions) so that a (seed, index) pair yields the same variates on
// every platform and standard library.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "geometry.hpp"

namespace meandense {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Key for stream `index` under `seed`: mix64(mix64(seed) ^ index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ index);
}

// Philox4x32-10 block cipher (Salmon et al. 2011).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter encrypt(Counter ctr, Key key) noexcept {
        constexpr std::uint32_t kMulA = 0xD2511F53u, kMulB = 0xCD9E8D57u;
        constexpr std::uint32_t kWeylA = 0x9E3779B9u, kWeylB = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        return ctr;
    }
};

// A random stream: Philox keyed by a 64-bit stream key, counting blocks from 0.
// Satisfies UniformRandomBitGenerator. Not thread-safe; one stream per worker.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key = 0) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ >= 4) refill();
        const std::uint64_t lo = buf_[pos_];
        const std::uint64_t hi = buf_[pos_ + 1];
        pos_ += 2;
        return (hi << 32) | lo;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0, 1).
    double uniform_open() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

    std::uint64_t blocks_consumed() const noexcept { return block_; }

private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                      0u, 0u};
        buf_ = Philox4x32::encrypt(ctr, key_);
        ++block_;
        pos_ = 0;
    }

    Philox4x32::Key key_;
    Philox4x32::Counter buf_{};
    std::uint64_t block_ = 0;
    int pos_ = 4;
};

inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return RandomStream(derive_seed(seed, index));
}

// Poisson variate. Means below 10 use sequential-search inversion; larger
// means use Hormann's transformed rejection with squeeze (PTRS), the same
// constants as numpy's legacy generator.
inline std::uint64_t sample_poisson(double mean, RandomStream& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw NumericError("poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        double p = std::exp(-mean);
        double cdf = p;
        const double u = rng.uniform();
        std::uint64_t k = 0;
        // The cap only guards against a cdf that stalls below u through rounding.
        while (u > cdf && k < 1000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -mean + kf * loglam - std::lgamma(kf + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
}

// Uniform direction on the unit sphere S^{d-1}.
inline Point sample_direction(int dim, RandomStream& rng) {
    Point u(dim);
    switch (dim) {
    case 1:
        u[0] = rng.uniform() < 0.5 ? 1.0 : -1.0;
        break;
    case 2: {
        const double alpha = 2.0 * std::numbers::pi * rng.uniform();
        u[0] = std::cos(alpha);
        u[1] = std::sin(alpha);
        break;
    }
    default: {
        const double z = rng.uniform(-1.0, 1.0);
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        u[0] = rho * std::cos(phi);
        u[1] = rho * std::sin(phi);
        u[2] = z;
        break;
    }
    }
    return u;
}

inline Point sample_in_box(const Box& box, RandomStream& rng) {
    Point p(box.dim());
    for (int k = 0; k < box.dim(); ++k) p[k] = box.lo[k] + box.side(k) * rng.uniform();
    return p;
}

} // namespace meandense
