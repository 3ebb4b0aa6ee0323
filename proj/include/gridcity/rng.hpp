#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace gridcity {

/// Splittable deterministic random stream. Every sampling site derives its
/// own stream from (seed, label), so output never depends on thread count
/// or on unrelated sampling sites consuming values.
///
/// Counter-based: output i is the SplitMix64 finalizer applied to
/// key + i * golden_gamma, with the key mixed from the seed and an FNV-1a
/// hash of the label.
class RngStream {
public:
    RngStream(uint64_t seed, std::string_view label)
        : key_(derive_key(seed, label)), state_(key_) {}

    /// Child stream, independent of this stream's consumption position.
    RngStream fork(std::string_view label) const { return RngStream(key_, label); }

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, bound); bound 0 returns 0. Debiased multiply-shift
    /// with rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) return 0;
        while (true) {
            uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * bound;
            auto lo = static_cast<uint64_t>(m);
            if (lo >= bound || lo >= static_cast<uint64_t>(-bound) % bound)
                return static_cast<uint64_t>(m >> 64);
        }
    }

    /// Uniform integer in [lo, hi] inclusive.
    int64_t next_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo) + 1));
    }

    /// Uniform real in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller.
    double next_gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static uint64_t derive_key(uint64_t seed, std::string_view label) {
        uint64_t h = 14695981039346656037ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        uint64_t z = seed ^ (h + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t key_ = 0;
    uint64_t state_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gridcity
