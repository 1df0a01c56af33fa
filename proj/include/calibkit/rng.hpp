#pragma once

#include <cmath>
#include <cstdint>

namespace calibkit {

/// Counter-based generator: output i of stream s under seed k is a pure
/// function mix(derive(k, s) + i * gamma). Replicate j of a resampling run
/// owns stream j, so results do not depend on execution order or thread
/// count. The mixer is the splitmix64 finalizer.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(derive(seed, stream)), counter_(0) {}

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ULL;
        return mix64(base_ + counter_);
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Multiply-shift bounded draw.
    std::uint64_t next_index(std::uint64_t n) {
#if defined(__SIZEOF_INT128__)
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
#else
        return next_u64() % n;
#endif
    }

    /// Standard normal via Box-Muller; consumes two uniforms, yields two values.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        // Two full mixes keep distinct (seed, stream) bases statistically unrelated.
        return mix64(mix64(seed ^ 0xA0761D6478BD642FULL) + stream * 0xE7037ED1A0B428DBULL);
    }

    std::uint64_t base_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace calibkit
