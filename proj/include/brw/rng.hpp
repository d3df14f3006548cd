#pragma once

#include <cmath>
#include <cstdint>

namespace brw {

// Counter-based random streams. A stream is identified by up to four
// 64-bit key words (seed, generation, particle, child); successive draws
// hash (key, counter) so any stream can be opened at any point without
// touching the others. This is what makes replicate loops and generation
// expansion order-independent.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
              std::uint64_t k3 = 0)
        : base_(fold(fold(fold(splitmix64(seed ^ 0x243f6a8885a308d3ULL), k1), k2), k3)),
          counter_(0) {}

    std::uint64_t next_u64() { return splitmix64(base_ ^ splitmix64(counter_++)); }

    // uniform on [0,1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller (two uniforms per draw, no cached state)
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // index into a probability vector
    template <class Vec>
    int next_categorical(const Vec& probs) {
        double u = next_double();
        double acc = 0.0;
        int last = 0;
        for (int k = 0; k < int(probs.size()); ++k) {
            acc += probs[k];
            last = k;
            if (u < acc) return k;
        }
        return last;  // guard against rounding at u ~ 1
    }

private:
    static std::uint64_t fold(std::uint64_t h, std::uint64_t k) {
        return splitmix64(h ^ (k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    }
    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace brw
