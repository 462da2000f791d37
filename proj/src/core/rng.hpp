#pragma once

#include <cmath>
#include <cstdint>

namespace latcode {

// Counter-based generator built on splitmix64-style mixing. Streams are
// derived from (seed, a, b, c) so replications and purposes get independent
// sequences, and results never depend on how work is split across threads.
class StreamRng {
  public:
    static StreamRng derive(uint64_t seed, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
        uint64_t k = mix(seed + 0x9e3779b97f4a7c15ULL);
        k = mix(k ^ mix(a + 0xbf58476d1ce4e5b9ULL));
        k = mix(k ^ mix(b + 0x94d049bb133111ebULL));
        k = mix(k ^ mix(c + 0xd6e8feb86659fd93ULL));
        StreamRng r;
        r.key_ = k;
        return r;
    }

    uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n).
    uint64_t uniform_int(uint64_t n) {
        const uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do { v = next_u64(); } while (v >= lim);
        return v % n;
    }

    // Standard normal via Box-Muller; pairs are cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

  private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    uint64_t key_ = 0;
    uint64_t ctr_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace latcode
