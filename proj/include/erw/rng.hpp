#pragma once

#include <cstdint>

namespace erw {

// SplitMix64 (Steele, Lea, Flood), used only to expand seeds.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman, Vigna). Small, fast, and seedable from a 64-bit
// key via SplitMix64, which is the seeding the authors recommend.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t key) {
        SplitMix64 sm(key);
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

/// Stream key for walk `stream` under ensemble seed `seed`. The map
/// stream -> key is injective for a fixed seed, so per-walk generators are
/// independent streams that need no coordination.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return seed ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
}

inline Xoshiro256pp make_stream(std::uint64_t seed, std::uint64_t stream) {
    return Xoshiro256pp(stream_key(seed, stream));
}

}  // namespace erw
