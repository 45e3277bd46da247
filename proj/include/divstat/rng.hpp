#pragma once

#include <cstdint>

namespace divstat {

// SplitMix64: 64-bit state, one multiply-shift-xor chain per output.
// Passes BigCrush on the finalized output; used here because a stream can be
// split into independent substreams by keying the state on (seed, index).
class splitmix64 {
  public:
    explicit splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform in [0, n) without modulo bias (rejection on the top range).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v >= threshold) return v % n;
        }
    }

  private:
    std::uint64_t state_;
};

// Substream keyed on (seed, index): the pair is mixed through the SplitMix64
// finalizer twice, so distinct indices yield decorrelated streams and the
// mapping is independent of how work is divided among threads.
inline splitmix64 substream(std::uint64_t seed, std::uint64_t index) {
    splitmix64 outer(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    const std::uint64_t a = outer.next_u64();
    const std::uint64_t b = outer.next_u64();
    return splitmix64(a ^ (b + index));
}

inline constexpr const char* generator_name = "splitmix64";

} // namespace divstat
