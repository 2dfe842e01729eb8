#pragma once

#include <cstdint>

namespace colat {

// splitmix64 (Steele, Lea & Flood; public-domain reference constants).
// Small state, full 64-bit seeding, identical output on every platform --
// the reproducibility contract for all bootstrap code in this project.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) via 128-bit multiply-shift.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// Independent stream keyed by (seed, stream). Resample r always draws from
// stream_rng(seed, r), so results cannot depend on thread scheduling.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 seeder(seed);
    std::uint64_t diffused = seeder.next();
    SplitMix64 mixer(diffused ^ (stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
    return SplitMix64(mixer.next());
}

}  // namespace colat
