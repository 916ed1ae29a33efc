#pragma once

#include <cstdint>

namespace axiom::core {

// splitmix64 finalizer; the workhorse of all counter-based randomness here.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Pure function of its inputs; used where replays must not depend on how
// many draws other subsystems consumed (e.g. game mechanics under
// perturbation).
inline uint64_t hash3(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t h = mix64(seed ^ 0x2545f4914f6cdd1dULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

inline double unit_from_bits(uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Counter-based stream: state is (key, counter), so forks are cheap and the
// draw sequence is independent of thread scheduling.
class Rng {
public:
    Rng() : key_(0) {}
    explicit Rng(uint64_t key) : key_(key) {}
    Rng(uint64_t seed, uint64_t stream) : key_(hash3(seed, stream, 0x517cc1b727220a95ULL)) {}

    uint64_t next_u64() { return mix64(key_ ^ counter_++); }
    double next_unit() { return unit_from_bits(next_u64()); }  // [0, 1)
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    uint32_t next_below(uint32_t n) {
        // Lemire-style rejection-free mapping; bias < 2^-32, irrelevant here.
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next_u64() >> 32) * n) >> 32);
    }

    // Standard normal via Box-Muller (one value per call, cached pair dropped).
    double next_normal();

    Rng fork(uint64_t tag) const { return Rng(mix64(key_ ^ mix64(tag))); }

    uint64_t key() const { return key_; }
    uint64_t counter() const { return counter_; }
    void set_counter(uint64_t c) { counter_ = c; }

private:
    uint64_t key_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace axiom::core

#include <cmath>

namespace axiom::core {

inline double Rng::next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace axiom::core
