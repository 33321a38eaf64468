#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace quadnav {

// Stateless 64-bit mixer. Used wherever we need a pure hash of
// (seed, counter) pairs, e.g. the disturbance flip schedule.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG stream. Uniform/normal draws are generated from raw
// mt19937_64 output (no std::*_distribution) so the stream is identical
// across standard library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

    // in [0, 1)
    double unit() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Box-Muller, one draw per call (the spare is discarded so that the
    // state is exactly two uniforms per normal — keeps checkpoints simple).
    double normal() {
        double u1 = 1.0 - unit(); // (0, 1]
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    uint64_t next_u64() { return gen_(); }

    std::string serialize() const {
        std::ostringstream os;
        os << gen_;
        return os.str();
    }

    void deserialize(const std::string& s) {
        std::istringstream is(s);
        is >> gen_;
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace quadnav
