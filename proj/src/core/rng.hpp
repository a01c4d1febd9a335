#pragma once

#include <cmath>
#include <cstdint>

namespace bseg {

// PCG32 (XSH-RR variant). Update constants are fixed so that streams are
// reproducible across platforms and implementations:
//   state' = state * 6364136223846793005 + (stream | 1)
//   output = rotr32((state ^ (state >> 18)) >> 27, state >> 59)
class Pcg32 {
public:
    explicit Pcg32(uint64_t seed, uint64_t stream = 0)
        : state_(0), inc_((stream << 1u) | 1u) {
        next();
        state_ += seed;
        next();
    }

    uint32_t next() {
        const uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
        const uint32_t rot = static_cast<uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // uniform in [0, 1)
    double uniform() { return next() * (1.0 / 4294967296.0); }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint32_t below(uint32_t n) { return static_cast<uint32_t>((uint64_t(next()) * n) >> 32); }

    // standard normal via Box-Muller (uses two draws per pair, caches one)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
        have_spare_ = true;
        return mag * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    uint64_t state_;
    uint64_t inc_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bseg
