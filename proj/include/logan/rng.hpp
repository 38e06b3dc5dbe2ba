#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace logan {

// mt19937_64 with hand-rolled distributions. std::uniform_real_distribution
// and friends are implementation-defined, which would break the bit-identical
// reproducibility contract across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per draw keeps the stream position predictable.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
    // n is tiny compared to 2^64, the bias is far below any tolerance in use.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
};

}  // namespace logan
