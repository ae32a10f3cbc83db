#pragma once

#include <cstdint>
#include <random>

namespace vinecens {

// Deterministic uniform generator. Doubles are produced from the raw 64-bit
// stream directly so that output is identical across standard library
// implementations.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    // uniform on (0,1), never exactly 0 or 1
    double next() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        double u = static_cast<double>(bits) * 0x1.0p-53;
        if (u <= 0.0) u = 0x1.0p-54;
        return u;
    }

    std::uint64_t next_raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// splitmix64 step, used to derive independent child seeds from a master seed
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace vinecens
