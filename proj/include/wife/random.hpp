#pragma once

#include <cstdint>
#include <random>

namespace wife {

// Seeded generator with a portable uniform mapping (std distributions are
// implementation-defined, which would break cross-platform golden values).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace wife
