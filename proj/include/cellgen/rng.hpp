#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cellgen {

/// Derive an independent seed for a named substream of a master seed.
/// Adding new stream names never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// Portable random source. Distribution code is our own so that draws are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
        return Rng(derive_seed(master, name, index));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace cellgen
