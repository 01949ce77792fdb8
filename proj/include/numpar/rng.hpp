#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace numpar {

// splitmix64 step; used to spread seeds and derive substream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for the index-th independent substream of a master seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic random stream. mt19937_64 is bit-exact per the standard and
// all derived draws below avoid the (implementation-defined) std
// distributions, so results are reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(substream_seed(seed, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi], inclusive, unbiased (rejection sampling).
    int uniform_int(int lo, int hi);

    bool bernoulli(double p) { return next_unit() < p; }

    // Standard normal via the polar method.
    double gaussian();

    template <typename T>
    const T& choice(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))];
    }

    // Fisher-Yates; std::shuffle is not bit-stable across implementations.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[static_cast<std::size_t>(i)],
                      v[static_cast<std::size_t>(uniform_int(0, i))]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace numpar
