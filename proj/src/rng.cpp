#include "numpar/rng.hpp"

#include <cmath>

#include "numpar/errors.hpp"

namespace numpar {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw InvalidArgument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    // Largest multiple of `range` that fits in 64 bits; reject draws above it.
    const std::uint64_t zone = (UINT64_MAX / range) * range;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= zone);
    return lo + static_cast<int>(x % range);
}

double Rng::gaussian() {
    double u, v, s;
    do {
        u = 2.0 * next_unit() - 1.0;
        v = 2.0 * next_unit() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace numpar
