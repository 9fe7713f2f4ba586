#include "plab/rng.hpp"

#include <cmath>

namespace plab {

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t c = counter++;
    return mix64(key ^ mix64(c + 0x9E3779B97F4A7C15ULL));
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    // modulo bias is negligible for n << 2^64
    return next_u64() % n;
}

double RngStream::normal() {
    // u1 in (0, 1] so the log is finite
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * M_PI * u2);
}

RngStream substream(std::uint64_t key, std::uint64_t id) {
    RngStream s;
    s.key = mix64(key ^ mix64(id + 0xD1B54A32D192ED03ULL));
    s.counter = 0;
    return s;
}

}  // namespace plab
