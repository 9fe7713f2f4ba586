#pragma once

#include <cstdint>

namespace plab {

// Counter-based stream: state is (key, counter) only, so streams serialize to
// 16 bytes and derived sub-streams never interact.
struct RngStream {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n);

    // standard normal via Box-Muller; consumes exactly two draws
    double normal();
};

// Mixes a seed into a stream key. Distinct ids give independent streams.
RngStream substream(std::uint64_t key, std::uint64_t id);

std::uint64_t mix64(std::uint64_t z);

}  // namespace plab
