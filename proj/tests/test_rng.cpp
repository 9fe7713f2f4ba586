#include <doctest.h>

#include <cmath>
#include <set>

#include "plab/rng.hpp"

using namespace plab;

TEST_CASE("identical streams produce identical sequences") {
    RngStream a{42, 0}, b{42, 0};
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("stream state round-trips through (key, counter)") {
    RngStream a{7, 0};
    for (int i = 0; i < 10; ++i) a.next_u64();
    RngStream b{a.key, a.counter};
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams with distinct ids are distinct") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t id = 0; id < 64; ++id) keys.insert(substream(123, id).key);
    CHECK(keys.size() == 64);
}

TEST_CASE("uniform stays in range") {
    RngStream r{1, 0};
    for (int i = 0; i < 10000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform(-3.0, 5.0);
        CHECK(u >= -3.0);
        CHECK(u < 5.0);
    }
}

TEST_CASE("uniform moments match the uniform law") {
    RngStream r{2, 0};
    double sum = 0, sq = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        sum += u;
        sq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("uniform_int stays in range and covers all values") {
    RngStream r{3, 0};
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t v = r.uniform_int(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("normal consumes exactly two draws and has standard moments") {
    RngStream r{4, 0};
    std::uint64_t c0 = r.counter;
    r.normal();
    CHECK(r.counter == c0 + 2);

    double sum = 0, sq = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1.0).scale(0.02));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mix64 is deterministic and spreads nearby inputs") {
    CHECK(mix64(12345) == mix64(12345));
    CHECK(mix64(1) != mix64(2));
}
