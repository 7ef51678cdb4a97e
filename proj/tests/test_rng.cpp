#include <doctest.h>

#include <cmath>
#include <vector>

#include "spinbath/rng.hpp"

using spinbath::Philox4x32;
using spinbath::RandomStream;

TEST_CASE("philox known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
    static_assert(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0})[0] == 0x6627e8d5u);
}

TEST_CASE("streams are reproducible and independent") {
    RandomStream a(42, 7);
    RandomStream b(42, 7);
    RandomStream c(42, 8);
    RandomStream d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        auto const x = a.next_u64();
        CHECK(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("distribution moments") {
    RandomStream s(2024, 0);
    int const n = 200000;
    double u_sum = 0.0;
    double e_sum = 0.0;
    double z_sum = 0.0;
    double z2_sum = 0.0;
    int plus = 0;
    double u_min = 1.0;
    for (int i = 0; i < n; ++i) {
        double const u = s.uniform_open0();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        u_min = std::min(u_min, u);
        u_sum += u;
        e_sum += s.exponential(4.0);
        double const z = s.normal();
        z_sum += z;
        z2_sum += z * z;
        plus += s.sign() > 0;
    }
    CHECK(u_sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(e_sum / n == doctest::Approx(0.25).epsilon(0.01));
    CHECK(std::abs(z_sum / n) < 0.01);
    CHECK(z2_sum / n == doctest::Approx(1.0).epsilon(0.015));
    CHECK(static_cast<double>(plus) / n == doctest::Approx(0.5).epsilon(0.01));
}
