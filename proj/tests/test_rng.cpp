#include <doctest.h>

#include <array>
#include <cstdint>

#include "hitstats/rng.hpp"

using namespace hitstats;

// Known-answer vectors for Philox4x64-10, cross-checked against the
// Random123 reference sequence (numpy's Philox generator emits the same
// stream shifted by one block: its block b equals counter b+1 here).
TEST_CASE("philox known answers") {
    auto zero = philox::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x16554d9eca36314cULL);
    CHECK(zero[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(zero[2] == 0xd7e772cee186176bULL);
    CHECK(zero[3] == 0x7e68b68aec7ba23bULL);

    auto mixed = philox::block({1, 0, 0, 0}, {7, 42});
    CHECK(mixed[0] == 0x10181400efac1ecaULL);
    CHECK(mixed[1] == 0xf5ede81df1960be3ULL);
    CHECK(mixed[2] == 0x3f6180f4af6ec1abULL);
    CHECK(mixed[3] == 0x075f4b87ef0f95fdULL);

    const std::uint64_t ff = 0xffffffffffffffffULL;
    auto big = philox::block({ff, ff, ff, ff}, {ff, ff});
    CHECK(big[0] == 0x87b092c3013fe90bULL);
    CHECK(big[1] == 0x438c3c67be8d0224ULL);
    CHECK(big[2] == 0x9cc7d7c69cd777b6ULL);
    CHECK(big[3] == 0xa09caebf594f0ba0ULL);
}

TEST_CASE("streams are reproducible and independent of draw history") {
    RngStream a(123, 45);
    RngStream b(123, 45);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(123, 46);
    bool all_equal = true;
    RngStream a2(123, 45);
    for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
    CHECK(!all_equal);
}

TEST_CASE("uniform doubles live in [0,1) and fill the interval") {
    RngStream rng(7, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}
