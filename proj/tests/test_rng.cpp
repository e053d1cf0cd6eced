#include "poclab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using poclab::CounterRng;

TEST_CASE("philox known-answer vectors")
{
    // Random123 kat_vectors, philox4x32_10.
    auto zero = CounterRng::philox({0, 0, 0, 0}, {0, 0});
    CHECK(zero == CounterRng::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto ones = CounterRng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == CounterRng::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("streams are reproducible and seekable")
{
    CounterRng a(42, 7), b(42, 7);
    std::vector<std::uint64_t> first;
    for (int i = 0; i < 10; ++i) first.push_back(a());
    for (int i = 0; i < 10; ++i) CHECK(b() == first[i]);

    CounterRng c(42, 7);
    c.seek(3);
    // two 64-bit words per block
    CHECK(c() == first[6]);
    CHECK(c() == first[7]);
}

TEST_CASE("split streams differ")
{
    CounterRng root(1, 0);
    std::set<std::uint64_t> heads;
    for (std::uint64_t c = 0; c < 64; ++c) {
        auto child = root.split(c);
        heads.insert(child());
        CHECK(child.key() == root.split(c).key());
    }
    CHECK(heads.size() == 64);
    CHECK(CounterRng(1, 0).split(0)() != CounterRng(2, 0).split(0)());
}

TEST_CASE("uniform, normal and below moments")
{
    CounterRng r(2024, 1);
    const int n = 200000;
    double su = 0, sz = 0, sz2 = 0, sz4 = 0;
    std::vector<int> bins(7, 0);
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = r.normal();
        sz += z;
        sz2 += z * z;
        sz4 += z * z * z * z;
        bins[r.below(7)]++;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sz / n) < 0.01);
    CHECK(sz2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sz4 / n == doctest::Approx(3.0).epsilon(0.05));
    for (int b : bins) CHECK(std::abs(b - n / 7.0) < 5 * std::sqrt(n / 7.0));
}
