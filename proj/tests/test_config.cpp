#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpplab/config.hpp"
#include "fpplab/lattice.hpp"

using namespace fpplab;

TEST_CASE("splitmix64 stream matches the reference sequence") {
    // First outputs of the standard splitmix64 generator seeded with 0.
    SplitMix64 g(0);
    CHECK(g.next() == 0xE220A8397B1DCDAFULL);
    CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(g.next() == 0x06C45D188009454FULL);
    CHECK(mix64(1) == 0x5692161D100B05E5ULL);
    // u01 stays strictly inside (0, 1)
    SplitMix64 u(123);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.u01();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("derived replica seeds are deterministic and collision-free") {
    CHECK(derive_seed(42, 0) == 0xBDD732262FEB6E95ULL);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 4096; ++i) seeds.push_back(derive_seed(7, i));
    auto sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    // and a different master gives a different stream
    CHECK(derive_seed(8, 0) != derive_seed(7, 0));
}

TEST_CASE("hashed colors: reference values, determinism, seed sensitivity") {
    const ConfigSource a = ConfigSource::hashed(7);
    CHECK(a.color_at(Site{0, 0}) == Color::yellow);
    CHECK(a.color_at(Site{1, 0}) == Color::blue);
    CHECK(a.color_at(Site{0, 1}) == Color::blue);
    CHECK(a.color_at(Site{-3, 5}) == Color::yellow);
    CHECK(a.is_hashed());
    CHECK(a.seed() == 7);

    const ConfigSource b = ConfigSource::hashed(7);
    const ConfigSource c = ConfigSource::hashed(8);
    int diff = 0;
    for (int x = -20; x <= 20; ++x)
        for (int y = -20; y <= 20; ++y) {
            CHECK(a.color_at(Site{x, y}) == b.color_at(Site{x, y}));
            diff += a.color_at(Site{x, y}) != c.color_at(Site{x, y});
        }
    CHECK(diff > 0);
}

TEST_CASE("hashed colors look like a fair independent coin") {
    // balance: ~N(n/2, n/4); 4-sigma bands on n = 41^2 sites per seed
    for (const std::uint64_t seed : {1ULL, 99ULL, 0xDEADBEEFULL}) {
        const ConfigSource src = ConfigSource::hashed(seed);
        int yellow = 0, pairs_yy = 0, pairs = 0, same = 0;
        for (int x = -20; x <= 20; ++x)
            for (int y = -20; y <= 20; ++y) {
                const bool cy = src.color_at(Site{x, y}) == Color::yellow;
                yellow += cy;
                // horizontal neighbor correlation
                if (x < 20) {
                    const bool ny = src.color_at(Site{x + 1, y}) == Color::yellow;
                    pairs += 1;
                    pairs_yy += cy && ny;
                    same += cy == ny;
                }
            }
        const double n = 41.0 * 41.0;
        CHECK(std::abs(yellow - n / 2) < 4.0 * std::sqrt(n / 4));  // ~82
        // P(same color) = 1/2 for independent fair coins
        CHECK(std::abs(same - pairs / 2.0) < 4.0 * std::sqrt(pairs / 4.0));
    }
}

TEST_CASE("constant and stored sources") {
    const ConfigSource blue = ConfigSource::constant(Color::blue);
    CHECK(blue.color_at(Site{123, -456}) == Color::blue);
    CHECK(!blue.is_hashed());
    CHECK(!blue.seed().has_value());

    const ConfigSource st = ConfigSource::stored({{Site{0, 0}, Color::yellow},
                                                  {Site{1, 0}, Color::blue}});
    CHECK(st.color_at(Site{0, 0}) == Color::yellow);
    CHECK(st.color_at(Site{1, 0}) == Color::blue);
    CHECK_THROWS_AS(st.color_at(Site{2, 2}), InvalidSpec);  // uncovered site
}

TEST_CASE("override layers win latest-first and preserve the receiver") {
    const ConfigSource base = ConfigSource::constant(Color::blue);
    const std::vector<Site> ring = external_boundary(ball_sites(Site{0, 0}, 1.0));
    const ConfigSource once = base.with_overrides(ring, Color::yellow);
    const ConfigSource twice = once.with_override_map({{ring[0], Color::blue}});

    CHECK(base.color_at(ring[0]) == Color::blue);     // untouched
    CHECK(once.color_at(ring[0]) == Color::yellow);   // first layer
    CHECK(twice.color_at(ring[0]) == Color::blue);    // later layer wins
    CHECK(twice.color_at(ring[1]) == Color::yellow);  // earlier layer still there
    CHECK(twice.color_at(Site{5, 5}) == Color::blue); // base below it all
}

TEST_CASE("weight and flip are the trivial maps") {
    CHECK(weight(Color::blue) == 0);
    CHECK(weight(Color::yellow) == 1);
    CHECK(flipped(Color::blue) == Color::yellow);
    CHECK(flipped(Color::yellow) == Color::blue);
}

TEST_CASE("stored-config text round-trips") {
    const auto sites = ball_sites(Site{0, 0}, 3.0);
    const ConfigSource src = ConfigSource::hashed(31337);
    std::stringstream ss;
    src.write_text(ss, sites);
    const ConfigSource back = ConfigSource::read_text(ss);
    for (const Site v : sites) CHECK(back.color_at(v) == src.color_at(v));

    std::stringstream bad("0 0 2\n");
    CHECK_THROWS_AS(ConfigSource::read_text(bad), IoError);
    std::stringstream garbled("1 nope 0\n");
    CHECK_THROWS_AS(ConfigSource::read_text(garbled), IoError);
}

TEST_CASE("region enumeration walks all 2^k colorings in bit order") {
    const std::vector<Site> sites{{0, 0}, {1, 0}, {0, 1}};
    const RegionEnumeration e(ConfigSource::constant(Color::blue), sites);
    REQUIRE(e.count() == 8);
    for (std::uint64_t i = 0; i < e.count(); ++i) {
        const ConfigSource cfg = e.at(i);
        for (std::size_t j = 0; j < sites.size(); ++j) {
            const Color want = ((i >> j) & 1) ? Color::yellow : Color::blue;
            CHECK(cfg.color_at(sites[j]) == want);
        }
        // outside the enumerated set the base shows through
        CHECK(cfg.color_at(Site{9, 9}) == Color::blue);
    }
}

TEST_CASE("region enumeration refuses oversized regions") {
    std::vector<Site> sites;
    for (int x = 0; x < kEnumerationCap + 1; ++x) sites.push_back(Site{x, 0});
    CHECK_THROWS_AS(RegionEnumeration(ConfigSource::constant(Color::blue), sites),
                    RegionTooLarge);
    sites.pop_back();
    const RegionEnumeration ok(ConfigSource::constant(Color::blue), sites);
    CHECK(ok.count() == (std::uint64_t{1} << kEnumerationCap));
}
