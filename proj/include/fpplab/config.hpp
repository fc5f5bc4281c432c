#pragma once
// Site colorings.  A configuration assigns each site a color: blue (passage
// weight 0) or yellow (weight 1), i.i.d. fair coin in the random case.
//
// The random base is counter-based: color_at is a pure function of
// (seed, x, y), so arbitrarily large windows need no stored state and any
// subset of sites can be recomputed independently.  Replica seeds come from
// the same mixing function, keyed by replica index ("splitmix-v1" in
// manifests; changing any constant here is a version bump).

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fpplab/lattice.hpp"

namespace fpplab {

// Raised by enumerate_region when the region has more than kEnumerationCap
// sites (2^k explosion guard).
struct RegionTooLarge : FppError { using FppError::FppError; };
// Raised on malformed stored-configuration text.
struct IoError : FppError { using FppError::FppError; };

enum class Color : std::uint8_t { blue = 0, yellow = 1 };

inline int weight(Color c) { return c == Color::yellow ? 1 : 0; }
inline Color flipped(Color c) { return c == Color::yellow ? Color::blue : Color::yellow; }

// splitmix64 finalizer (Stafford mix13); the only bit-mixing primitive used.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr const char* kSeedRule = "splitmix-v1";

// Stream seed for replica / substream `stream` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(master + kGolden * (stream + 1));
}

// The fair-coin color of a site under a hashed base.  Pure; two rounds of the
// finalizer over the packed coordinates give full avalanche in seed and site.
inline Color hashed_color(std::uint64_t seed, Site v) {
    const std::uint64_t k =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x)) << 32) |
        static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.y));
    const std::uint64_t h = mix64(mix64(k + kGolden) ^ seed);
    return static_cast<Color>(h & 1);
}

// Counter-based uniform stream for the continuum samplers; same primitive.
struct SplitMix64 {
    std::uint64_t state = 0;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += kGolden;
        return mix64(state);
    }
    // uniform on the open interval (0, 1)
    double u01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
};

inline constexpr int kEnumerationCap = 30;

// A layered site coloring: a base (hashed, constant, or stored) plus override
// layers applied on top, later layers winning.  Value semantics; overrides
// produce a new source and never mutate the receiver.
class ConfigSource {
  public:
    static ConfigSource hashed(std::uint64_t seed);
    static ConfigSource constant(Color c);
    static ConfigSource stored(std::vector<std::pair<Site, Color>> entries);

    Color color_at(Site v) const;

    // New source with every site of `sites` forced to `c`.
    ConfigSource with_overrides(std::span<const Site> sites, Color c) const;
    // New source with per-site colors (used by enumeration and color switching).
    ConfigSource with_override_map(std::vector<std::pair<Site, Color>> entries) const;

    bool is_hashed() const { return base_ == Base::hashed; }
    std::optional<std::uint64_t> seed() const;

    // Plain-text serialization: one "x y color" line per site, color in {0,1}.
    // Only the flattened colors of `sites` are written.
    void write_text(std::ostream& os, std::span<const Site> sites) const;
    static ConfigSource read_text(std::istream& is);

  private:
    enum class Base { hashed, constant, stored };
    using Layer = std::unordered_map<Site, Color, SiteHash>;

    Base base_ = Base::constant;
    std::uint64_t seed_ = 0;
    Color const_color_ = Color::blue;
    std::shared_ptr<const Layer> stored_;           // base storage if Base::stored
    std::vector<std::shared_ptr<const Layer>> layers_;
};

// Iterates all 2^k colorings of `sites` (as override layers on `base`).
// Deterministic order: assignment index i in [0, 2^k) maps bit j of i to
// sites[j], bit set = yellow.  Throws RegionTooLarge for k > kEnumerationCap.
class RegionEnumeration {
  public:
    RegionEnumeration(ConfigSource base, std::vector<Site> sites);
    std::uint64_t count() const { return count_; }
    std::span<const Site> sites() const { return sites_; }
    // The coloring with assignment index i.
    ConfigSource at(std::uint64_t index) const;

  private:
    ConfigSource base_;
    std::vector<Site> sites_;
    std::uint64_t count_ = 0;
};

}  // namespace fpplab
