#pragma once
// Triangular-lattice geometry: axial site coordinates, the hexagon tiling they
// induce, exact ball/boundary constructions, and a flat-array frame used by the
// search engines.
//
// Conventions (fixed project-wide):
//   * a site (x, y) sits at position (x + y/2, y*sqrt(3)/2) in the plane;
//   * squared Euclidean norm of a site position is exactly x^2 + x*y + y^2;
//   * hexagon(v) has circumradius 1/sqrt(3), inradius 1/2, vertices at angles
//     30 + 60k degrees around the site position;
//   * B(c, r) contains v iff every vertex of hexagon(v) lies in the closed
//     disc of radius r around position(c) -- decided in exact integer
//     arithmetic, see vertex_d12 below;
//   * site ordering is lexicographic on (x, y) everywhere.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpplab {

struct FppError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when a request is structurally invalid (bad radii, bad parameters).
struct InvalidSpec : FppError { using FppError::FppError; };
// Annulus radii out of order, or an annulus too thin for its boundary rings.
struct InvalidAnnulus : FppError { using FppError::FppError; };

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Site {
    std::int32_t x = 0;
    std::int32_t y = 0;
    friend auto operator<=>(const Site&, const Site&) = default;
};

inline constexpr std::array<Site, 6> kNeighborOffsets = {{
    {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1},
}};  // counterclockwise, starting in the +x direction

inline constexpr double kHexCircumradius = 0.5773502691896258;  // 1/sqrt(3)
inline constexpr double kHexInradius = 0.5;
inline constexpr double kSqrt3 = 1.7320508075688772;

inline Site neighbor(Site v, int dir) {
    const Site d = kNeighborOffsets[static_cast<std::size_t>(dir)];
    return {v.x + d.x, v.y + d.y};
}

inline Vec2 position(Site v) {
    return {v.x + 0.5 * v.y, 0.5 * kSqrt3 * v.y};
}

// Exact squared distance of position(v) from the origin, as an integer.
inline std::int64_t norm2(Site v) {
    const std::int64_t x = v.x, y = v.y;
    return x * x + x * y + y * y;
}

// Hexagon vertex offsets in the doubled/tripled integer coordinate system:
// writing a vertex of hexagon(dx, dy) as ((X + cx)/2, (Y3 + cy) / (2*sqrt(3)))
// with X = 2*dx + dy and Y3 = 3*dy, the squared distance from the origin is
// (3*(X+cx)^2 + (Y3+cy)^2) / 12 exactly.
inline constexpr std::array<std::array<int, 2>, 6> kVertexOffsets = {{
    {1, 1}, {0, 2}, {-1, 1}, {-1, -1}, {0, -2}, {1, -1},
}};

// 12 * (squared distance from origin of vertex k of hexagon at offset (dx,dy)).
inline std::int64_t vertex_d12(std::int32_t dx, std::int32_t dy, int k) {
    const std::int64_t X = 2 * static_cast<std::int64_t>(dx) + dy + kVertexOffsets[static_cast<std::size_t>(k)][0];
    const std::int64_t Y3 = 3 * static_cast<std::int64_t>(dy) + kVertexOffsets[static_cast<std::size_t>(k)][1];
    return 3 * X * X + Y3 * Y3;
}

// True iff hexagon at offset (dx, dy) lies entirely in the closed disc of
// radius r about the origin.  Exact while 12*r*r is exactly representable
// (integer and dyadic radii in particular).
inline bool hex_in_disc(std::int32_t dx, std::int32_t dy, double radius) {
    const double r12 = 12.0 * radius * radius;
    for (int k = 0; k < 6; ++k) {
        if (static_cast<double>(vertex_d12(dx, dy, k)) > r12) return false;
    }
    return true;
}

struct Hexagon {
    Site center;
    std::array<Vec2, 6> vertices() const;  // counterclockwise from angle 30 deg
};

inline Hexagon hexagon(Site v) { return Hexagon{v}; }

// Endpoints of the edge shared by hexagon(v) and hexagon(neighbor(v, dir)),
// ordered counterclockwise around v.
std::array<Vec2, 2> hex_edge(Site v, int dir);

// All sites whose hexagon lies entirely inside the closed disc of radius
// `radius` about position(center).  Sorted lexicographically.
std::vector<Site> ball_sites(Site center, double radius);

// Sites not in `region` adjacent to at least one site of `region`.  Sorted.
std::vector<Site> external_boundary(std::span<const Site> region);

// Sites of `region` adjacent to at least one site outside it.  Sorted.
std::vector<Site> internal_boundary(std::span<const Site> region);

// The lattice site whose hexagon contains the point, i.e. the site minimizing
// Euclidean distance to `p`; exact ties broken lexicographically.
Site nearest_site(Vec2 p);

// ---------------------------------------------------------------------------

// Axis-aligned site-coordinate window kinds used by the search ops.
class Region {
  public:
    enum class Kind { ball, annulus, box };

    static Region ball(Site center, double radius);
    // Annulus A(r, R) = B(0,R) \ B(0,r), centered at the origin.
    static Region annulus(double inner, double outer);
    // Closed box in embedded coordinates; membership tests the site position.
    static Region box(double x_min, double x_max, double y_min, double y_max);
    // Standard window for halfplane passage times: [-f*n, (1+f)*n] x [-f*n, f*n].
    static Region halfplane_window(double n, double window_factor);

    Kind kind() const { return kind_; }
    bool contains(Site v) const;
    std::vector<Site> sites() const;  // sorted lexicographically
    // Inclusive axial-coordinate bounds guaranteed to cover the region.
    void axial_bounds(std::int32_t& x_lo, std::int32_t& x_hi,
                      std::int32_t& y_lo, std::int32_t& y_hi) const;

    double inner_radius() const { return r_inner_; }
    double outer_radius() const { return r_outer_; }
    Site center() const { return center_; }

  private:
    Region() = default;
    Kind kind_ = Kind::ball;
    Site center_{0, 0};
    double r_inner_ = 0.0, r_outer_ = 0.0;
    double bx0_ = 0.0, bx1_ = 0.0, by0_ = 0.0, by1_ = 0.0;
};

// Rectangular axial-coordinate frame mapping sites to dense indices; the
// engines use it for O(1) per-site state.  Covers [x0, x0+w) x [y0, y0+h).
struct Frame {
    std::int32_t x0 = 0, y0 = 0;
    std::int32_t w = 0, h = 0;

    static Frame covering(const Region& region, int margin);

    std::size_t size() const {
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
    bool contains(Site v) const {
        return v.x >= x0 && v.x < x0 + w && v.y >= y0 && v.y < y0 + h;
    }
    std::size_t index(Site v) const {
        return static_cast<std::size_t>(v.y - y0) * static_cast<std::size_t>(w) +
               static_cast<std::size_t>(v.x - x0);
    }
    Site site(std::size_t idx) const {
        return {x0 + static_cast<std::int32_t>(idx % static_cast<std::size_t>(w)),
                y0 + static_cast<std::int32_t>(idx / static_cast<std::size_t>(w))};
    }
};

struct SiteHash {
    std::size_t operator()(Site v) const {
        // splitmix-style avalanche of the packed coordinates
        std::uint64_t z = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x)) << 32) |
                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.y));
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

std::string to_string(Site v);

}  // namespace fpplab
