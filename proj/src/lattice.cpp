#include "fpplab/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <unordered_set>

namespace fpplab {

std::array<Vec2, 6> Hexagon::vertices() const {
    // angle 30 + 60k degrees, radius 1/sqrt(3) around the site position
    static const std::array<Vec2, 6> offs = [] {
        std::array<Vec2, 6> a{};
        for (int k = 0; k < 6; ++k) {
            const double ang = (30.0 + 60.0 * k) * (3.141592653589793 / 180.0);
            a[static_cast<std::size_t>(k)] = {kHexCircumradius * std::cos(ang),
                                              kHexCircumradius * std::sin(ang)};
        }
        return a;
    }();
    const Vec2 c = position(center);
    std::array<Vec2, 6> out{};
    for (int k = 0; k < 6; ++k) {
        out[static_cast<std::size_t>(k)] = {c.x + offs[static_cast<std::size_t>(k)].x,
                                            c.y + offs[static_cast<std::size_t>(k)].y};
    }
    return out;
}

std::array<Vec2, 2> hex_edge(Site v, int dir) {
    // The edge facing neighbor(v, dir) joins the vertices at angles
    // 60*dir - 30 and 60*dir + 30, i.e. vertex indices (dir+5)%6 and dir.
    const auto verts = hexagon(v).vertices();
    return {verts[static_cast<std::size_t>((dir + 5) % 6)],
            verts[static_cast<std::size_t>(dir)]};
}

std::vector<Site> ball_sites(Site center, double radius) {
    std::vector<Site> out;
    if (radius < 0.0) return out;
    // conservative axial bounds: |y| <= 2r/sqrt(3)+1, |x + y/2| <= r+1
    const auto ylim = static_cast<std::int32_t>(std::floor(2.0 * radius / kSqrt3)) + 1;
    for (std::int32_t dy = -ylim; dy <= ylim; ++dy) {
        const double xc = -0.5 * dy;
        const auto xlo = static_cast<std::int32_t>(std::floor(xc - radius)) - 1;
        const auto xhi = static_cast<std::int32_t>(std::ceil(xc + radius)) + 1;
        for (std::int32_t dx = xlo; dx <= xhi; ++dx) {
            if (hex_in_disc(dx, dy, radius)) {
                out.push_back({center.x + dx, center.y + dy});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Site> external_boundary(std::span<const Site> region) {
    std::unordered_set<Site, SiteHash> in(region.begin(), region.end());
    std::unordered_set<Site, SiteHash> out;
    for (const Site v : region) {
        for (int d = 0; d < 6; ++d) {
            const Site w = neighbor(v, d);
            if (!in.contains(w)) out.insert(w);
        }
    }
    std::vector<Site> res(out.begin(), out.end());
    std::sort(res.begin(), res.end());
    return res;
}

std::vector<Site> internal_boundary(std::span<const Site> region) {
    std::unordered_set<Site, SiteHash> in(region.begin(), region.end());
    std::vector<Site> res;
    for (const Site v : region) {
        for (int d = 0; d < 6; ++d) {
            if (!in.contains(neighbor(v, d))) {
                res.push_back(v);
                break;
            }
        }
    }
    std::sort(res.begin(), res.end());
    return res;
}

Site nearest_site(Vec2 p) {
    // Invert the embedding for a starting cell, then scan its neighborhood.
    // Distances are compared through an exact-integer + fixed-expression form:
    // |p - pos(v)|^2 - |p - pos(u)|^2
    //   = (norm2(v) - norm2(u)) - 2*p.x*(dx + dy/2) - sqrt(3)*p.y*dy
    // with dx = v.x - u.x, dy = v.y - u.y, which keeps ties (e.g. cell
    // barycenters) exact and the comparator deterministic.
    const double yf = 2.0 * p.y / kSqrt3;
    const auto y0 = static_cast<std::int32_t>(std::lround(yf));
    const auto x0 = static_cast<std::int32_t>(std::lround(p.x - 0.5 * yf));
    Site best{x0 - 2, y0 - 2};
    auto better = [&](Site v, Site u) {
        // negative -> v strictly closer; zero -> exact tie
        const double dn = static_cast<double>(norm2(v) - norm2(u));
        const double dx = static_cast<double>(v.x - u.x);
        const double dy = static_cast<double>(v.y - u.y);
        const double diff = dn - 2.0 * p.x * (dx + 0.5 * dy) - kSqrt3 * p.y * dy;
        if (diff < 0.0) return true;
        if (diff > 0.0) return false;
        return v < u;  // lexicographic tie-break
    };
    for (std::int32_t dy = -2; dy <= 2; ++dy) {
        for (std::int32_t dx = -2; dx <= 2; ++dx) {
            const Site v{x0 + dx, y0 + dy};
            if (better(v, best)) best = v;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

Region Region::ball(Site center, double radius) {
    Region r;
    r.kind_ = Kind::ball;
    r.center_ = center;
    r.r_outer_ = radius;
    return r;
}

Region Region::annulus(double inner, double outer) {
    if (!(inner >= 0.0) || !(outer > inner)) {
        throw InvalidSpec("annulus requires 0 <= r < R");
    }
    Region r;
    r.kind_ = Kind::annulus;
    r.r_inner_ = inner;
    r.r_outer_ = outer;
    return r;
}

Region Region::box(double x_min, double x_max, double y_min, double y_max) {
    if (!(x_min <= x_max) || !(y_min <= y_max)) {
        throw InvalidSpec("box bounds out of order");
    }
    Region r;
    r.kind_ = Kind::box;
    r.bx0_ = x_min;
    r.bx1_ = x_max;
    r.by0_ = y_min;
    r.by1_ = y_max;
    return r;
}

Region Region::halfplane_window(double n, double window_factor) {
    return box(-window_factor * n, (1.0 + window_factor) * n,
               -window_factor * n, window_factor * n);
}

bool Region::contains(Site v) const {
    switch (kind_) {
        case Kind::ball:
            return hex_in_disc(v.x - center_.x, v.y - center_.y, r_outer_);
        case Kind::annulus:
            return hex_in_disc(v.x, v.y, r_outer_) && !hex_in_disc(v.x, v.y, r_inner_);
        case Kind::box: {
            const Vec2 p = position(v);
            return p.x >= bx0_ && p.x <= bx1_ && p.y >= by0_ && p.y <= by1_;
        }
    }
    return false;
}

void Region::axial_bounds(std::int32_t& x_lo, std::int32_t& x_hi,
                          std::int32_t& y_lo, std::int32_t& y_hi) const {
    switch (kind_) {
        case Kind::ball:
        case Kind::annulus: {
            const double r = r_outer_;
            const auto ylim = static_cast<std::int32_t>(std::floor(2.0 * r / kSqrt3)) + 1;
            const auto xlim = static_cast<std::int32_t>(std::floor(r * (1.0 + 1.0 / kSqrt3))) + 2;
            x_lo = center_.x - xlim;
            x_hi = center_.x + xlim;
            y_lo = center_.y - ylim;
            y_hi = center_.y + ylim;
            break;
        }
        case Kind::box: {
            y_lo = static_cast<std::int32_t>(std::floor(2.0 * by0_ / kSqrt3)) - 1;
            y_hi = static_cast<std::int32_t>(std::ceil(2.0 * by1_ / kSqrt3)) + 1;
            // x = px - y/2; extreme over the y range
            const double half = 0.5 * std::max(std::abs(static_cast<double>(y_lo)),
                                               std::abs(static_cast<double>(y_hi)));
            x_lo = static_cast<std::int32_t>(std::floor(bx0_ - half)) - 1;
            x_hi = static_cast<std::int32_t>(std::ceil(bx1_ + half)) + 1;
            break;
        }
    }
}

std::vector<Site> Region::sites() const {
    std::int32_t xl, xh, yl, yh;
    axial_bounds(xl, xh, yl, yh);
    std::vector<Site> out;
    for (std::int32_t x = xl; x <= xh; ++x) {
        for (std::int32_t y = yl; y <= yh; ++y) {
            const Site v{x, y};
            if (contains(v)) out.push_back(v);
        }
    }
    // x-major loop already yields lexicographic order
    assert(std::is_sorted(out.begin(), out.end()));
    return out;
}

Frame Frame::covering(const Region& region, int margin) {
    std::int32_t xl, xh, yl, yh;
    region.axial_bounds(xl, xh, yl, yh);
    Frame f;
    f.x0 = xl - margin;
    f.y0 = yl - margin;
    f.w = xh - xl + 1 + 2 * margin;
    f.h = yh - yl + 1 + 2 * margin;
    return f;
}

std::string to_string(Site v) {
    return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
}

}  // namespace fpplab
