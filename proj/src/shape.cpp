#include "fpplab/shape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_set>
#include <vector>

namespace fpplab {
namespace {

constexpr std::uint8_t kUnlabeled = 0xFF;

// Window membership with an exact-arithmetic fast path.  Ball and annulus
// tests reduce to integer norms away from the rim; only the thin ambiguous
// shell falls back to the vertex-exact Region test.  Boxes are cheap anyway.
bool in_window(const Region& window, Site v) {
    if (window.kind() == Region::Kind::box) return window.contains(v);
    const Site c = window.center();
    const Site d{v.x - c.x, v.y - c.y};
    const double n2 = static_cast<double>(norm2(d));
    const double r_out = window.outer_radius();
    // hexagon(v) within disc(r) implies |pos(v)| <= r, and follows from
    // |pos(v)| <= r - circumradius
    const double safe = r_out - kHexCircumradius;
    const bool inside_outer =
        n2 <= safe * safe ? true
                          : (n2 > r_out * r_out ? false : window.contains(v));
    if (window.kind() == Region::Kind::ball) return inside_outer;
    if (!inside_outer) return false;
    const double r_in = window.inner_radius();
    const double deep = r_in + kHexCircumradius;
    if (n2 >= deep * deep) return true;
    if (n2 < (r_in > kHexCircumradius ? (r_in - kHexCircumradius) * (r_in - kHexCircumradius) : 0.0))
        return false;
    return window.contains(v);
}

// True when v has a neighbor outside the window: the inner rim through which
// every escaping path must pass.
bool on_rim(const Region& window, Site v) {
    for (int dir = 0; dir < 6; ++dir) {
        if (!in_window(window, neighbor(v, dir))) return true;
    }
    return false;
}

int direction_of(Site from, Site to) {
    for (int dir = 0; dir < 6; ++dir) {
        const Site d = kNeighborOffsets[static_cast<std::size_t>(dir)];
        if (from.x + d.x == to.x && from.y + d.y == to.y) return dir;
    }
    throw FppError("direction_of: sites are not adjacent");
}

Frame frame_for(const Region& window) {
    const Frame f = Frame::covering(window, 1);
    if (f.size() > std::size_t{1} << 31) {
        throw InvalidSpec("window too large for the dense wet-region engine");
    }
    return f;
}

bool yx_less(Site a, Site b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

// Walks the outer boundary of the hexagon union of `in`, starting from the
// (y, x)-minimal member's downward edge, interior on the left.  The membership
// predicate is only ever queried on sites adjacent to the outer boundary, so
// passing an unfilled representative of a filled region traces the same cycle:
// a non-member candidate next to an outer boundary edge is adjacent to an
// outside site and hence outside itself, never an interior hole.
template <typename InSet>
EdgeCycle trace_outer(const InSet& in, Site start, std::size_t member_count) {
    EdgeCycle cycle;
    const std::size_t cap = 6 * member_count + 12;
    Site s = start;
    int d = 4;  // (0, -1): below the (y, x)-minimum lies nothing of the region
    do {
        cycle.push_back(BoundaryEdge{s, neighbor(s, d)});
        if (cycle.size() > cap) {
            throw FppError("boundary trace failed to close");
        }
        const Site turn = neighbor(s, (d + 1) % 6);
        if (in(turn)) {
            s = turn;
            d = (d + 5) % 6;
        } else {
            d = (d + 1) % 6;
        }
    } while (!(s.x == start.x && s.y == start.y && d == 4));
    return cycle;
}

double point_segment_distance(Vec2 a, Vec2 b) {
    const double ux = b.x - a.x, uy = b.y - a.y;
    const double len2 = ux * ux + uy * uy;
    double t = len2 > 0.0 ? -(a.x * ux + a.y * uy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = a.x + t * ux, py = a.y + t * uy;
    return std::hypot(px, py);
}

// Shared engine state for the hull-chain constructions: a dense membership
// frame plus the member list in insertion order.
struct Hull {
    Frame frame;
    std::vector<std::uint8_t> member;
    std::vector<Site> sites;

    explicit Hull(const Frame& f) : frame(f), member(f.size(), 0) {}

    bool contains(Site v) const {
        return frame.contains(v) && member[frame.index(v)] != 0;
    }
    void add(Site v) {
        member[frame.index(v)] = 1;
        sites.push_back(v);
    }
};

// Absorbs every cluster of `color` containing a seed into the hull; a rim
// touch proves the cluster may continue outside the window.
template <typename Overflow>
void absorb_clusters(Hull& hull, const ConfigSource& source, const Region& window,
                     std::span<const Site> seeds, Color color, Overflow&& overflow) {
    std::vector<Site> queue;
    for (const Site v : seeds) {
        if (hull.contains(v) || source.color_at(v) != color) continue;
        hull.add(v);
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const Site v = queue.back();
        queue.pop_back();
        if (on_rim(window, v)) overflow();
        for (int dir = 0; dir < 6; ++dir) {
            const Site u = neighbor(v, dir);
            if (hull.contains(u) || source.color_at(u) != color) continue;
            hull.add(u);
            queue.push_back(u);
        }
    }
}

// Sites outside the hull adjacent to it, deduplicated, in first-contact order.
std::vector<Site> hull_externals(const Hull& hull) {
    std::vector<Site> out;
    std::unordered_set<Site, SiteHash> seen;
    for (const Site v : hull.sites) {
        for (int dir = 0; dir < 6; ++dir) {
            const Site u = neighbor(v, dir);
            if (hull.contains(u)) continue;
            if (seen.insert(u).second) out.push_back(u);
        }
    }
    return out;
}

}  // namespace

WetRegion w_set(const ConfigSource& source, int n, const Region& window) {
    if (n < 0) throw InvalidSpec("w_set: n must be nonnegative");
    if (n >= static_cast<int>(kUnlabeled)) {
        throw InvalidSpec("w_set: n exceeds the engine's label width");
    }
    const Site origin{0, 0};
    if (!in_window(window, origin)) {
        throw InvalidSpec("w_set: window must contain the origin");
    }

    const Frame f = frame_for(window);
    std::vector<std::uint8_t> dist(f.size(), kUnlabeled);
    std::vector<std::uint8_t> settled(f.size(), 0);

    WetRegion result;
    const int d0 = weight(source.color_at(origin));
    if (d0 > n) return result;

    std::deque<Site> dq;
    dist[f.index(origin)] = static_cast<std::uint8_t>(d0);
    dq.push_back(origin);
    while (!dq.empty()) {
        const Site v = dq.front();
        dq.pop_front();
        const std::size_t vi = f.index(v);
        if (settled[vi]) continue;
        settled[vi] = 1;
        if (on_rim(window, v)) {
            throw WindowOverflow("w_set: wet region reached the window rim");
        }
        const int dv = dist[vi];
        for (int dir = 0; dir < 6; ++dir) {
            const Site u = neighbor(v, dir);
            const int du = dv + weight(source.color_at(u));
            if (du > n) continue;
            const std::size_t ui = f.index(u);  // u is in the window: no rim above
            if (dist[ui] <= du) continue;
            dist[ui] = static_cast<std::uint8_t>(du);
            if (du == dv) dq.push_front(u); else dq.push_back(u);
        }
    }

    for (std::size_t i = 0; i < f.size(); ++i) {
        if (dist[i] != kUnlabeled) result.w.push_back(f.site(i));
    }
    std::sort(result.w.begin(), result.w.end());

    // Fill: flood the complement from the frame border; unreached complement
    // cells are enclosed by W (the frame is a simply connected box and W lies
    // strictly inside the window, itself strictly inside the frame).
    std::vector<std::uint8_t> outside(f.size(), 0);
    std::vector<std::uint32_t> stack;
    auto push_border = [&](std::int32_t x, std::int32_t y) {
        const std::size_t i = f.index(Site{x, y});
        if (dist[i] == kUnlabeled && !outside[i]) {
            outside[i] = 1;
            stack.push_back(static_cast<std::uint32_t>(i));
        }
    };
    for (std::int32_t x = f.x0; x < f.x0 + f.w; ++x) {
        push_border(x, f.y0);
        push_border(x, f.y0 + f.h - 1);
    }
    for (std::int32_t y = f.y0; y < f.y0 + f.h; ++y) {
        push_border(f.x0, y);
        push_border(f.x0 + f.w - 1, y);
    }
    while (!stack.empty()) {
        const Site v = f.site(stack.back());
        stack.pop_back();
        for (int dir = 0; dir < 6; ++dir) {
            const Site u = neighbor(v, dir);
            if (!f.contains(u)) continue;
            const std::size_t ui = f.index(u);
            if (outside[ui] || dist[ui] != kUnlabeled) continue;
            outside[ui] = 1;
            stack.push_back(static_cast<std::uint32_t>(ui));
        }
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (dist[i] != kUnlabeled || !outside[i]) result.w_filled.push_back(f.site(i));
    }
    std::sort(result.w_filled.begin(), result.w_filled.end());
    return result;
}

ShapeSample boundary_and_radii(std::span<const Site> w_filled) {
    std::unordered_set<Site, SiteHash> members(w_filled.begin(), w_filled.end());
    if (members.find(Site{0, 0}) == members.end()) {
        throw OriginNotInside("boundary_and_radii: region must contain the origin");
    }
    Site start = *members.begin();
    for (const Site v : members) {
        if (yx_less(v, start)) start = v;
    }
    ShapeSample sample;
    sample.site_count = static_cast<long long>(members.size());
    sample.boundary = trace_outer(
        [&members](Site v) { return members.find(v) != members.end(); }, start,
        members.size());

    sample.r_in = std::numeric_limits<double>::infinity();
    for (const BoundaryEdge& e : sample.boundary) {
        const auto ends = hex_edge(e.inside, direction_of(e.inside, e.outside));
        sample.r_in = std::min(sample.r_in, point_segment_distance(ends[0], ends[1]));
        sample.r_out = std::max(sample.r_out, std::hypot(ends[0].x, ends[0].y));
    }
    return sample;
}

CircuitBoundary nth_circuit_boundary(const ConfigSource& source, int n,
                                     const Region& window) {
    if (n < 1) throw InvalidSpec("nth_circuit_boundary: n must be positive");
    const Site origin{0, 0};
    if (!in_window(window, origin)) {
        throw InvalidSpec("nth_circuit_boundary: window must contain the origin");
    }

    Hull hull(frame_for(window));
    auto not_found = [] {
        throw CircuitNotFound(
            "nth_circuit_boundary: blue growth reached the rim; no further "
            "yellow circuit closes in this window");
    };

    int found = 0;
    if (source.color_at(origin) == Color::yellow) {
        hull.add(origin);
        found = 1;
    } else {
        const Site seeds[] = {origin};
        absorb_clusters(hull, source, window, seeds, Color::blue, not_found);
    }
    while (found < n) {
        absorb_clusters(hull, source, window, hull_externals(hull), Color::blue,
                        not_found);
        const std::vector<Site> layer = hull_externals(hull);
        ++found;
        for (const Site v : layer) {
            if (source.color_at(v) != Color::yellow) {
                throw FppError("nth_circuit_boundary: non-yellow hull boundary");
            }
            if (on_rim(window, v)) {
                // The layer itself is exact, but nothing beyond it can be
                // explored.  Mid-search that proves no further circuit fits;
                // on the final layer only the attachments are blocked.
                if (found == n) {
                    throw WindowOverflow(
                        "nth_circuit_boundary: circuit layer on the rim blocks "
                        "its blue attachments");
                }
                not_found();
            }
        }
        for (const Site v : layer) hull.add(v);
    }
    // The n-th circuit is the hull's outer layer; its blue attachments are
    // everything blue it touches.
    absorb_clusters(hull, source, window, hull_externals(hull), Color::blue, [] {
        throw WindowOverflow(
            "nth_circuit_boundary: blue attachments reached the rim");
    });

    Site start = hull.sites.front();
    for (const Site v : hull.sites) {
        if (yx_less(v, start)) start = v;
    }
    CircuitBoundary result;
    result.boundary = trace_outer([&hull](Site v) { return hull.contains(v); },
                                  start, hull.sites.size());

    const WetRegion wet = w_set(source, n, window);
    result.match = result.boundary == boundary_and_radii(wet.w_filled).boundary;
    return result;
}

EdgeCycle nested_cluster_loop(const ConfigSource& source, int n,
                              const Region& window) {
    if (n < 1) throw InvalidSpec("nested_cluster_loop: n must be positive");
    const Site origin{0, 0};
    if (!in_window(window, origin)) {
        throw InvalidSpec("nested_cluster_loop: window must contain the origin");
    }

    Hull hull(frame_for(window));
    auto overflow = [] {
        throw WindowOverflow("nested_cluster_loop: cluster chain reached the rim");
    };
    Color layer_color = source.color_at(origin);
    const Site seeds[] = {origin};
    absorb_clusters(hull, source, window, seeds, layer_color, overflow);
    int loops = layer_color == Color::blue ? 1 : 0;
    while (loops < n) {
        layer_color = flipped(layer_color);
        absorb_clusters(hull, source, window, hull_externals(hull), layer_color,
                        overflow);
        if (layer_color == Color::blue) ++loops;
    }

    Site start = hull.sites.front();
    for (const Site v : hull.sites) {
        if (yx_less(v, start)) start = v;
    }
    return trace_outer([&hull](Site v) { return hull.contains(v); }, start,
                       hull.sites.size());
}

}  // namespace fpplab
