#include "fpplab/circuits.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace fpplab {
namespace {

// Cell flag bits for the peeling machinery.  kDomain marks the current peel
// domain, kConstr the constraint set; the rest are scratch per round.
constexpr std::uint8_t kDomain = 1;
constexpr std::uint8_t kBlock = 2;   // constraint site of the wanted color
constexpr std::uint8_t kFlood = 4;   // reached by the exterior flood
constexpr std::uint8_t kHold = 8;    // origin component after the flood
constexpr std::uint8_t kCirc = 16;   // on the reduced circuit
constexpr std::uint8_t kInt = 32;    // strictly inside the circuit
constexpr std::uint8_t kConstr = 64;

// Signed crossing of the directed segment a->b with the horizontal ray from
// the origin toward +x.  Crossing edges have |dy| = 1, so the crossing level
// y = 1/2 (in row units) is met iff the rows straddle 0, and the crossing
// abscissa has doubled coordinate ((2ax+ay) + (2bx+by)) / 2, which is odd and
// therefore never ties with the origin.
int ray_crossing(Site a, Site b) {
    if (std::min(a.y, b.y) > 0 || std::max(a.y, b.y) <= 0) return 0;
    const std::int64_t twice_x = 2 * static_cast<std::int64_t>(a.x) + a.y +
                                 2 * static_cast<std::int64_t>(b.x) + b.y;
    if (twice_x <= 0) return 0;
    return b.y > a.y ? 1 : -1;
}

int winding_around_origin(std::span<const Site> cyc) {
    int w = 0;
    for (std::size_t i = 0; i < cyc.size(); ++i)
        w += ray_crossing(cyc[i], cyc[(i + 1) % cyc.size()]);
    return w;
}

// Counterclockwise boundary walk of a hexagon union (region on the left).
// State is the directed edge (v, k): the side of hexagon v facing
// neighbor(v, k), which must be off-region.  Advancing: let u be the
// counterclockwise-next neighbor of v; if u is off-region the walk turns
// around the next corner of v, otherwise it continues along u (the off-region
// hexagon across the new edge is the old neighbor(v, k), at direction k-1
// from u, by the offset identity off[k] - off[k+1] = off[k-1]).
//
// `start` must be the topmost-rightmost region cell, whose +y edge is then on
// the boundary.  Records the region-side site per edge, or the far side when
// `outer` is set, collapsing consecutive repeats.
template <class InRegion>
std::vector<Site> walk_region_boundary(Site start, bool outer, std::size_t step_cap,
                                       InRegion&& in_region) {
    std::vector<Site> walk;
    Site v = start;
    int k = 1;
    std::size_t steps = 0;
    do {
        if (++steps > step_cap) throw FppError("region boundary walk failed to close");
        const Site rec = outer ? neighbor(v, k) : v;
        if (walk.empty() || !(walk.back() == rec)) walk.push_back(rec);
        const Site u = neighbor(v, (k + 1) % 6);
        if (in_region(u)) {
            v = u;
            k = (k + 5) % 6;
        } else {
            k = (k + 1) % 6;
        }
    } while (!(v == start && k == 1));
    if (walk.size() > 1 && walk.front() == walk.back()) walk.pop_back();
    return walk;
}

// Reduce a closed boundary walk to a simple cycle.  The boundary curve of a
// hexagon union never pinches at a corner (any two of the three hexagons at a
// corner share an edge), so only sites repeat, and every sub-loop of the
// counterclockwise walk winds 0 or +1 around the origin: zero lobes hang off
// a cut site and are dropped; a +1 lobe is the surrounding cycle and is kept.
std::vector<Site> reduce_to_cycle(std::vector<Site> walk) {
    for (;;) {
        const std::size_t m = walk.size();
        std::vector<int> before(m, 0);  // ray crossings of edges 0..t-1
        std::unordered_map<Site, std::size_t, SiteHash> seen;
        seen.reserve(2 * m);
        std::size_t lo = m, hi = m;
        int acc = 0;
        for (std::size_t t = 0; t < m; ++t) {
            before[t] = acc;
            const auto [it, fresh] = seen.try_emplace(walk[t], t);
            if (!fresh) {
                lo = it->second;
                hi = t;
                break;
            }
            if (t + 1 < m) acc += ray_crossing(walk[t], walk[t + 1]);
        }
        if (hi == m) return walk;
        const int lobe = before[hi] - before[lo];
        if (lobe == 0) {
            walk.erase(walk.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                       walk.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        } else if (lobe == 1) {
            std::vector<Site> kept(walk.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                                   walk.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
            walk = std::move(kept);
        } else {
            throw FppError("boundary walk lobe with unexpected winding");
        }
    }
}

void canonical_rotate(std::vector<Site>& cyc) {
    std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
}

// Orientation and canonical rotation.  `cyc` must wind +1; stored order is
// counterclockwise exactly when a blue site touches the circuit from inside.
Circuit finalize_circuit(std::vector<Site> cyc, Color color, const ConfigSource& source,
                         std::span<const Site> interior) {
    if (winding_around_origin(cyc) != 1)
        throw FppError("reduced boundary is not a single counterclockwise circuit");
    std::unordered_set<Site, SiteHash> on(cyc.begin(), cyc.end());
    bool blue_inside = false;
    for (const Site v : interior) {
        if (source.color_at(v) != Color::blue) continue;
        for (int d = 0; d < 6 && !blue_inside; ++d)
            if (on.count(neighbor(v, d)) != 0) blue_inside = true;
        if (blue_inside) break;
    }
    Circuit c;
    c.color = color;
    c.orientation = blue_inside ? 1 : -1;
    if (c.orientation < 0) std::reverse(cyc.begin(), cyc.end());
    canonical_rotate(cyc);
    c.sites = std::move(cyc);
    return c;
}

// Shared engine for the peeling operations.  Domain and constraint are fixed
// at construction; peel() extracts the outermost circuit of a color and
// shrinks the domain to its strict interior, innermost() extracts the
// innermost one without touching the domain.
class Peeler {
  public:
    Peeler(const ConfigSource& source, const Frame& frame)
        : source_(&source), frame_(frame), cell_(frame.size(), 0) {}

    void set_domain(std::span<const Site> sites) {
        for (const Site v : sites) {
            if (!frame_.contains(v)) throw InvalidSpec("peel domain exceeds the working frame");
            const std::size_t i = frame_.index(v);
            if (!(cell_[i] & kDomain)) {
                cell_[i] |= kDomain;
                domain_.push_back(static_cast<std::uint32_t>(i));
            }
        }
        if (!frame_.contains(Site{0, 0}) || !(cell_[frame_.index(Site{0, 0})] & kDomain))
            throw InvalidSpec("peel domain must contain the origin");
    }

    void set_constraint(std::span<const Site> sites) {
        for (const Site v : sites) {
            if (v == Site{0, 0}) throw InvalidSpec("circuit constraint contains the origin");
            if (frame_.contains(v)) cell_[frame_.index(v)] |= kConstr;
        }
    }

    const std::vector<std::uint32_t>& domain_indices() const { return domain_; }
    const Frame& frame() const { return frame_; }

    std::optional<Circuit> peel(Color color) {
        begin_round(color);
        // Exterior flood: everything connected to the outside of the domain
        // through non-blocking cells.
        stack_.clear();
        for (const std::uint32_t i : domain_) {
            if (cell_[i] & kBlock) continue;
            const Site v = frame_.site(i);
            bool rim = false;
            for (int d = 0; d < 6 && !rim; ++d) {
                const Site u = neighbor(v, d);
                rim = !frame_.contains(u) || !(cell_[frame_.index(u)] & kDomain);
            }
            if (rim) {
                cell_[i] |= kFlood;
                stack_.push_back(i);
            }
        }
        while (!stack_.empty()) {
            const Site v = frame_.site(stack_.back());
            stack_.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                if (!frame_.contains(u)) continue;
                const std::size_t iu = frame_.index(u);
                const std::uint8_t f = cell_[iu];
                if ((f & kDomain) && !(f & kBlock) && !(f & kFlood)) {
                    cell_[iu] |= kFlood;
                    stack_.push_back(static_cast<std::uint32_t>(iu));
                }
            }
        }
        const std::size_t oi = frame_.index(Site{0, 0});
        if (cell_[oi] & kFlood) return std::nullopt;  // no closed shell of this color

        // Origin component of the remainder (blocking cells included); its
        // outer boundary walk passes only through blocking sites.
        Site top{0, 0};
        cell_[oi] |= kHold;
        hold_.assign(1, static_cast<std::uint32_t>(oi));
        stack_.assign(1, static_cast<std::uint32_t>(oi));
        while (!stack_.empty()) {
            const Site v = frame_.site(stack_.back());
            stack_.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                if (!frame_.contains(u)) continue;
                const std::size_t iu = frame_.index(u);
                const std::uint8_t f = cell_[iu];
                if ((f & kDomain) && !(f & kFlood) && !(f & kHold)) {
                    cell_[iu] |= kHold;
                    hold_.push_back(static_cast<std::uint32_t>(iu));
                    stack_.push_back(static_cast<std::uint32_t>(iu));
                    if (u.y > top.y || (u.y == top.y && u.x > top.x)) top = u;
                }
            }
        }

        auto walk = walk_region_boundary(top, /*outer=*/false, 6 * hold_.size() + 12,
                                         [&](Site u) {
                                             return frame_.contains(u) &&
                                                    (cell_[frame_.index(u)] & kHold);
                                         });
        for (const Site w : walk)
            if (!(cell_[frame_.index(w)] & kBlock))
                throw FppError("held component boundary is not blocking");
        auto cyc = reduce_to_cycle(std::move(walk));
        for (const Site w : cyc) cell_[frame_.index(w)] |= kCirc;

        // Strict interior: origin flood bounded by the circuit.  Erased walk
        // lobes attach through circuit sites, so the flood cannot leak.
        interior_.clear();
        interior_sites_.clear();
        cell_[oi] |= kInt;
        interior_.push_back(static_cast<std::uint32_t>(oi));
        interior_sites_.push_back(Site{0, 0});
        stack_.assign(1, static_cast<std::uint32_t>(oi));
        while (!stack_.empty()) {
            const Site v = frame_.site(stack_.back());
            stack_.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                if (!frame_.contains(u)) continue;
                const std::size_t iu = frame_.index(u);
                const std::uint8_t f = cell_[iu];
                if ((f & kHold) && !(f & kCirc) && !(f & kInt)) {
                    cell_[iu] |= kInt;
                    interior_.push_back(static_cast<std::uint32_t>(iu));
                    interior_sites_.push_back(u);
                    stack_.push_back(static_cast<std::uint32_t>(iu));
                }
            }
        }

        Circuit c = finalize_circuit(std::move(cyc), color, *source_, interior_sites_);
#ifndef NDEBUG
        validate_circuit(c, *source_);
#endif
        for (const std::uint32_t i : domain_) cell_[i] &= static_cast<std::uint8_t>(~kDomain);
        for (const std::uint32_t i : interior_) cell_[i] |= kDomain;
        domain_.swap(interior_);
        return c;
    }

    std::optional<Circuit> innermost(Color color) {
        begin_round(color);
        // Origin flood over non-blocking domain cells; contact with the rim
        // means no closed shell.
        const std::size_t oi = frame_.index(Site{0, 0});
        assert(!(cell_[oi] & kBlock));
        Site top{0, 0};
        bool open = false;
        cell_[oi] |= kFlood;
        hold_.assign(1, static_cast<std::uint32_t>(oi));
        stack_.assign(1, static_cast<std::uint32_t>(oi));
        while (!stack_.empty() && !open) {
            const Site v = frame_.site(stack_.back());
            stack_.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                if (!frame_.contains(u) || !(cell_[frame_.index(u)] & kDomain)) {
                    open = true;
                    break;
                }
                const std::size_t iu = frame_.index(u);
                const std::uint8_t f = cell_[iu];
                if (!(f & kBlock) && !(f & kFlood)) {
                    cell_[iu] |= kFlood;
                    hold_.push_back(static_cast<std::uint32_t>(iu));
                    stack_.push_back(static_cast<std::uint32_t>(iu));
                    if (u.y > top.y || (u.y == top.y && u.x > top.x)) top = u;
                }
            }
        }
        if (open) return std::nullopt;

        auto walk = walk_region_boundary(top, /*outer=*/true, 6 * hold_.size() + 12,
                                         [&](Site u) {
                                             return frame_.contains(u) &&
                                                    (cell_[frame_.index(u)] & kFlood);
                                         });
        for (const Site w : walk) {
            const std::uint8_t f = cell_[frame_.index(w)];
            if (!(f & kBlock) || !(f & kDomain))
                throw FppError("shell around the origin flood is broken");
        }
        auto cyc = reduce_to_cycle(std::move(walk));
        for (const Site w : cyc) {
            const std::size_t iw = frame_.index(w);
            cell_[iw] |= kCirc;
            hold_.push_back(static_cast<std::uint32_t>(iw));  // for round cleanup
        }

        // Fill minus circuit, for the orientation scan; bounded by the
        // circuit, which lies inside the simply connected domain.
        interior_sites_.clear();
        cell_[oi] |= kInt;
        interior_sites_.push_back(Site{0, 0});
        stack_.assign(1, static_cast<std::uint32_t>(oi));
        while (!stack_.empty()) {
            const Site v = frame_.site(stack_.back());
            stack_.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                if (!frame_.contains(u)) continue;
                const std::size_t iu = frame_.index(u);
                const std::uint8_t f = cell_[iu];
                if ((f & kDomain) && !(f & kCirc) && !(f & kInt)) {
                    cell_[iu] |= kInt;
                    hold_.push_back(static_cast<std::uint32_t>(iu));  // for round cleanup
                    interior_sites_.push_back(u);
                    stack_.push_back(static_cast<std::uint32_t>(iu));
                }
            }
        }

        Circuit c = finalize_circuit(std::move(cyc), color, *source_, interior_sites_);
#ifndef NDEBUG
        validate_circuit(c, *source_);
#endif
        return c;
    }

  private:
    // Clear the scratch flags of the previous round and rebuild the blocking
    // set for `color` over the current domain.  kHold/kCirc/kInt only ever
    // land on cells recorded in hold_, which may extend outside the shrunken
    // domain, so they are cleared from that list.
    void begin_round(Color color) {
        for (const std::uint32_t i : hold_)
            cell_[i] &= static_cast<std::uint8_t>(~(kHold | kCirc | kInt));
        hold_.clear();
        for (const std::uint32_t i : domain_) {
            std::uint8_t& f = cell_[i];
            f &= static_cast<std::uint8_t>(~(kBlock | kFlood));
            if ((f & kConstr) && source_->color_at(frame_.site(i)) == color) f |= kBlock;
        }
    }

    const ConfigSource* source_;
    Frame frame_;
    std::vector<std::uint8_t> cell_;
    std::vector<std::uint32_t> domain_, hold_, interior_, stack_;
    std::vector<Site> interior_sites_;
};

Frame frame_over(std::span<const Site> sites) {
    std::int32_t x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    for (const Site v : sites) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    return Frame{x0 - 2, y0 - 2, (x1 - x0) + 5, (y1 - y0) + 5};
}

// Annulus constraint A(r, R) within a precomputed ball of radius R.
std::vector<Site> annulus_constraint(std::span<const Site> ball, double r) {
    std::vector<Site> ann;
    ann.reserve(ball.size());
    for (const Site v : ball)
        if (!hex_in_disc(v.x, v.y, r)) ann.push_back(v);
    return ann;
}

void check_annulus_radii(const char* who, double r, double R) {
    if (!(r >= 1.0) || !(R > r))
        throw InvalidAnnulus(std::string(who) + ": need 1 <= r < R");
}

void check_blue_ring(const char* who, const ConfigSource& source,
                     std::span<const Site> ring) {
    for (const Site v : ring)
        if (source.color_at(v) != Color::blue)
            throw MissingBoundaryCondition(std::string(who) +
                                           ": external boundary ring of B(0,R) must be blue");
}

// Exhaustive family search used by s_x: enumerate every simple cycle within
// `sites` (all yellow already) that winds around the origin and passes through
// at least one probe site, then branch-and-bound a maximum site-disjoint
// family.  Callers cap |sites| at 20, so cycle sets fit in a machine word.
int max_disjoint_touching_count(std::span<const Site> sites, std::span<const Site> probe) {
    const int n = static_cast<int>(sites.size());
    std::uint32_t probe_mask = 0;
    for (int i = 0; i < n; ++i)
        if (std::binary_search(probe.begin(), probe.end(), sites[static_cast<std::size_t>(i)]))
            probe_mask |= std::uint32_t{1} << i;
    if (probe_mask == 0) return 0;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < 6; ++d) {
            const Site u = neighbor(sites[static_cast<std::size_t>(i)], d);
            for (int k = 0; k < n; ++k)
                if (sites[static_cast<std::size_t>(k)] == u) adj[static_cast<std::size_t>(i)].push_back(k);
        }
    std::unordered_set<std::uint32_t> families;
    std::vector<int> path;
    std::vector<Site> cycsites;
    std::uint32_t used = 0;
    // Cycles are rooted at their smallest index; path[1] < path.back() drops
    // the reflected traversal.
    auto dfs = [&](auto&& self, int v, int s) -> void {
        for (const int u : adj[static_cast<std::size_t>(v)]) {
            if (u == s && path.size() >= 3 && path[1] < path.back()) {
                if (!(used & probe_mask)) continue;
                cycsites.clear();
                for (const int i : path) cycsites.push_back(sites[static_cast<std::size_t>(i)]);
                const int w = winding_around_origin(cycsites);
                if (w == 1 || w == -1) families.insert(used);
            } else if (u > s && !(used >> u & 1u)) {
                path.push_back(u);
                used |= std::uint32_t{1} << u;
                self(self, u, s);
                path.pop_back();
                used &= ~(std::uint32_t{1} << u);
            }
        }
    };
    for (int s = 0; s < n; ++s) {
        path.assign(1, s);
        used = std::uint32_t{1} << s;
        dfs(dfs, s, s);
    }
    std::vector<std::uint32_t> masks(families.begin(), families.end());
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        return std::popcount(a) < std::popcount(b);
    });
    int best = 0;
    auto pack = [&](auto&& self, std::size_t idx, std::uint32_t taken, int depth) -> void {
        best = std::max(best, depth);
        for (std::size_t i = idx; i < masks.size(); ++i)
            if (!(masks[i] & taken)) self(self, i + 1, taken | masks[i], depth + 1);
    };
    pack(pack, 0, 0u, 0);
    return best;
}

}  // namespace

void validate_circuit(const Circuit& c, const ConfigSource& source) {
    const auto& s = c.sites;
    if (s.size() < 3) throw FppError("circuit: fewer than three sites");
    if (c.orientation != 1 && c.orientation != -1) throw FppError("circuit: bad orientation");
    std::unordered_set<Site, SiteHash> seen;
    seen.reserve(2 * s.size());
    for (const Site v : s) {
        if (v == Site{0, 0}) throw FppError("circuit passes through the origin");
        if (!seen.insert(v).second) throw FppError("circuit repeats a site");
        if (source.color_at(v) != c.color) throw FppError("circuit is not monochromatic");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Site a = s[i], b = s[(i + 1) % s.size()];
        bool adj = false;
        for (int d = 0; d < 6 && !adj; ++d) adj = neighbor(a, d) == b;
        if (!adj) throw FppError("circuit sites are not cyclically adjacent");
    }
    if (winding_around_origin(s) != c.orientation)
        throw FppError("circuit winding disagrees with its orientation");
    if (std::min_element(s.begin(), s.end()) != s.begin())
        throw FppError("circuit is not in canonical rotation");
}

std::vector<Site> strict_interior(const Circuit& c) {
    if (c.sites.empty()) throw FppError("strict_interior: empty circuit");
    const Frame frame = frame_over(c.sites);
    if (!frame.contains(Site{0, 0})) throw FppError("strict_interior: circuit does not reach around the origin");
    std::vector<std::uint8_t> on(frame.size(), 0);
    for (const Site v : c.sites) on[frame.index(v)] = 1;
    const std::size_t oi = frame.index(Site{0, 0});
    if (on[oi]) throw FppError("strict_interior: circuit passes through the origin");
    std::vector<Site> out{Site{0, 0}};
    std::vector<std::size_t> stack{oi};
    on[oi] = 2;
    while (!stack.empty()) {
        const Site v = frame.site(stack.back());
        stack.pop_back();
        for (int d = 0; d < 6; ++d) {
            const Site u = neighbor(v, d);
            if (!frame.contains(u))
                throw FppError("strict_interior: circuit does not enclose the origin");
            const std::size_t iu = frame.index(u);
            if (on[iu] == 0) {
                on[iu] = 2;
                out.push_back(u);
                stack.push_back(iu);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Circuit> outermost_circuit(const ConfigSource& source,
                                         std::span<const Site> domain, Color color,
                                         std::span<const Site> constraint) {
    if (domain.empty()) throw InvalidSpec("outermost_circuit: empty domain");
    Peeler p(source, frame_over(domain));
    p.set_domain(domain);
    p.set_constraint(constraint);
    return p.peel(color);
}

std::optional<Circuit> innermost_circuit(const ConfigSource& source,
                                         std::span<const Site> domain, Color color,
                                         std::span<const Site> constraint) {
    if (domain.empty()) throw InvalidSpec("innermost_circuit: empty domain");
    Peeler p(source, frame_over(domain));
    p.set_domain(domain);
    p.set_constraint(constraint);
    return p.innermost(color);
}

CircuitCount rho(const ConfigSource& source, double r, double R) {
    check_annulus_radii("rho", r, R);
    const auto ball = ball_sites(Site{0, 0}, R);
    Peeler p(source, Frame::covering(Region::ball(Site{0, 0}, R), 2));
    p.set_domain(ball);
    p.set_constraint(annulus_constraint(ball, r));
    CircuitCount out;
    while (auto c = p.peel(Color::yellow)) out.circuits.push_back(std::move(*c));
    out.count = static_cast<int>(out.circuits.size());
    return out;
}

CircuitCount loop_count_N(const ConfigSource& source, double r, double R) {
    check_annulus_radii("loop_count_N", r, R);
    const auto ball = ball_sites(Site{0, 0}, R);
    check_blue_ring("loop_count_N", source, external_boundary(ball));
    Peeler p(source, Frame::covering(Region::ball(Site{0, 0}, R), 2));
    p.set_domain(ball);
    p.set_constraint(annulus_constraint(ball, r));
    CircuitCount out;
    Color want = Color::yellow;
    while (auto c = p.peel(want)) {
        out.circuits.push_back(std::move(*c));
        want = flipped(want);
    }
    out.count = static_cast<int>(out.circuits.size());
    return out;
}

namespace {

// Shared body of the switch and its inverse: peel circuits (uniformly yellow,
// or alternating), flipping every cell covered by an odd number of the peeled
// strict interiors.  The flip blocks D1\D2, D3\D4, ... — with D_n alone for
// odd n and D_{n-1}\D_n for even n — are exactly the odd-depth cells, since
// the interiors are strictly nested.
ConfigSource switch_by_peeling(const char* who, const ConfigSource& source, double r,
                               double R, bool alternate) {
    check_annulus_radii(who, r, R);
    const auto ball = ball_sites(Site{0, 0}, R);
    const auto ring = external_boundary(ball);
    check_blue_ring(who, source, ring);
    const Frame frame = Frame::covering(Region::ball(Site{0, 0}, R), 2);
    Peeler p(source, frame);
    p.set_domain(ball);
    p.set_constraint(annulus_constraint(ball, r));
    std::vector<std::uint8_t> flip(frame.size(), 0);
    Color want = Color::yellow;
    while (p.peel(want)) {
        for (const std::uint32_t i : p.domain_indices()) flip[i] ^= 1;
        if (alternate) want = flipped(want);
    }
    std::vector<std::pair<Site, Color>> entries;
    entries.reserve(ball.size() + ring.size());
    for (const Site v : ball) {
        Color col = source.color_at(v);
        if (flip[frame.index(v)]) col = flipped(col);
        entries.emplace_back(v, col);
    }
    for (const Site v : ring) entries.emplace_back(v, Color::blue);
    return ConfigSource::stored(std::move(entries));
}

}  // namespace

ConfigSource color_switch(const ConfigSource& source, double r, double R) {
    return switch_by_peeling("color_switch", source, r, R, /*alternate=*/false);
}

ConfigSource color_switch_inverse(const ConfigSource& source, double r, double R) {
    return switch_by_peeling("color_switch_inverse", source, r, R, /*alternate=*/true);
}

SxResult s_x(const ConfigSource& source, int x, SxMode mode) {
    if (x < 0) throw InvalidSpec("s_x: x must be nonnegative");
    const double scale = std::ldexp(1.0, x);
    const auto ball = ball_sites(Site{0, 0}, scale);
    const auto inner = internal_boundary(ball);
    const auto outer = external_boundary(ball);
    // Sites whose hexagon shares an edge with the boundary curve of the
    // hexagon union B(0,2^x): both skins of the ball.  A counted circuit must
    // pass through one of them; its remaining sites may lie anywhere.
    std::vector<Site> shell;
    shell.reserve(inner.size() + outer.size());
    for (const Site v : inner)
        if (!(v == Site{0, 0})) shell.push_back(v);
    shell.insert(shell.end(), outer.begin(), outer.end());
    std::sort(shell.begin(), shell.end());

    // Every qualifying circuit lives inside one yellow cluster that meets the
    // shell, and circuits from different clusters are automatically disjoint
    // and nested, so the count splits as a sum over clusters.  Grow clusters
    // breadth-first (never through the origin); ones that stay small can be
    // searched outright.
    constexpr std::size_t kClusterCap = 20;
    std::unordered_set<Site, SiteHash> visited;
    std::vector<std::vector<Site>> small_clusters;
    std::unordered_set<Site, SiteHash> in_small;
    std::size_t union_size = 0;
    bool any_big = false;
    for (const Site seed : shell) {
        if (visited.count(seed) || source.color_at(seed) != Color::yellow) continue;
        std::vector<Site> members{seed};
        visited.insert(seed);
        bool big = false;
        for (std::size_t head = 0; head < members.size() && !big; ++head) {
            for (int d = 0; d < 6; ++d) {
                const Site w = neighbor(members[head], d);
                if (w == Site{0, 0} || visited.count(w)) continue;
                if (source.color_at(w) != Color::yellow) continue;
                visited.insert(w);
                members.push_back(w);
                if (members.size() > kClusterCap) {
                    big = true;  // abandoned; a later seed may regrow it, harmless
                    break;
                }
            }
        }
        if (big) {
            any_big = true;
            continue;
        }
        union_size += members.size();
        in_small.insert(members.begin(), members.end());
        small_clusters.push_back(std::move(members));
    }

    if (mode == SxMode::exact) {
        if (any_big || union_size > kClusterCap)
            throw RegionTooLarge("s_x exact mode: candidate clusters exceed 20 sites");
        std::vector<Site> region;
        region.reserve(union_size);
        for (const auto& k : small_clusters) region.insert(region.end(), k.begin(), k.end());
        return SxResult{max_disjoint_touching_count(region, shell), true};
    }

    // Greedy: small clusters are still searched exhaustively (cheap); big
    // ones fall back to peeling the full nesting chain of yellow circuits in
    // a window four times the probed radius and counting the links that touch
    // the shell.  Chain links hidden behind a non-touching hull and circuits
    // wandering past the window are lost, hence the lower-bound flag.
    int count = 0;
    for (const auto& k : small_clusters) count += max_disjoint_touching_count(k, shell);
    if (any_big) {
        const double window = 4.0 * scale;
        const auto dom = ball_sites(Site{0, 0}, window);
        std::vector<Site> constraint;
        constraint.reserve(dom.size() - 1);
        for (const Site v : dom)
            if (!(v == Site{0, 0})) constraint.push_back(v);
        Peeler p(source, Frame::covering(Region::ball(Site{0, 0}, window), 2));
        p.set_domain(dom);
        p.set_constraint(constraint);
        while (const auto c = p.peel(Color::yellow)) {
            const bool touches = std::any_of(c->sites.begin(), c->sites.end(), [&](Site v) {
                return std::binary_search(shell.begin(), shell.end(), v);
            });
            // circuits of exhaustively-counted clusters are already in
            if (touches && !in_small.count(c->sites.front())) ++count;
        }
    }
    return SxResult{count, false};
}

MjResult m_and_innermost_blue(const ConfigSource& source, int j, int cap) {
    if (j < 0) throw InvalidSpec("m_and_innermost_blue: j must be nonnegative");
    if (cap < 1) throw InvalidSpec("m_and_innermost_blue: cap must be positive");
    for (int k = j; k < j + cap; ++k) {
        const double r = std::ldexp(1.0, k);
        const double R = std::ldexp(1.0, k + 1);
        const Frame frame = Frame::covering(Region::ball(Site{0, 0}, R), 2);
        // Lazily classified cells: 0 unknown, 1 flooded, 2 blocking blue
        // annulus site, 3 hexagon not inside B(0,R), 4 circuit, 5 interior.
        // No site list is materialized; predicates drive the flood directly.
        std::vector<std::uint8_t> code(frame.size(), 0);
        std::vector<std::uint32_t> stack;
        const auto classify = [&](Site u) -> std::uint8_t {
            if (!hex_in_disc(u.x, u.y, R)) return 3;
            if (!hex_in_disc(u.x, u.y, r) && source.color_at(u) == Color::blue) return 2;
            return 0;
        };
        const std::size_t oi = frame.index(Site{0, 0});
        code[oi] = 1;
        stack.push_back(static_cast<std::uint32_t>(oi));
        Site top{0, 0};
        std::size_t flooded = 1;
        bool open = false;
        while (!stack.empty() && !open) {
            const Site v = frame.site(stack.back());
            stack.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                assert(frame.contains(u));  // margin-2 frame around B(0,R)
                const std::size_t iu = frame.index(u);
                std::uint8_t& cu = code[iu];
                if (cu == 0) {
                    const std::uint8_t cls = classify(u);
                    if (cls == 0) {
                        cu = 1;
                        ++flooded;
                        stack.push_back(static_cast<std::uint32_t>(iu));
                        if (u.y > top.y || (u.y == top.y && u.x > top.x)) top = u;
                    } else {
                        cu = cls;
                        if (cls == 3) open = true;
                    }
                } else if (cu == 3) {
                    open = true;
                }
            }
        }
        if (open) continue;

        auto walk = walk_region_boundary(top, /*outer=*/true, 6 * flooded + 12,
                                         [&](Site u) {
                                             return frame.contains(u) &&
                                                    code[frame.index(u)] == 1;
                                         });
        for (const Site w : walk)
            if (code[frame.index(w)] != 2)
                throw FppError("blue shell around the origin flood is broken");
        auto cyc = reduce_to_cycle(std::move(walk));
        for (const Site w : cyc) code[frame.index(w)] = 4;
        std::vector<Site> interior{Site{0, 0}};
        code[oi] = 5;
        stack.assign(1, static_cast<std::uint32_t>(oi));
        while (!stack.empty()) {
            const Site v = frame.site(stack.back());
            stack.pop_back();
            for (int d = 0; d < 6; ++d) {
                const Site u = neighbor(v, d);
                assert(frame.contains(u));  // interior stays inside B(0,R)
                const std::size_t iu = frame.index(u);
                if (code[iu] != 4 && code[iu] != 5) {
                    code[iu] = 5;
                    interior.push_back(u);
                    stack.push_back(static_cast<std::uint32_t>(iu));
                }
            }
        }
        Circuit c = finalize_circuit(std::move(cyc), Color::blue, source, interior);
#ifndef NDEBUG
        validate_circuit(c, source);
#endif
        return MjResult{k, std::move(c)};
    }
    throw SearchCapExceeded("m_and_innermost_blue: no blue circuit in the searched annuli");
}

}  // namespace fpplab
