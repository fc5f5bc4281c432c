#pragma once
// Wet-region geometry: W(n) = {v : T(0,v) <= n} under 0-1 site weights, its
// hole-filled hull, the traced outer boundary of the hexagon union with its
// inner/outer radii, and an independent circuit-chain construction of the same
// boundary for the per-configuration identity check.
//
// Boundary representation: a closed walk of directed hexagon edges, each the
// dual of a lattice edge {inside, outside}, oriented with the region interior
// on the left (counterclockwise outer cycle, winding +1 around anything it
// encloses).  Two traced boundaries are equal as curves iff the walks are
// equal as vectors: tracing always starts at the (y, x)-minimal region site's
// downward edge, which depends only on the filled hull, never on which
// representative site set produced it.
//
// Windows are resource guards, not part of the objects: every search is a
// local construction from the origin, and a completed result is therefore
// window-independent.  A search that reaches the window's rim cannot certify
// its answer against the unseen exterior and throws instead (WindowOverflow
// when a larger window could settle it, CircuitNotFound when the failure
// already proves no further circuit fits inside this window).

#include <span>
#include <vector>

#include "fpplab/config.hpp"
#include "fpplab/lattice.hpp"

namespace fpplab {

// The construction escaped the window; retry with a larger one.  Expected wet
// radii grow exponentially in n with heavy spread, so overflow at fixed
// window size is a routine outcome, not a defect.
struct WindowOverflow : FppError { using FppError::FppError; };
// Fewer than n nested yellow circuits around the origin fit in the window.
// Window-relative for the same reason WindowOverflow is: an all-blue path
// from 0 to the rim proves no circuit closes inside, but says nothing about
// a larger window.
struct CircuitNotFound : FppError { using FppError::FppError; };
// boundary_and_radii requires the origin's hexagon inside the region.
struct OriginNotInside : FppError { using FppError::FppError; };

// Directed dual edge of the lattice edge {inside, outside}: the hexagon edge
// the two sites share, walked with `inside` on the left.  Endpoint geometry
// comes from hex_edge(inside, direction of outside).
struct BoundaryEdge {
    Site inside;
    Site outside;
    friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

// Closed boundary walk; consecutive edges share a hexagon vertex and the last
// edge closes into the first.  Vertices repeat never (three hexagons meet at
// a lattice vertex and any two of them are adjacent, so a union of hexagons
// has no pinch points).
using EdgeCycle = std::vector<BoundaryEdge>;

struct WetRegion {
    std::vector<Site> w;         // {v : T(0,v) <= n}, sorted lexicographically
    std::vector<Site> w_filled;  // w plus the complement components it encloses
};

// Labels T(0, v) by 0-1 breadth-first search inside `window` and returns the
// wet set with its holes filled.  Throws WindowOverflow as soon as a labeled
// site touches the rim (has a neighbor outside the window): any escape route
// for W must pass through such a site, so a clean return is exact.
// n = 0 gives an empty pair under a yellow origin (T(0,0) = 1).
WetRegion w_set(const ConfigSource& source, int n, const Region& window);

struct ShapeSample {
    int n = 0;            // context, recorded by the experiment driver
    double r_in = 0.0;    // min distance from the origin to the boundary
    double r_out = 0.0;   // max distance; radius of the smallest 0-centred disc
    long long site_count = 0;
    EdgeCycle boundary;
};

// Traces the outer boundary of the hexagon union of `w_filled` (sites in any
// order, duplicates rejected by size bookkeeping) and measures both radii on
// the traced cycle: r_in over point-to-segment distances, r_out over vertex
// distances.  Throws OriginNotInside when the origin is not a member.
ShapeSample boundary_and_radii(std::span<const Site> w_filled);

struct CircuitBoundary {
    EdgeCycle boundary;  // outer boundary of the n-th circuit with its blue attachments
    bool match = false;  // equals the traced boundary of the filled wet region
};

// Builds the n-th innermost disjoint yellow circuit around 0 (a yellow origin
// hexagon counts as the first) by the hull chain: start from the origin's
// blue cluster (or the origin alone when yellow), repeatedly absorb blue
// clusters touching the hull and take the external site boundary as the next
// circuit layer.  Blue growth reaching the rim proves no further circuit
// closes in this window (CircuitNotFound).  The returned boundary belongs to
// the n-th circuit together with every blue cluster touching it; `match`
// compares it against w_set(source, n, window) computed independently.
CircuitBoundary nth_circuit_boundary(const ConfigSource& source, int n,
                                     const Region& window);

// n-th innermost cluster-boundary loop around 0 with yellow on the outside:
// grow the origin's cluster, then alternately absorb the wrapping clusters of
// the opposite color; each time the hull's outer layer is blue its traced
// boundary is one such loop.  This is the color-switch partner of the wet
// boundary: per configuration it differs from ∂W̄(n), but the two laws agree
// (the hexagon atom has probability 2^-7 on both sides, the seven-hexagon
// flower 2^-18), which the distributional tests exercise.
EdgeCycle nested_cluster_loop(const ConfigSource& source, int n,
                              const Region& window);

}  // namespace fpplab
