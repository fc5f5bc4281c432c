#pragma once
// Circuit combinatorics around the origin: outermost/innermost monochromatic
// circuits, the disjoint-circuit count rho, the alternating loop count N, the
// color-switching map between them, the boundary-incidence count s_x, and the
// first dyadic annulus containing a blue circuit.
//
// A circuit is a simple site cycle winding once around the origin.  The
// canonical outermost circuit of a color inside a domain is computed the
// blocking-shell way: flood the opposite color (or exterior) inward from the
// domain's external boundary; the component of the remainder containing 0 is
// ringed by sites of the requested color, and the outer boundary walk of that
// component, reduced to a simple cycle, is the circuit.  Every qualifying
// circuit lies weakly inside it.  Innermost circuits are symmetric (flood
// outward from 0 over the opposite color; the blocking shell is the circuit).
//
// Conventions:
//   * circuits never pass through the origin (a cycle through 0 does not
//     surround 0), so constraints must exclude it;
//   * stored order: canonical rotation starting at the lexicographically
//     smallest site; orientation +1 (counterclockwise, winding +1) exactly
//     when the inner site boundary contains a blue site, else -1;
//   * a circuit "touches" ∂B(0,2^x) when one of its hexagons shares an edge
//     with that topological boundary — precisely when it contains a site of
//     the incidence shell (internal plus external boundary sites of B(0,2^x));
//     the circuit's remaining sites are unrestricted.

#include <optional>
#include <span>
#include <vector>

#include "fpplab/config.hpp"
#include "fpplab/lattice.hpp"

namespace fpplab {

// loop_count_N / color_switch require an all-blue external boundary ring.
struct MissingBoundaryCondition : FppError { using FppError::FppError; };
// No blue circuit found in the first `cap` dyadic annuli.
struct SearchCapExceeded : FppError { using FppError::FppError; };

struct Circuit {
    std::vector<Site> sites;  // cyclic; canonical rotation; orientation order
    Color color = Color::yellow;
    int orientation = 1;      // +1 CCW iff blue on the inner boundary
};

// Throws FppError unless the circuit satisfies its invariants under `source`:
// nonempty, sites distinct, cyclically adjacent, uniformly colored, winding
// number around 0 equal to `orientation`, canonical rotation.
void validate_circuit(const Circuit& c, const ConfigSource& source);

// Sites strictly enclosed by the circuit (flood from 0 bounded by its sites).
std::vector<Site> strict_interior(const Circuit& c);

// Outermost / innermost circuit of `color` surrounding 0 with all sites in
// constraint ∩ domain; nullopt when no such circuit exists.  `domain` must be
// finite, simply connected as a hexagon union, and contain 0; `constraint`
// must not contain 0.
std::optional<Circuit> outermost_circuit(const ConfigSource& source,
                                         std::span<const Site> domain, Color color,
                                         std::span<const Site> constraint);
std::optional<Circuit> innermost_circuit(const ConfigSource& source,
                                         std::span<const Site> domain, Color color,
                                         std::span<const Site> constraint);

struct CircuitCount {
    int count = 0;
    std::vector<Circuit> circuits;  // outer to inner, strictly nested
};

// rho(r, R): maximal number of disjoint yellow circuits surrounding 0 with
// sites in A(r,R), by iterated outermost peeling (D0 = B(R), then the strict
// interior each round).  Greedy peeling is provably maximal; the exhaustive
// test enforces it against a family-search oracle.
CircuitCount rho(const ConfigSource& source, double r, double R);

// N(r, R): alternating peel (yellow outermost, then blue strictly inside it,
// then yellow, ...); requires every site of ΔB(0,R) blue under `source`.
CircuitCount loop_count_N(const ConfigSource& source, double r, double R);

// The color switch f_n (n = rho(r,R)): peel yellow circuits C_1..C_n with
// strict interiors D_1..D_n, then flip colors in D_1\D_2, D_3\D_4, ... —
// ending with D_n alone when n is odd, D_{n-1}\D_n when n is even.  Input
// colors are read over B(R) ∪ ΔB(R) (the boundary ring must be blue) and the
// result is a Stored source over exactly those sites.  f_0 is the identity.
ConfigSource color_switch(const ConfigSource& source, double r, double R);

// Inverse construction: peel the image's alternating circuits and flip the
// same parity pattern of interior differences.
ConfigSource color_switch_inverse(const ConfigSource& source, double r, double R);

enum class SxMode { exact, greedy };

struct SxResult {
    int count = 0;
    bool exact = false;  // greedy mode reports a lower bound
};

// s_x: maximal number of disjoint yellow circuits surrounding 0 that touch
// ∂B(0, 2^x) (see above).  Candidates live in the yellow clusters meeting the
// incidence shell.  Exact mode enumerates every cycle family within those
// clusters and throws RegionTooLarge past 20 candidate sites.  Greedy mode
// still searches small clusters exhaustively but handles larger ones by
// peeling the nesting chain of yellow circuits inside the window B(0, 2^{x+2})
// and counting the touching links; that can miss a touching circuit hidden
// behind a non-touching hull of the same cluster, so the result is flagged as
// a lower bound.
SxResult s_x(const ConfigSource& source, int x, SxMode mode);

struct MjResult {
    int m = 0;
    Circuit circuit;  // innermost blue circuit of A(2^m, 2^{m+1})
};

// Least k >= j such that A(2^k, 2^{k+1}) contains a blue circuit surrounding
// 0, with that annulus's innermost such circuit; SearchCapExceeded when the
// first `cap` annuli all fail.
MjResult m_and_innermost_blue(const ConfigSource& source, int j, int cap);

}  // namespace fpplab
