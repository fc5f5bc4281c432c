#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace oracle {

using fpplab::neighbor;
using fpplab::SiteHash;
using fpplab::weight;

std::optional<int> dijkstra_time(const ConfigSource& cfg,
                                 const std::vector<Site>& allowed,
                                 const std::vector<Site>& from,
                                 const std::function<bool(Site)>& target) {
    std::unordered_map<Site, int, SiteHash> index;
    for (std::size_t i = 0; i < allowed.size(); ++i) {
        index.emplace(allowed[i], static_cast<int>(i));
    }
    std::vector<int> dist(allowed.size(), std::numeric_limits<int>::max());
    using Entry = std::pair<int, int>;  // (dist, site index)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (const Site s : from) {
        const auto it = index.find(s);
        if (it == index.end()) continue;
        const int w = weight(cfg.color_at(s));
        if (w < dist[it->second]) {
            dist[it->second] = w;
            heap.push({w, it->second});
        }
    }
    while (!heap.empty()) {
        const auto [d, i] = heap.top();
        heap.pop();
        if (d != dist[i]) continue;
        if (target(allowed[i])) return d;
        for (int dir = 0; dir < 6; ++dir) {
            const auto it = index.find(neighbor(allowed[i], dir));
            if (it == index.end()) continue;
            const int nd = d + weight(cfg.color_at(allowed[it->second]));
            if (nd < dist[it->second]) {
                dist[it->second] = nd;
                heap.push({nd, it->second});
            }
        }
    }
    return std::nullopt;
}

namespace {

// Signed crossings of the horizontal level q.y + 1/2 (in row units) by the
// directed edge a->b, counted only to the right of q.  Doubling the x scale
// keeps everything integral: the real part of a site's position is (2x + y)/2.
int edge_crossing(Site a, Site b, Site q) {
    if (a.y == b.y) return 0;
    const int lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
    if (!(lo <= q.y && q.y < hi)) return 0;
    const std::int64_t xa = 2LL * a.x + a.y, xb = 2LL * b.x + b.y;
    const std::int64_t xq = 2LL * q.x + q.y;
    if (xa + xb <= 2 * xq) return 0;  // parity differs, equality impossible
    return b.y > a.y ? 1 : -1;
}

}  // namespace

int winding_number(const std::vector<Site>& cycle, Site q) {
    int w = 0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        w += edge_crossing(cycle[i], cycle[(i + 1) % cycle.size()], q);
    }
    return w;
}

std::vector<std::vector<Site>> surrounding_cycles(const std::vector<Site>& allowed,
                                                  Site q) {
    std::unordered_map<Site, int, SiteHash> index;
    for (std::size_t i = 0; i < allowed.size(); ++i) {
        index.emplace(allowed[i], static_cast<int>(i));
    }
    const int n = static_cast<int>(allowed.size());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int dir = 0; dir < 6; ++dir) {
            const auto it = index.find(neighbor(allowed[i], dir));
            if (it != index.end()) adj[i].push_back(it->second);
        }
    }
    std::set<std::vector<Site>> found;
    std::vector<int> path;
    std::vector<char> on_path(n, 0);
    // Enumerate each simple cycle once: the start is its minimal index, and
    // the orientation is fixed by path[1] < path.back() at closing time.
    auto dfs = [&](auto&& self, int start, int v) -> void {
        for (const int u : adj[v]) {
            if (u == start && path.size() >= 3) {
                if (path[1] < path.back()) {
                    std::vector<Site> cyc;
                    cyc.reserve(path.size());
                    for (const int i : path) cyc.push_back(allowed[i]);
                    const int w = winding_number(cyc, q);
                    if (w == 1 || w == -1) {
                        std::sort(cyc.begin(), cyc.end());
                        found.insert(std::move(cyc));
                    }
                }
                continue;
            }
            if (u <= start || on_path[u]) continue;
            on_path[u] = 1;
            path.push_back(u);
            self(self, start, u);
            path.pop_back();
            on_path[u] = 0;
        }
    };
    for (int s = 0; s < n; ++s) {
        path = {s};
        std::fill(on_path.begin(), on_path.end(), 0);
        on_path[s] = 1;
        dfs(dfs, s, s);
    }
    return {found.begin(), found.end()};
}

std::vector<Site> enclosed_sites(const std::vector<Site>& cycle,
                                 const std::vector<Site>& candidates) {
    const std::set<Site> on_cycle(cycle.begin(), cycle.end());
    std::vector<Site> inside;
    for (const Site v : candidates) {
        if (on_cycle.count(v)) continue;
        if (winding_number(cycle, v) != 0) inside.push_back(v);
    }
    return inside;
}

namespace {

void pack(const std::vector<std::uint64_t>& masks, std::size_t from,
          std::uint64_t used, int depth, int* best) {
    *best = std::max(*best, depth);
    for (std::size_t i = from; i < masks.size(); ++i) {
        if ((masks[i] & used) == 0) {
            pack(masks, i + 1, used | masks[i], depth + 1, best);
        }
    }
}

}  // namespace

int max_disjoint_count(const std::vector<std::vector<Site>>& sets) {
    std::unordered_map<Site, int, SiteHash> index;
    for (const auto& s : sets) {
        for (const Site v : s) index.emplace(v, static_cast<int>(index.size()));
    }
    if (index.size() > 64) throw std::runtime_error("max_disjoint_count: too many sites");
    std::vector<std::uint64_t> masks;
    masks.reserve(sets.size());
    for (const auto& s : sets) {
        std::uint64_t m = 0;
        for (const Site v : s) m |= 1ULL << index.at(v);
        masks.push_back(m);
    }
    std::sort(masks.begin(), masks.end(), [](std::uint64_t a, std::uint64_t b) {
        return std::popcount(a) < std::popcount(b);
    });
    int best = 0;
    pack(masks, 0, 0, 0, &best);
    return best;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b,
             double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adapt(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adapt(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, m, fm), tol, 50);
}

}  // namespace oracle
