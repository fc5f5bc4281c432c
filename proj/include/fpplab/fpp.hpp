#pragma once
// Passage times.  A path's time is the sum of the weights (yellow = 1,
// blue = 0) of every site on it, endpoints included; T(A, B) minimizes over
// paths from A to B.  Weights are 0/1, so shortest paths come from a
// two-bucket 0-1 BFS rather than a heap Dijkstra.
//
// All searches run inside an explicit window; `window_hit` reports whether
// the frontier ever touched the window rim, i.e. whether the window could
// have truncated the search.  The ball-exit quantities (c_n) are windowed
// losslessly: any path leaving B(n) first settles a site of the external
// boundary, so the first settled site outside B(n) realizes the minimum.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fpplab/config.hpp"
#include "fpplab/lattice.hpp"

namespace fpplab {

// No path from `from` to `to` inside the window.
struct TargetUnreachable : FppError { using FppError::FppError; };

struct PassageResult {
    int time = 0;
    bool window_hit = false;
    std::size_t settled = 0;          // sites finalized before the search ended
    std::vector<Site> geodesic;       // filled only when requested; source first
};

// Origin-centered disc membership with a squared-radius prescreen; sites whose
// centers are clearly inside/outside skip the exact vertex tests.
struct discs {
    // |position| bounds within which the exact test is needed: a hexagon is
    // certainly inside at center distance <= R - 0.58 and certainly not
    // contained at center distance >= R + 0.58 (circumradius 0.5774).
    static bool in_ball(Site v, std::int64_t n2, double radius,
                        double sure_in_sq, double sure_out_sq) {
        const auto d = static_cast<double>(n2);
        if (d <= sure_in_sq) return true;
        if (d >= sure_out_sq) return false;
        return hex_in_disc(v.x, v.y, radius);
    }
    static double sure_in_sq(double radius) {
        const double m = radius - 0.58;
        return m <= 0.0 ? -1.0 : m * m;
    }
    static double sure_out_sq(double radius) {
        const double m = radius + 0.58;
        return m * m;
    }
};

// Reusable 0-1 BFS over a rectangular frame.  Buffers are allocated once and
// cleared per run; a single engine therefore serves a whole replica batch.
class PassageEngine {
  public:
    explicit PassageEngine(const Frame& frame) : frame_(frame) {
        dist_.assign(frame_.size(), kUnvisited);
        cell_.assign(frame_.size(), kCellUnknown);
    }

    const Frame& frame() const { return frame_; }

    // color_of: Site -> Color; in_window / is_target: (Site, norm2) -> bool.
    // Target satisfaction is checked when a site is settled, so the first hit
    // realizes the minimum passage time.
    template <class CF, class WF, class TF>
    PassageResult run(std::span<const Site> sources, CF&& color_of, WF&& in_window,
                      TF&& is_target, bool want_path) {
        reset(want_path);
        PassageResult res;
        cur_.clear();
        nxt_.clear();
        for (const Site v : sources) {
            if (!frame_.contains(v) || !in_window(v, norm2(v))) {
                throw InvalidSpec("source site " + to_string(v) + " outside the window");
            }
            const std::size_t i = frame_.index(v);
            const int w = weight(color_cached(i, v, color_of));
            if (w < dist_[i]) {
                dist_[i] = static_cast<std::uint8_t>(w);
                (w == 0 ? cur_ : nxt_).push_back(static_cast<std::uint32_t>(i));
            }
        }
        int d = 0;
        while (true) {
            for (std::size_t qi = 0; qi < cur_.size(); ++qi) {  // cur_ grows while iterating
                const std::uint32_t i = cur_[qi];
                if (dist_[i] != d) continue;  // stale entry
                const Site v = frame_.site(i);
                const std::int64_t n2 = norm2(v);
                res.settled += 1;
                if (is_target(v, n2)) {
                    res.time = d;
                    if (want_path) res.geodesic = backtrack(i);
                    res.window_hit = window_hit_;
                    return res;
                }
                for (int dir = 0; dir < 6; ++dir) {
                    const Site u = neighbor(v, dir);
                    if (!frame_.contains(u)) {
                        window_hit_ = true;
                        continue;
                    }
                    const std::size_t j = frame_.index(u);
                    std::uint8_t cell = cell_[j];
                    if (cell == kCellUnknown) {
                        cell = classify(u, in_window, color_of, j);
                    }
                    if (cell == kCellOutside) {
                        window_hit_ = true;
                        continue;
                    }
                    const int nd = d + (cell == kCellYellow ? 1 : 0);
                    if (nd < dist_[j]) {
                        dist_[j] = static_cast<std::uint8_t>(nd);
                        if (want_path) parent_[j] = i;
                        (nd == d ? cur_ : nxt_).push_back(j);
                    }
                }
            }
            if (nxt_.empty()) break;
            cur_.swap(nxt_);
            nxt_.clear();
            ++d;
        }
        throw TargetUnreachable("no target site reachable within the window");
    }

    // Distance label of a site from the previous run (engine-internal tools).
    int label(Site v) const {
        if (!frame_.contains(v)) return kUnvisited;
        return dist_[frame_.index(v)];
    }
    static constexpr int kUnvisited = 0xFF;

  private:
    static constexpr std::uint8_t kCellUnknown = 0;
    static constexpr std::uint8_t kCellBlue = 1;
    static constexpr std::uint8_t kCellYellow = 2;
    static constexpr std::uint8_t kCellOutside = 3;

    void reset(bool want_path) {
        std::fill(dist_.begin(), dist_.end(), static_cast<std::uint8_t>(kUnvisited));
        std::fill(cell_.begin(), cell_.end(), kCellUnknown);
        if (want_path) parent_.assign(frame_.size(), kNoParent);
        window_hit_ = false;
    }

    template <class CF>
    Color color_cached(std::size_t i, Site v, CF&& color_of) {
        if (cell_[i] == kCellUnknown) {
            cell_[i] = color_of(v) == Color::yellow ? kCellYellow : kCellBlue;
        }
        return cell_[i] == kCellYellow ? Color::yellow : Color::blue;
    }

    template <class WF, class CF>
    std::uint8_t classify(Site u, WF&& in_window, CF&& color_of, std::size_t j) {
        std::uint8_t cell;
        if (!in_window(u, norm2(u))) {
            cell = kCellOutside;
        } else {
            cell = color_of(u) == Color::yellow ? kCellYellow : kCellBlue;
        }
        cell_[j] = cell;
        return cell;
    }

    std::vector<Site> backtrack(std::uint32_t i) const {
        std::vector<Site> path;
        for (std::uint32_t j = i; j != kNoParent; j = parent_[j]) {
            path.push_back(frame_.site(j));
            if (path.size() > frame_.size()) throw FppError("geodesic backtrack cycle");
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    static constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

    Frame frame_;
    std::vector<std::uint8_t> dist_;
    std::vector<std::uint8_t> cell_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> cur_, nxt_;
    bool window_hit_ = false;
};

// ---- one-shot convenience wrappers over a ConfigSource ----------------------

// T(from, to) within `window`; throws TargetUnreachable when no to-site is
// reachable (in particular when to is disjoint from the window).
PassageResult passage_time(const ConfigSource& source, std::span<const Site> from,
                           std::span<const Site> to, const Region& window,
                           bool want_path = false);

// Time from 0 to the external boundary of B(0, n); window B(0, n + 2) (lossless).
PassageResult c_n(const ConfigSource& source, int n, bool want_path = false);

// Time from 0 to the halfplane {Re(position) >= n}; box window
// [-f n, (1+f) n] x [-f n, f n].
PassageResult b0n(const ConfigSource& source, int n, double window_factor = 3.0,
                  bool want_path = false);

// Time from 0 to nearest_site(n * u); window B(0, 3n).
PassageResult t0nu(const ConfigSource& source, int n, Vec2 u = {1.0, 0.0},
                   bool want_path = false);

// Annulus crossing time T'(r, R): paths inside A(r, R), first site on the
// external boundary of B(0, r), last site on the internal boundary of B(0, R).
PassageResult t_prime(const ConfigSource& source, double r, double R,
                      bool want_path = false);

}  // namespace fpplab
