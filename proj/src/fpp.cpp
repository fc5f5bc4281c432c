#include "fpplab/fpp.hpp"

#include <array>
#include <cmath>
#include <unordered_set>

namespace fpplab {

namespace {

// Window predicate for an arbitrary region (no prescreen; used by the generic
// entry point only, where windows are small).
struct RegionWindow {
    const Region* region;
    bool operator()(Site v, std::int64_t) const { return region->contains(v); }
};

struct BallWindow {
    double radius, in_sq, out_sq;
    explicit BallWindow(double r)
        : radius(r), in_sq(discs::sure_in_sq(r)), out_sq(discs::sure_out_sq(r)) {}
    bool operator()(Site v, std::int64_t n2) const {
        return discs::in_ball(v, n2, radius, in_sq, out_sq);
    }
};

struct AnnulusWindow {
    BallWindow outer, inner;
    AnnulusWindow(double r, double R) : outer(R), inner(r) {}
    bool operator()(Site v, std::int64_t n2) const {
        return outer(v, n2) && !inner(v, n2);
    }
};

struct ColorOf {
    const ConfigSource* source;
    Color operator()(Site v) const { return source->color_at(v); }
};

}  // namespace

PassageResult passage_time(const ConfigSource& source, std::span<const Site> from,
                           std::span<const Site> to, const Region& window,
                           bool want_path) {
    if (from.empty()) throw InvalidSpec("passage_time: empty source set");
    if (to.empty()) throw InvalidSpec("passage_time: empty target set");
    PassageEngine engine(Frame::covering(window, 1));
    std::unordered_set<Site, SiteHash> targets(to.begin(), to.end());
    auto is_target = [&targets](Site v, std::int64_t) { return targets.count(v) > 0; };
    return engine.run(from, ColorOf{&source}, RegionWindow{&window}, is_target, want_path);
}

PassageResult c_n(const ConfigSource& source, int n, bool want_path) {
    if (n < 1) throw InvalidSpec("c_n: n must be >= 1");
    const auto window = Region::ball(Site{0, 0}, n + 2.0);
    PassageEngine engine(Frame::covering(window, 1));
    const BallWindow win(n + 2.0);
    // First settled site outside B(n) lies on its external boundary and
    // realizes the minimum exit time.
    const double ball_in = discs::sure_in_sq(static_cast<double>(n));
    const double ball_out = discs::sure_out_sq(static_cast<double>(n));
    auto exited = [=](Site v, std::int64_t n2) {
        return !discs::in_ball(v, n2, static_cast<double>(n), ball_in, ball_out);
    };
    const std::array<Site, 1> origin = {Site{0, 0}};
    return engine.run(origin, ColorOf{&source}, win, exited, want_path);
}

PassageResult b0n(const ConfigSource& source, int n, double window_factor,
                  bool want_path) {
    if (n < 1) throw InvalidSpec("b0n: n must be >= 1");
    if (window_factor <= 0.0) throw InvalidSpec("b0n: window_factor must be > 0");
    const double f = window_factor;
    const auto window = Region::halfplane_window(n, f);
    PassageEngine engine(Frame::covering(window, 1));
    const double x0 = -f * n, x1 = (1.0 + f) * n, y0 = -f * n, y1 = f * n;
    auto in_box = [=](Site v, std::int64_t) {
        const Vec2 p = position(v);
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    };
    // Re(position) >= n  <=>  2x + y >= 2n, exactly in integers.
    auto in_halfplane = [n](Site v, std::int64_t) {
        return 2 * static_cast<std::int64_t>(v.x) + v.y >= 2 * static_cast<std::int64_t>(n);
    };
    const std::array<Site, 1> origin = {Site{0, 0}};
    return engine.run(origin, ColorOf{&source}, in_box, in_halfplane, want_path);
}

PassageResult t0nu(const ConfigSource& source, int n, Vec2 u, bool want_path) {
    if (n < 1) throw InvalidSpec("t0nu: n must be >= 1");
    const double len = std::sqrt(u.x * u.x + u.y * u.y);
    if (!(len > 0.0)) throw InvalidSpec("t0nu: direction must be nonzero");
    const Site goal = nearest_site({n * u.x / len, n * u.y / len});
    const auto window = Region::ball(Site{0, 0}, 3.0 * n);
    PassageEngine engine(Frame::covering(window, 1));
    const BallWindow win(3.0 * n);
    if (!win(goal, norm2(goal))) {
        throw InvalidSpec("t0nu: target " + to_string(goal) + " escapes the window");
    }
    auto is_goal = [goal](Site v, std::int64_t) { return v == goal; };
    const std::array<Site, 1> origin = {Site{0, 0}};
    return engine.run(origin, ColorOf{&source}, win, is_goal, want_path);
}

PassageResult t_prime(const ConfigSource& source, double r, double R, bool want_path) {
    if (!(r >= 1.0) || !(R > r)) {
        throw InvalidAnnulus("t_prime: need 1 <= r < R");
    }
    const auto sources = external_boundary(ball_sites(Site{0, 0}, r));
    if (sources.empty()) throw InvalidAnnulus("t_prime: empty inner boundary ring");
    const AnnulusWindow win(r, R);
    for (const Site v : sources) {
        if (!win(v, norm2(v))) {
            throw InvalidAnnulus("t_prime: annulus too thin, boundary site " +
                                 to_string(v) + " leaves A(r, R)");
        }
    }
    PassageEngine engine(Frame::covering(Region::annulus(r, R), 1));
    // Internal boundary of B(R): inside B(R) (guaranteed by the window) with a
    // neighbor outside.  Sites with |position| <= R - 1.58 cannot qualify, so
    // the six-neighbor test runs only near the rim.
    const double rim_sq = (R - 1.58) * (R - 1.58);
    const double ball_in = discs::sure_in_sq(R);
    const double ball_out = discs::sure_out_sq(R);
    auto on_rim = [=](Site v, std::int64_t n2) {
        if (static_cast<double>(n2) <= rim_sq) return false;
        for (int dir = 0; dir < 6; ++dir) {
            const Site u = neighbor(v, dir);
            if (!discs::in_ball(u, norm2(u), R, ball_in, ball_out)) return true;
        }
        return false;
    };
    return engine.run(sources, ColorOf{&source}, win, on_rim, want_path);
}

}  // namespace fpplab
