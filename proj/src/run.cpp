#include "fpplab/run.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"

#include "fpplab/circuits.hpp"
#include "fpplab/cle.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/shape.hpp"
#include "fpplab/stats.hpp"

namespace fpplab {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---- replica pool -----------------------------------------------------------

// Runs fn(rep, seed_rep) for rep = 0..reps-1 on `threads` workers.  Results
// land in slots indexed by rep, so the later reduction cannot depend on
// scheduling.  FppError marks the slot failed; any other exception is
// re-thrown (first one wins) after the pool joins.
template <class T, class Fn>
void replicate_slots(std::vector<T>& slots, std::vector<char>& ok, long long reps,
                     std::uint64_t master, int threads, Fn&& fn) {
    slots.assign(static_cast<std::size_t>(reps), T{});
    ok.assign(static_cast<std::size_t>(reps), 0);
    std::atomic<long long> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto work = [&] {
        while (true) {
            const long long r = next.fetch_add(1, std::memory_order_relaxed);
            if (r >= reps) return;
            const auto i = static_cast<std::size_t>(r);
            try {
                slots[i] = fn(r, derive_seed(master, static_cast<std::uint64_t>(r)));
                ok[i] = 1;
            } catch (const FppError&) {
                // domain gap: counted, excluded from the reduction
            } catch (...) {
                const std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
}

template <class Fn>
std::vector<double> replicate(long long reps, std::uint64_t master, int threads,
                              long long& failed, Fn&& fn) {
    std::vector<double> slots;
    std::vector<char> ok;
    replicate_slots(slots, ok, reps, master, threads, std::forward<Fn>(fn));
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!ok[i]) {
            slots[i] = kNan;
            ++failed;
        }
    }
    return slots;
}

// Chunked parallel loop for exhaustive sweeps; per-worker states are merged
// by the caller (all merges here are exact integer folds, so worker order
// does not matter).
template <class State, class Fn>
void for_each_index(std::uint64_t total, int threads, std::vector<State>& states,
                    Fn&& body) {
    constexpr std::uint64_t kChunk = 256;
    states.resize(static_cast<std::size_t>(std::max(threads, 1)));
    std::atomic<std::uint64_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto work = [&](State& state) {
        while (true) {
            const std::uint64_t lo = next.fetch_add(kChunk, std::memory_order_relaxed);
            if (lo >= total) return;
            const std::uint64_t hi = std::min(total, lo + kChunk);
            try {
                for (std::uint64_t i = lo; i < hi; ++i) body(state, i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        work(states[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(states.size());
        for (auto& s : states) pool.emplace_back([&work, &s] { work(s); });
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
}

// ---- reductions -------------------------------------------------------------

ReportRow row_from(std::string quantity, long long n, const std::vector<double>& vals) {
    MomentAccumulator acc;
    for (const double v : vals) {
        if (!std::isnan(v)) acc.push(v);
    }
    ReportRow row;
    row.quantity = std::move(quantity);
    row.n = n;
    row.reps = acc.n;
    if (acc.n >= 2) {
        const MomentSummary s = finalize(acc);
        row.mean = s.mean;
        row.var = s.variance;
        row.std_err = s.std_error;
    } else {
        row.mean = acc.n == 1 ? acc.mean : kNan;
        row.var = kNan;
        row.std_err = kNan;
    }
    return row;
}

// Empirical tail curve P[V >= t] of integer-valued outcomes, one row per t
// from 0 up to the largest observed value.
void append_tail_rows(std::vector<ReportRow>& rows, const std::string& quantity,
                      const std::vector<double>& vals) {
    std::vector<long long> kept;
    for (const double v : vals) {
        if (!std::isnan(v)) kept.push_back(std::llround(v));
    }
    if (kept.empty()) return;
    const long long top = *std::max_element(kept.begin(), kept.end());
    const auto total = static_cast<double>(kept.size());
    for (long long t = 0; t <= top; ++t) {
        long long ge = 0;
        for (const long long v : kept) ge += v >= t ? 1 : 0;
        const double p = static_cast<double>(ge) / total;
        ReportRow row;
        row.quantity = quantity;
        row.n = t;
        row.reps = kept.size();
        row.mean = p;
        row.var = p * (1.0 - p);
        row.std_err = std::sqrt(row.var / total);
        rows.push_back(std::move(row));
    }
}

// ---- shared pieces ----------------------------------------------------------

std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

// Adaptive Simpson on doubling panels; a single adaptive call over the whole
// range misses mass that exp(lambda x) squeezes into a corner.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double density_quadrature(double lambda, double hi) {
    const auto g = [lambda](double x) {
        return x > 0.0 ? std::exp(lambda * x) * b_density(x) : 0.0;
    };
    double total = 0.0, a = 0.0;
    for (double b = 1.0; a < hi; b = std::min(2.0 * b, hi)) {
        total += adaptive_simpson(g, a, b, g(a), g(0.5 * (a + b)), g(b), 1e-11, 40);
        a = b;
    }
    return total;
}

// ---- spec validation --------------------------------------------------------

void require(bool cond, const std::string& message) {
    if (!cond) throw InvalidSpec(message);
}

bool is_one_of(const std::string& s, std::initializer_list<const char*> options) {
    for (const char* o : options) {
        if (s == o) return true;
    }
    return false;
}

// Fills defaults and validates; the result is echoed in the manifest so a
// bundle always records the exact spec that ran.
ExperimentSpec normalize(const ExperimentSpec& spec) {
    ExperimentSpec s = spec;
    require(s.threads >= 1 && s.threads <= 1024, "threads: must be in [1, 1024]");
    require(s.format == "csv" || s.format == "json", "format: must be csv or json");
    require(is_one_of(s.command, {"verify", "estimate", "cle", "tails", "shape"}),
            "command: unknown '" + s.command + "'");

    if (s.command == "verify") {
        require(is_one_of(s.target, {"prop-equality", "bijection", "shape-identity"}),
                "target: verify expects prop-equality, bijection, or shape-identity");
        if (s.target == "shape-identity") {
            if (s.n_values.empty()) s.n_values = {1, 2};
            for (const long long n : s.n_values) {
                require(n >= 1, "n: wet-region budgets must be >= 1");
            }
            if (s.R <= 0.0) s.R = 256.0;
            if (s.reps <= 0) s.reps = 1000;
        } else {
            require(s.r >= 1.0, "r: inner radius must be >= 1");
            require(s.R > s.r, "R: outer radius must exceed r");
            if (!s.exhaustive) require(s.reps >= 1, "reps: sampled verification needs >= 1");
        }
    } else if (s.command == "estimate") {
        require(is_one_of(s.target, {"cn", "b0n", "t0nu", "tprime"}),
                "quantity: expected cn, b0n, t0nu, or tprime");
        require(s.reps >= 2, "reps: estimation needs >= 2 replicas");
        if (s.target == "tprime") {
            if (s.n_values.empty()) {
                require(s.r >= 1.0 && s.R > s.r,
                        "r/R: tprime needs --n (dyadic rho list) or explicit radii");
            } else {
                for (const long long n : s.n_values) {
                    require(n >= 1, "n: tprime inner radii must be >= 1");
                }
            }
        } else {
            require(!s.n_values.empty(), "n: estimate needs at least one value");
            for (const long long n : s.n_values) {
                require(n >= 1, "n: must be >= 1");
            }
        }
        if (s.target == "b0n") {
            require(s.window_factor >= 1.0, "window-factor: must be >= 1");
        }
    } else if (s.command == "cle") {
        require(is_one_of(s.target, {"mgf", "density-check", "renewal", "constants"}),
                "target: cle expects mgf, density-check, renewal, or constants");
        if (s.target == "renewal") {
            if (s.n_values.empty()) s.n_values = {10000};
            for (const long long t : s.n_values) {
                require(t >= 1, "n: renewal horizons must be >= 1");
            }
            require(s.reps >= 2, "reps: renewal estimation needs >= 2 replicas");
        }
    } else if (s.command == "tails") {
        require(is_one_of(s.target, {"sx", "mj", "tprime"}),
                "stat: tails expects sx, mj, or tprime");
        require(s.reps >= 1, "reps: tails need >= 1 replica");
        if (s.target == "sx") {
            if (s.n_values.empty()) s.n_values = {3, 5};
            for (const long long x : s.n_values) {
                require(x >= 1 && x <= 8, "n: sx scales must be in [1, 8]");
            }
        } else if (s.target == "mj") {
            if (s.n_values.empty()) s.n_values = {3, 5};
            for (const long long j : s.n_values) {
                require(j >= 1 && j <= 8, "n: mj start scales must be in [1, 8]");
            }
        } else {
            if (s.n_values.empty()) {
                require(s.r >= 1.0 && s.R > s.r,
                        "r/R: tprime tail needs --n or explicit radii");
            } else {
                for (const long long n : s.n_values) {
                    require(n >= 1, "n: tprime inner radii must be >= 1");
                }
            }
        }
    } else {  // shape
        require(s.target.empty(), "target: shape takes no subcommand");
        if (s.n_values.empty()) s.n_values = {1};
        for (const long long n : s.n_values) {
            require(n >= 1, "n: wet-region budgets must be >= 1");
        }
        require(s.reps >= 1, "reps: shape needs >= 1 replica");
    }
    return s;
}

// ---- commands ---------------------------------------------------------------

void run_estimate(const ExperimentSpec& s, ExperimentReport& rep) {
    const auto value_of = [&s](long long n) {
        return [&s, n](long long, std::uint64_t seed) -> double {
            const ConfigSource cfg = ConfigSource::hashed(seed);
            if (s.target == "cn") return c_n(cfg, static_cast<int>(n)).time;
            if (s.target == "b0n") {
                return b0n(cfg, static_cast<int>(n), s.window_factor).time;
            }
            return t0nu(cfg, static_cast<int>(n)).time;
        };
    };
    if (s.target == "tprime") {
        // convention: each n is a dyadic inner radius, annulus A(n, 2n), with
        // the all-blue boundary ring at the outer radius
        std::vector<std::pair<double, double>> annuli;
        if (s.n_values.empty()) {
            annuli.emplace_back(s.r, s.R);
        } else {
            for (const long long n : s.n_values) {
                annuli.emplace_back(static_cast<double>(n), 2.0 * static_cast<double>(n));
            }
        }
        for (const auto& [r, R] : annuli) {
            // the ring site list is shared read-only across replicas
            const std::vector<Site> ring = external_boundary(ball_sites(Site{0, 0}, R));
            const std::vector<double> vals = replicate(
                s.reps, s.seed, s.threads, rep.manifest.replicas_failed,
                [&](long long, std::uint64_t seed) -> double {
                    const ConfigSource cfg =
                        ConfigSource::hashed(seed).with_overrides(ring, Color::blue);
                    return t_prime(cfg, r, R).time;
                });
            rep.manifest.replicas_total += s.reps;
            rep.rows.push_back(row_from("tprime", std::llround(r), vals));
        }
        return;
    }
    for (const long long n : s.n_values) {
        const std::vector<double> vals = replicate(
            s.reps, s.seed, s.threads, rep.manifest.replicas_failed, value_of(n));
        rep.manifest.replicas_total += s.reps;
        rep.rows.push_back(row_from(s.target, n, vals));
    }
}

void run_cle(const ExperimentSpec& s, ExperimentReport& rep) {
    const std::array<double, 4> lambdas{-5.0, -1.0, 0.0, 0.05};
    if (s.target == "constants") {
        const LimitConstants c = limit_constants();
        const std::pair<const char*, double> entries[] = {
            {"mu_half", c.mu_half},   {"mu_point", c.mu_point},
            {"var_half", c.var_half}, {"var_point", c.var_point},
            {"mean_B", c.mean_B},     {"var_B", c.var_B},
        };
        for (const auto& [name, value] : entries) {
            ReportRow row;
            row.quantity = name;
            row.mean = value;
            rep.rows.push_back(std::move(row));
        }
        return;
    }
    if (s.target == "mgf") {
        for (const double lam : lambdas) {
            ReportRow row;
            row.quantity = "mgf_at_" + format_double(lam);
            row.mean = mgf(lam);
            rep.rows.push_back(std::move(row));
        }
        return;
    }
    if (s.target == "density-check") {
        const double mass = density_quadrature(0.0, 400.0);
        ReportRow mass_row;
        mass_row.quantity = "density_mass";
        mass_row.mean = mass;
        rep.rows.push_back(std::move(mass_row));
        if (std::abs(mass - 1.0) > 1e-6) {
            rep.checks_failed += 1;
            rep.notes.push_back("density mass off by " + format_double(mass - 1.0));
        }
        for (const double lam : lambdas) {
            const double hi = lam > 0.0 ? 700.0 : 400.0;
            const double gap = std::abs(density_quadrature(lam, hi) - mgf(lam));
            ReportRow row;
            row.quantity = "density_mgf_gap_at_" + format_double(lam);
            row.mean = gap;
            rep.rows.push_back(std::move(row));
            if (gap > 1e-5) {
                rep.checks_failed += 1;
                rep.notes.push_back("density-vs-mgf gap " + format_double(gap) +
                                    " at lambda = " + format_double(lam));
            }
        }
        if (rep.checks_failed == 0) {
            rep.notes.push_back(
                "density integrates to 1 within 1e-6 and matches the closed-form "
                "mgf within 1e-5 at all probe points");
        }
        return;
    }
    // renewal: one increment stream per replica, read at every horizon
    for (const long long t : s.n_values) {
        const std::vector<double> vals = replicate(
            s.reps, s.seed, s.threads, rep.manifest.replicas_failed,
            [t](long long, std::uint64_t seed) -> double {
                SplitMix64 rng(seed);
                return renewal_count(static_cast<double>(t), rng).count;
            });
        rep.manifest.replicas_total += s.reps;
        rep.rows.push_back(row_from("renewal_count", t, vals));
    }
}

void run_tails(const ExperimentSpec& s, ExperimentReport& rep) {
    if (s.target == "sx") {
        for (const long long x : s.n_values) {
            const std::vector<double> vals = replicate(
                s.reps, s.seed, s.threads, rep.manifest.replicas_failed,
                [x](long long, std::uint64_t seed) -> double {
                    return s_x(ConfigSource::hashed(seed), static_cast<int>(x),
                               SxMode::greedy)
                        .count;
                });
            rep.manifest.replicas_total += s.reps;
            append_tail_rows(rep.rows, "sx" + std::to_string(x) + "_tail", vals);
        }
        return;
    }
    if (s.target == "mj") {
        for (const long long j : s.n_values) {
            const int cap = static_cast<int>(j) + 6;
            const std::vector<double> vals = replicate(
                s.reps, s.seed, s.threads, rep.manifest.replicas_failed,
                [j, cap](long long, std::uint64_t seed) -> double {
                    return m_and_innermost_blue(ConfigSource::hashed(seed),
                                                static_cast<int>(j), cap)
                               .m -
                           j;
                });
            rep.manifest.replicas_total += s.reps;
            append_tail_rows(rep.rows, "mj" + std::to_string(j) + "_tail", vals);
        }
        return;
    }
    std::vector<std::pair<double, double>> annuli;
    if (s.n_values.empty()) {
        annuli.emplace_back(s.r, s.R);
    } else {
        for (const long long n : s.n_values) {
            annuli.emplace_back(static_cast<double>(n), 2.0 * static_cast<double>(n));
        }
    }
    for (const auto& [r, R] : annuli) {
        const std::vector<Site> ring = external_boundary(ball_sites(Site{0, 0}, R));
        const std::vector<double> vals = replicate(
            s.reps, s.seed, s.threads, rep.manifest.replicas_failed,
            [&](long long, std::uint64_t seed) -> double {
                const ConfigSource cfg =
                    ConfigSource::hashed(seed).with_overrides(ring, Color::blue);
                return t_prime(cfg, r, R).time;
            });
        rep.manifest.replicas_total += s.reps;
        append_tail_rows(rep.rows,
                         "tprime_tail_r" + std::to_string(std::llround(r)), vals);
    }
}

void run_shape(const ExperimentSpec& s, ExperimentReport& rep) {
    for (const long long n : s.n_values) {
        const double radius =
            s.R > 0.0 ? s.R : 4.0 * std::exp(kSqrt3 * 3.14159265358979324 *
                                             static_cast<double>(n));
        const Region window = Region::ball(Site{0, 0}, radius);
        std::vector<std::array<double, 3>> slots;
        std::vector<char> ok;
        replicate_slots(slots, ok, s.reps, s.seed, s.threads,
                        [n, &window](long long, std::uint64_t seed) {
                            const WetRegion wr = w_set(ConfigSource::hashed(seed),
                                                       static_cast<int>(n), window);
                            const ShapeSample sample = boundary_and_radii(wr.w_filled);
                            return std::array<double, 3>{
                                sample.r_in, sample.r_out,
                                std::log(sample.r_out / sample.r_in)};
                        });
        std::array<std::vector<double>, 3> series;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!ok[i]) {
                rep.manifest.replicas_failed += 1;
                continue;
            }
            for (std::size_t k = 0; k < 3; ++k) series[k].push_back(slots[i][k]);
        }
        rep.manifest.replicas_total += s.reps;
        rep.rows.push_back(row_from("shape_r_in", n, series[0]));
        rep.rows.push_back(row_from("shape_r_out", n, series[1]));
        rep.rows.push_back(row_from("shape_log_ratio", n, series[2]));
    }
}

// Shared sweep for the two exhaustive/sampled annulus verifications.  The
// boundary ring at R is forced blue in every configuration: loop counts and
// the switching map are defined under that condition, and the identity and
// histogram statements are invariant to it.
struct AnnulusSweep {
    std::vector<Site> ring;  // the all-blue boundary ring at R
    std::uint64_t total = 0;
    bool exhaustive = false;
    std::uint64_t master = 0;
    // enumerates the annulus colorings in exhaustive mode, absent otherwise
    std::optional<RegionEnumeration> en;

    ConfigSource config_at(std::uint64_t i) const {
        if (exhaustive) return en->at(i);
        return ConfigSource::hashed(derive_seed(master, i))
            .with_overrides(ring, Color::blue);
    }
};

AnnulusSweep make_sweep(const ExperimentSpec& s) {
    AnnulusSweep sw;
    sw.ring = external_boundary(ball_sites(Site{0, 0}, s.R));
    sw.exhaustive = s.exhaustive;
    sw.master = s.seed;
    if (s.exhaustive) {
        const std::vector<Site> annulus = Region::annulus(s.r, s.R).sites();
        require(annulus.size() <= static_cast<std::size_t>(kEnumerationCap),
                "R: annulus too large to enumerate exhaustively");
        sw.total = std::uint64_t{1} << annulus.size();
        sw.en.emplace(ConfigSource::constant(Color::yellow).with_overrides(sw.ring,
                                                                           Color::blue),
                      annulus);
    } else {
        sw.total = static_cast<std::uint64_t>(s.reps);
    }
    return sw;
}

void append_hist_rows(std::vector<ReportRow>& rows, const std::string& quantity,
                      const Histogram& hist) {
    const auto total = static_cast<double>(hist.total());
    for (const auto& [value, count] : hist.counts) {
        ReportRow row;
        row.quantity = quantity;
        row.n = value;
        row.reps = hist.total();
        row.mean = static_cast<double>(count) / total;
        row.var = row.mean * (1.0 - row.mean);
        row.std_err = std::sqrt(row.var / total);
        rows.push_back(std::move(row));
    }
}

void run_verify_prop(const ExperimentSpec& s, ExperimentReport& rep) {
    const AnnulusSweep sw = make_sweep(s);

    struct State {
        Histogram t_hist, n_hist;
        std::uint64_t mismatches = 0;
    };
    std::atomic<std::uint64_t> first_bad{std::numeric_limits<std::uint64_t>::max()};
    std::vector<State> states;
    for_each_index(sw.total, s.threads, states, [&](State& st, std::uint64_t i) {
        const ConfigSource cfg = sw.config_at(i);
        const int crossing = t_prime(cfg, s.r, s.R).time;
        const int circuits = rho(cfg, s.r, s.R).count;
        const int loops = loop_count_N(cfg, s.r, s.R).count;
        st.t_hist.push(crossing);
        st.n_hist.push(loops);
        if (crossing != circuits) {
            st.mismatches += 1;
            std::uint64_t seen = first_bad.load();
            while (i < seen && !first_bad.compare_exchange_weak(seen, i)) {
            }
        }
    });
    Histogram t_hist, n_hist;
    std::uint64_t mismatches = 0;
    for (const State& st : states) {
        t_hist.merge(st.t_hist);
        n_hist.merge(st.n_hist);
        mismatches += st.mismatches;
    }
    rep.manifest.replicas_total += static_cast<long long>(sw.total);

    const std::string kind = sw.exhaustive ? "configurations" : "sampled configurations";
    if (mismatches == 0) {
        rep.notes.push_back(std::to_string(sw.total) + "/" + std::to_string(sw.total) +
                            " " + kind + ": T' = rho");
    } else {
        rep.checks_failed += static_cast<long long>(mismatches);
        rep.notes.push_back(std::to_string(sw.total - mismatches) + "/" +
                            std::to_string(sw.total) + " " + kind +
                            ": T' = rho; first mismatch at enumeration index " +
                            std::to_string(first_bad.load()));
    }
    if (t_hist.counts == n_hist.counts) {
        rep.notes.push_back("T' and N histograms agree value-by-value (" +
                            std::to_string(t_hist.counts.size()) + " distinct values)");
    } else {
        rep.checks_failed += 1;
        rep.notes.push_back("T' and N histograms differ");
    }
    append_hist_rows(rep.rows, "tprime_hist", t_hist);
    append_hist_rows(rep.rows, "loop_hist", n_hist);
}

void run_verify_bijection(const ExperimentSpec& s, ExperimentReport& rep) {
    const AnnulusSweep sw = make_sweep(s);
    // the switch is the identity outside B(R) and its boundary ring, so the
    // round trip is compared on exactly that footprint
    std::vector<Site> domain = ball_sites(Site{0, 0}, s.R);
    domain.insert(domain.end(), sw.ring.begin(), sw.ring.end());

    struct State {
        Histogram rho_hist, n_hist;
        std::uint64_t image_bad = 0, roundtrip_bad = 0;
    };
    std::vector<State> states;
    for_each_index(sw.total, s.threads, states, [&](State& st, std::uint64_t i) {
        const ConfigSource cfg = sw.config_at(i);
        const int circuits = rho(cfg, s.r, s.R).count;
        st.rho_hist.push(circuits);
        st.n_hist.push(loop_count_N(cfg, s.r, s.R).count);

        const ConfigSource image = color_switch(cfg, s.r, s.R);
        if (loop_count_N(image, s.r, s.R).count != circuits) st.image_bad += 1;
        const ConfigSource back = color_switch_inverse(image, s.r, s.R);
        for (const Site v : domain) {
            if (back.color_at(v) != cfg.color_at(v)) {
                st.roundtrip_bad += 1;
                break;
            }
        }
    });
    Histogram rho_hist, n_hist;
    std::uint64_t image_bad = 0, roundtrip_bad = 0;
    for (const State& st : states) {
        rho_hist.merge(st.rho_hist);
        n_hist.merge(st.n_hist);
        image_bad += st.image_bad;
        roundtrip_bad += st.roundtrip_bad;
    }
    rep.manifest.replicas_total += static_cast<long long>(sw.total);
    rep.checks_failed += static_cast<long long>(image_bad + roundtrip_bad);

    rep.notes.push_back(std::to_string(sw.total - image_bad) + "/" +
                        std::to_string(sw.total) +
                        " configurations: color switch lands in {N = rho}");
    rep.notes.push_back(std::to_string(sw.total - roundtrip_bad) + "/" +
                        std::to_string(sw.total) +
                        " configurations: inverse switch restores the coloring");
    if (rho_hist.counts == n_hist.counts) {
        rep.notes.push_back("|{rho = n}| = |{N = n}| for every n");
    } else {
        rep.checks_failed += 1;
        rep.notes.push_back("level-set cardinalities differ between rho and N");
    }
    append_hist_rows(rep.rows, "rho_hist", rho_hist);
    append_hist_rows(rep.rows, "loop_hist", n_hist);
}

void run_verify_shape(const ExperimentSpec& s, ExperimentReport& rep) {
    const Region window = Region::ball(Site{0, 0}, s.R);
    long long matched = 0, mismatched = 0, undefined = 0;
    for (const long long n : s.n_values) {
        struct Counts {
            long long match = 0, mismatch = 0, skip = 0;
        };
        std::vector<Counts> states;
        for_each_index(static_cast<std::uint64_t>(s.reps), s.threads, states,
                       [&](Counts& st, std::uint64_t i) {
                           const ConfigSource cfg =
                               ConfigSource::hashed(derive_seed(s.seed, i));
                           try {
                               if (nth_circuit_boundary(cfg, static_cast<int>(n), window)
                                       .match) {
                                   st.match += 1;
                               } else {
                                   st.mismatch += 1;
                               }
                           } catch (const CircuitNotFound&) {
                               st.skip += 1;
                           } catch (const WindowOverflow&) {
                               st.skip += 1;
                           }
                       });
        for (const Counts& st : states) {
            matched += st.match;
            mismatched += st.mismatch;
            undefined += st.skip;
        }
        rep.manifest.replicas_total += s.reps;
    }
    rep.manifest.replicas_failed += undefined;
    rep.checks_failed += mismatched;
    rep.notes.push_back(std::to_string(matched) + "/" + std::to_string(matched + mismatched) +
                        " defined window-budget pairs: wet boundary = circuit-chain boundary (" +
                        std::to_string(undefined) + " undefined at this window)");
}

}  // namespace

ExperimentReport run(const ExperimentSpec& spec) {
    const ExperimentSpec s = normalize(spec);
    ExperimentReport rep;
    rep.manifest.artifact_version = kArtifactVersion;
    rep.manifest.spec = s;
    rep.manifest.master_seed = s.seed;
    rep.manifest.seed_rule = kSeedRule;

    const auto t0 = std::chrono::steady_clock::now();
    if (s.command == "estimate") {
        run_estimate(s, rep);
    } else if (s.command == "cle") {
        run_cle(s, rep);
    } else if (s.command == "tails") {
        run_tails(s, rep);
    } else if (s.command == "shape") {
        run_shape(s, rep);
    } else if (s.target == "prop-equality") {
        run_verify_prop(s, rep);
    } else if (s.target == "bijection") {
        run_verify_bijection(s, rep);
    } else {
        run_verify_shape(s, rep);
    }
    const auto t1 = std::chrono::steady_clock::now();
    rep.manifest.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return rep;
}

std::string to_csv(const ExperimentReport& report) {
    std::string out = "quantity,n,reps,mean,var,stderr,master_seed\n";
    for (const ReportRow& row : report.rows) {
        out += row.quantity;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.reps);
        out += ',';
        out += format_double(row.mean);
        out += ',';
        out += format_double(row.var);
        out += ',';
        out += format_double(row.std_err);
        out += ',';
        out += std::to_string(report.manifest.master_seed);
        out += '\n';
    }
    return out;
}

std::string to_json_text(const ExperimentReport& report) {
    nlohmann::json j;
    const ExperimentSpec& s = report.manifest.spec;
    j["manifest"] = {
        {"artifact_version", report.manifest.artifact_version},
        {"master_seed", report.manifest.master_seed},
        {"seed_rule", report.manifest.seed_rule},
        {"wall_seconds", report.manifest.wall_seconds},
        {"replicas_total", report.manifest.replicas_total},
        {"replicas_failed", report.manifest.replicas_failed},
        {"spec",
         {
             {"command", s.command},
             {"target", s.target},
             {"n_values", s.n_values},
             {"r", s.r},
             {"R", s.R},
             {"reps", s.reps},
             {"seed", s.seed},
             {"threads", s.threads},
             {"window_factor", s.window_factor},
             {"exhaustive", s.exhaustive},
             {"output_path", s.output_path},
             {"format", s.format},
         }},
    };
    j["rows"] = nlohmann::json::array();
    for (const ReportRow& row : report.rows) {
        j["rows"].push_back({
            {"quantity", row.quantity},
            {"n", row.n},
            {"reps", row.reps},
            {"mean", row.mean},
            {"var", row.var},
            {"stderr", row.std_err},
            {"master_seed", report.manifest.master_seed},
        });
    }
    j["notes"] = report.notes;
    j["checks_failed"] = report.checks_failed;
    return j.dump(2) + "\n";
}

ExperimentReport report_from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentReport rep;
    const nlohmann::json& m = j.at("manifest");
    rep.manifest.artifact_version = m.at("artifact_version").get<std::string>();
    rep.manifest.master_seed = m.at("master_seed").get<std::uint64_t>();
    rep.manifest.seed_rule = m.at("seed_rule").get<std::string>();
    rep.manifest.wall_seconds = m.at("wall_seconds").get<double>();
    rep.manifest.replicas_total = m.at("replicas_total").get<long long>();
    rep.manifest.replicas_failed = m.at("replicas_failed").get<long long>();
    const nlohmann::json& sp = m.at("spec");
    ExperimentSpec& s = rep.manifest.spec;
    s.command = sp.at("command").get<std::string>();
    s.target = sp.at("target").get<std::string>();
    s.n_values = sp.at("n_values").get<std::vector<long long>>();
    s.r = sp.at("r").get<double>();
    s.R = sp.at("R").get<double>();
    s.reps = sp.at("reps").get<long long>();
    s.seed = sp.at("seed").get<std::uint64_t>();
    s.threads = sp.at("threads").get<int>();
    s.window_factor = sp.at("window_factor").get<double>();
    s.exhaustive = sp.at("exhaustive").get<bool>();
    s.output_path = sp.at("output_path").get<std::string>();
    s.format = sp.at("format").get<std::string>();
    for (const nlohmann::json& rj : j.at("rows")) {
        ReportRow row;
        row.quantity = rj.at("quantity").get<std::string>();
        row.n = rj.at("n").get<long long>();
        row.reps = rj.at("reps").get<long long>();
        row.mean = rj.at("mean").get<double>();
        row.var = rj.at("var").get<double>();
        row.std_err = rj.at("stderr").get<double>();
        rep.rows.push_back(std::move(row));
    }
    rep.notes = j.at("notes").get<std::vector<std::string>>();
    rep.checks_failed = j.at("checks_failed").get<long long>();
    return rep;
}

void emit(const ExperimentReport& report, const std::string& path) {
    const std::string text =
        report.manifest.spec.format == "json" ? to_json_text(report) : to_csv(report);
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace fpplab
