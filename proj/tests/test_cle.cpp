// Analytic layer: MGF, density/CDF series, sampler, renewal counts.  The
// density and CDF are cross-checked against the closed-form MGF by
// quadrature, and against an independent long-double series evaluated here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include "doctest.h"
#include "fpplab/cle.hpp"
#include "oracles.hpp"

using namespace fpplab;

namespace {

constexpr double kPi = std::numbers::pi;

double lambda_pole(int k) { return 0.75 * ((k + 0.5) * (k + 0.5) - 1.0 / 9.0); }

// Survival function 1 - F(x) summed independently in long double:
//   P[B > x] = sum_k (-1)^k (3/(4pi)) ((k+1/2)/lambda_k) e^{-lambda_k x}.
// The coefficients sum to exactly one (the CDF vanishes at zero), which the
// quadrature consistency test below exercises without relying on it.
double survival_oracle(double x) {
    long double s = 0.0L;
    for (int k = 200; k >= 0; --k) {
        const long double lam = 0.75L * ((k + 0.5L) * (k + 0.5L) - 1.0L / 9.0L);
        const long double t =
            (3.0L / (4.0L * kPi)) * ((k + 0.5L) / lam) * std::exp(-lam * x);
        s += (k % 2 ? -t : t);
    }
    return static_cast<double>(s);
}

struct Line {
    double slope, r2;
};

Line fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double b = sxy / sxx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - my - b * (xs[i] - mx);
        ssr += e * e;
    }
    return {b, syy > 0 ? 1.0 - ssr / syy : 1.0};
}

}  // namespace

TEST_CASE("mgf closed form: frozen values and domain wall") {
    CHECK(mgf(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // cosh branch
    CHECK(mgf(-1.0) == doctest::Approx(0.030988997312).epsilon(1e-9));
    CHECK(mgf(-5.0) == doctest::Approx(3.211259575513e-4).epsilon(1e-9));
    // near the pole the value blows up but stays finite on this side of it;
    // 716 at 0.104 — the wall is only 2.7e-3 further right
    CHECK(mgf(0.104) == doctest::Approx(716.038112).epsilon(1e-6));
    CHECK(mgf(0.104) > 500.0);
    CHECK_THROWS_AS(mgf(5.0 / 48.0), DomainError);
    CHECK_THROWS_AS(mgf(0.2), DomainError);

    // increasing and convex on a grid spanning both branches
    std::vector<double> vals;
    for (int i = 0; i <= 100; ++i) vals.push_back(mgf(-10.0 + 0.101 * i));
    for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] > vals[i - 1]);
    for (std::size_t i = 1; i + 1 < vals.size(); ++i)
        CHECK(vals[i + 1] - 2 * vals[i] + vals[i - 1] >= 0.0);
}

TEST_CASE("log-mgf derivatives at zero recover the exact moments") {
    const auto [mean, var] = b_moments();
    CHECK(mean == doctest::Approx(10.882796185405).epsilon(1e-12));
    CHECK(var == doctest::Approx(92.616893304998).epsilon(1e-12));
    const double h = 1e-4;
    const double d1 = (std::log(mgf(h)) - std::log(mgf(-h))) / (2 * h);
    const double d2 = (std::log(mgf(h)) + std::log(mgf(-h))) / (h * h);
    CHECK(std::abs(d1 - mean) / mean < 1e-4);
    CHECK(std::abs(d2 - var) / var < 1e-4);
}

TEST_CASE("density: frozen values, positivity, and the truncation guard") {
    // both evaluation branches against values computed from the raw series
    CHECK(b_density(1.0) == doctest::Approx(4.144135425013568e-2).epsilon(1e-13));
    CHECK(b_density(3.0) == doctest::Approx(8.442032937534961e-2).epsilon(1e-13));
    CHECK(b_density(10.8827961854) == doctest::Approx(3.841973628636672e-2).epsilon(1e-13));
    CHECK(b_density(30.0) == doctest::Approx(5.244585127849343e-3).epsilon(1e-13));
    CHECK(b_density(100.0) == doctest::Approx(3.572568312621260e-6).epsilon(1e-13));

    // continuity across the branch crossover
    for (double x = 3.9; x < 4.5; x += 0.01) {
        const double l = b_density(x), r = b_density(x + 0.01);
        CHECK(std::abs(l - r) < 0.01);
        CHECK(l >= 0.0);
    }

    // nonnegative across fifteen decades
    for (int i = 0; i <= 60; ++i) {
        const double x = std::pow(10.0, -3.0 + 0.1 * i);
        CHECK(b_density(x) >= 0.0);
    }

    // the term budget is honored: too few terms is an error, not a wrong value
    CHECK_THROWS_AS(b_density(5.0, 3), ConvergenceError);
    CHECK(b_density(5.0, 4) == doctest::Approx(7.078889771295929e-2).epsilon(1e-13));
    CHECK_THROWS_AS(b_density(1.0, 2), ConvergenceError);
    CHECK(b_density(1.0, 3) == doctest::Approx(4.144135425013568e-2).epsilon(1e-13));
    CHECK_THROWS_AS(b_density(0.0), DomainError);
    CHECK_THROWS_AS(b_density(-1.0), DomainError);

    // far right tail: log-density slope is the leading pole -5/48
    std::vector<double> xs, ys;
    for (double x = 50.0; x <= 200.0; x += 5.0) {
        xs.push_back(x);
        ys.push_back(std::log(b_density(x)));
    }
    const Line l = fit(xs, ys);
    CHECK(std::abs(l.slope - (-5.0 / 48.0)) < 0.01 * (5.0 / 48.0));
    CHECK(l.r2 > 0.999);
}

TEST_CASE("density integrates back to the generating function") {
    // the density extends continuously by f(0) = 0, which the quadrature
    // needs since it samples the endpoint.  Integrate over dyadic panels:
    // a single adaptive call on [0, hi] never refines when exp(lam x)
    // squeezes all the mass into a corner the coarse samples miss.
    const auto quad = [&](double lam, double hi) {
        const auto g = [&](double x) {
            return x > 0.0 ? std::exp(lam * x) * b_density(x) : 0.0;
        };
        double total = 0.0, a = 0.0;
        for (double b = 1.0; a < hi; b = std::min(2.0 * b, hi)) {
            total += oracle::integrate(g, a, b, 1e-11);
            a = b;
        }
        return total;
    };
    CHECK(quad(0.0, 400.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(quad(-1.0, 200.0) == doctest::Approx(mgf(-1.0)).epsilon(1e-6));
    CHECK(quad(-5.0, 100.0) == doctest::Approx(mgf(-5.0)).epsilon(1e-6));
    CHECK(quad(0.05, 700.0) == doctest::Approx(mgf(0.05)).epsilon(1e-6));

    const auto [mean, var] = b_moments();
    const double m1 = oracle::integrate(
        [](double x) { return x > 0.0 ? x * b_density(x) : 0.0; }, 0.0, 500.0, 1e-10);
    const double m2 = oracle::integrate(
        [](double x) { return x > 0.0 ? x * x * b_density(x) : 0.0; }, 0.0, 700.0, 1e-9);
    CHECK(m1 == doctest::Approx(mean).epsilon(1e-7));
    CHECK(m2 - m1 * m1 == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("cdf series agrees with the density everywhere it matters") {
    // frozen points
    CHECK(survival_oracle(5.0) == doctest::Approx(6.806295343934018e-1).epsilon(1e-12));
    CHECK(survival_oracle(10.8827961854) ==
          doctest::Approx(3.688295525431408e-1).epsilon(1e-12));
    CHECK(survival_oracle(30.0) == doctest::Approx(5.034801722735369e-2).epsilon(1e-12));

    // integral of the density reproduces the closed-form CDF
    for (const double x : {1.0, 5.0, 10.8827961854, 30.0}) {
        const double mass = oracle::integrate(
            [](double t) { return t > 0.0 ? b_density(t) : 0.0; }, 0.0, x, 1e-11);
        CHECK(mass + survival_oracle(x) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // and its derivative is the density
    for (const double x : {2.0, 10.0, 40.0}) {
        const double h = 1e-3;
        const double d = (survival_oracle(x - h) - survival_oracle(x + h)) / (2 * h);
        CHECK(d == doctest::Approx(b_density(x)).epsilon(1e-8));
    }
    // the right tail is a single exponential with the exact constant 3.6/pi
    CHECK(survival_oracle(30.0) /
              ((3.6 / kPi) * std::exp(-5.0 * 30.0 / 48.0)) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(survival_oracle(100.0) == doctest::Approx(3.429665580116410e-5).epsilon(1e-9));
}

TEST_CASE("sampler: determinism, support, and closeness in distribution") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 64; ++i) CHECK(b_sample(a).value == b_sample(b).value);

    SplitMix64 rng(0xCE11);
    const int n = 100000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
        draws[i] = b_sample(rng).value;
        REQUIRE(draws[i] > 0.0);
        REQUIRE(draws[i] < 400.0);
    }
    std::sort(draws.begin(), draws.end());
    // two-sided KS against the closed-form CDF; 1.95/sqrt(n) is the 0.1%
    // critical value, far above the table's interpolation error
    double dks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double F = 1.0 - survival_oracle(draws[i]);
        dks = std::max(dks, std::abs(F - (i + 0.5) / n));
    }
    CHECK(dks < 1.95 / std::sqrt(static_cast<double>(n)));

    // moments over a long stream
    double sum = 0.0, sumsq = 0.0;
    const int big = 1000000;
    SplitMix64 rng2(0xB00);
    for (int i = 0; i < big; ++i) {
        const double x = b_sample(rng2).value;
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / big;
    const double var = sumsq / big - mean * mean;
    const auto [em, ev] = b_moments();
    CHECK(std::abs(mean - em) < 0.03);
    CHECK(std::abs(var - ev) < 1.5);
}

TEST_CASE("renewal process: counts, overshoot, and the variance constant") {
    SplitMix64 rng(7);
    const RenewalResult at0 = renewal_count(0.0, rng);
    CHECK(at0.count == 1);
    REQUIRE(at0.path.sums.size() == 1);
    CHECK(at0.path.sums[0] > 0.0);
    CHECK(at0.path.count_at(0.0) == 1);
    CHECK(at0.path.count_at(-3.0) == 1);
    CHECK_THROWS_AS(at0.path.count_at(at0.path.sums[0]), PathTooShort);
    SplitMix64 neg(1);
    CHECK_THROWS_AS(renewal_count(-1.0, neg), InvalidSpec);

    // strong-law rate over one long horizon
    SplitMix64 lln(0xA5);
    const RenewalResult big = renewal_count(1e5, lln);
    CHECK(std::abs(big.count / 1e5 - 0.0919) < 0.002);
    CHECK(big.count == big.path.count_at(1e5));
    for (std::size_t i = 1; i < big.path.sums.size(); ++i)
        REQUIRE(big.path.sums[i] > big.path.sums[i - 1]);

    // mean count and Wald overshoot at t = 1000 over 10^4 replicas
    const auto [mean_B, var_B] = b_moments();
    const int reps = 10000;
    double cnt = 0.0, over = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        SplitMix64 r(derive_seed(0x11EA, static_cast<std::uint64_t>(rep)));
        const RenewalResult res = renewal_count(1000.0, r);
        cnt += res.count;
        over += res.path.sums.back() - 1000.0;
    }
    cnt /= reps;
    over /= reps;
    const double predicted = 1000.0 / mean_B;
    CHECK(cnt > predicted * 0.99);
    CHECK(cnt < predicted * 1.01 + 2.0);
    // E[S_{N_t}] in [t, t + E[B]]: the overshoot is one incomplete increment
    CHECK(over > 0.0);
    CHECK(over < mean_B);

    // Var[N_t]/t -> var_B/mean_B^3 at t = 10^4, 10^5 replicas, threaded
    const int vreps = 100000;
    const unsigned nthreads = 8;
    std::vector<double> psum(nthreads, 0.0), psumsq(nthreads, 0.0);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nthreads; ++w)
        pool.emplace_back([&, w] {
            double s = 0.0, ss = 0.0;
            for (int rep = static_cast<int>(w); rep < vreps; rep += static_cast<int>(nthreads)) {
                SplitMix64 r(derive_seed(0x5EED0, static_cast<std::uint64_t>(rep)));
                const double n = renewal_count(1e4, r).count;
                s += n;
                ss += n * n;
            }
            psum[w] = s;
            psumsq[w] = ss;
        });
    for (auto& th : pool) th.join();
    double s = 0.0, ss = 0.0;
    for (unsigned w = 0; w < nthreads; ++w) s += psum[w], ss += psumsq[w];
    const double nmean = s / vreps;
    const double nvar = ss / vreps - nmean * nmean;
    const double var_half = var_B / (mean_B * mean_B * mean_B);
    CHECK(std::abs(nvar / 1e4 - var_half) < 0.03 * var_half);
}

TEST_CASE("annulus-count bracket from a renewal path") {
    // epsilon near one: both horizons sit at or below zero, one loop counted
    SplitMix64 rng(3);
    const RenewalResult res = renewal_count(10.0, rng);
    const AnnulusCountBracket edge = n_epsilon_bracket(0.999, res.path);
    CHECK(edge.lo == 0);
    CHECK(edge.hi == 0);
    CHECK_THROWS_AS(n_epsilon_bracket(0.0, res.path), InvalidSpec);
    CHECK_THROWS_AS(n_epsilon_bracket(1.0, res.path), InvalidSpec);
    CHECK_THROWS_AS(n_epsilon_bracket(std::exp(-50.0), res.path), PathTooShort);

    // ordering and width across sampled paths at epsilon = 1e-3
    const int reps = 10000;
    double width = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        SplitMix64 r(derive_seed(0xB4AC, static_cast<std::uint64_t>(rep)));
        const RenewalResult p = renewal_count(std::log(1e3) + 1.0, r);
        const AnnulusCountBracket b = n_epsilon_bracket(1e-3, p.path);
        REQUIRE(b.lo >= 0);
        REQUIRE(b.lo <= b.hi);
        width += b.hi - b.lo;
    }
    width /= reps;
    // renewals in a log 5 window: mean log5/mean_B, dominated exponentially
    CHECK(width <= std::log(5.0) / 10.8827961854 + 2.0);

    // midpoint estimate at epsilon = e^{-100} tracks 100 * mu_half
    const int mreps = 10000;
    double mid = 0.0;
    for (int rep = 0; rep < mreps; ++rep) {
        SplitMix64 r(derive_seed(0x31A7, static_cast<std::uint64_t>(rep)));
        const RenewalResult p = renewal_count(100.0, r);
        const AnnulusCountBracket b = n_epsilon_bracket(std::exp(-100.0), p.path);
        mid += 0.5 * (b.lo + b.hi);
    }
    mid /= mreps;
    CHECK(std::abs(mid - 100.0 * 0.0918881) < 1.5);
}

TEST_CASE("limit constants: exact formulas and their identities") {
    const LimitConstants c = limit_constants();
    CHECK(c.mu_half == doctest::Approx(0.091888149237).epsilon(1e-10));
    CHECK(c.mu_point == doctest::Approx(0.183776298474).epsilon(1e-10));
    CHECK(c.var_half == doctest::Approx(0.071856940495).epsilon(1e-10));
    CHECK(c.var_point == doctest::Approx(0.143713880990).epsilon(1e-10));
    CHECK(c.mean_B == doctest::Approx(10.882796185405).epsilon(1e-12));
    CHECK(c.var_B == doctest::Approx(92.616893304998).epsilon(1e-12));
    CHECK(c.mu_point == doctest::Approx(2.0 * c.mu_half).epsilon(1e-14));
    CHECK(c.var_point == doctest::Approx(2.0 * c.var_half).epsilon(1e-14));
    CHECK(std::abs(c.mu_half - 1.0 / c.mean_B) < 1e-12);
    CHECK(std::abs(c.var_half - c.var_B / (c.mean_B * c.mean_B * c.mean_B)) < 1e-12);
    const auto [m, v] = b_moments();
    CHECK(c.mean_B == m);
    CHECK(c.var_B == v);
}
