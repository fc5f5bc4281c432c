#pragma once
// Analytic layer for the law of the log-conformal-radius increments B_k of
// the nested-loop picture, plus the renewal process those increments drive.
//
// Everything here hangs off one closed form: the moment generating function
//   E[e^{lambda B}] = 1 / (2 cos(pi sqrt(1/9 + 4 lambda/3))),   lambda < 5/48.
// Its poles sit at lambda_k = (3/4)((k+1/2)^2 - 1/9); the partial-fraction
// expansion across them gives the density as an alternating exponential
// series, the CDF in closed form, and the exact exponential right tail
// (3.6/pi) e^{-5x/48}.  The series is derived, not quoted: the tests gate it
// against the MGF by quadrature before anything samples from it.
//
// Thread model: all functions are pure; the sampler table is built once and
// only read afterwards; rng states are per-caller values.

#include <cstdint>
#include <utility>
#include <vector>

#include "fpplab/config.hpp"  // SplitMix64
#include "fpplab/lattice.hpp"

namespace fpplab {

// Argument outside a function's analytic domain (e.g. mgf at the pole).
struct DomainError : FppError { using FppError::FppError; };
// A truncated series failed to meet its tail bound within the term budget.
struct ConvergenceError : FppError { using FppError::FppError; };
// A renewal path ends before the time a query needs.
struct PathTooShort : FppError { using FppError::FppError; };

// Supremum of the MGF domain: the leading denominator zero.
inline constexpr double kMgfPole = 5.0 / 48.0;

// One increment B = log CR(U_{k-1}) - log CR(U_k); always positive.
struct RadiusIncrement {
    double value;
};

// A sampled trajectory of partial sums S_n = B_1 + ... + B_n.
struct RenewalPath {
    std::vector<double> increments;  // B_1, B_2, ...
    std::vector<double> sums;        // strictly increasing partial sums
    // N_t = inf{n : S_n > t}; counts from 1, so N_0 = 1.  Throws
    // PathTooShort when the stored path never exceeds t.
    int count_at(double t) const;
};

struct RenewalResult {
    int count;  // N_t for the queried horizon
    RenewalPath path;
};

// The six constants of the limit theorem for c_n / b_{0,n} type quantities.
struct LimitConstants {
    double mu_half;    // 1/(2 sqrt(3) pi)
    double mu_point;   // 1/(sqrt(3) pi)
    double var_half;   // 2/(3 sqrt(3) pi) - 1/(2 pi^2)
    double var_point;  // 4/(3 sqrt(3) pi) - 1/pi^2
    double mean_B;     // 2 sqrt(3) pi
    double var_B;      // 16 pi^2 - 12 sqrt(3) pi
};

// Integer bracket for the number of loops surrounding a radius-epsilon disc.
struct AnnulusCountBracket {
    int lo;
    int hi;
};

// E[e^{lambda B}]; cosh branch below -1/12 where the sqrt argument turns
// negative.  DomainError at or beyond the pole 5/48.
double mgf(double lambda);

// Exact (mean, variance) = (2 sqrt(3) pi, 16 pi^2 - 12 sqrt(3) pi).
std::pair<double, double> b_moments();

// Density of B at x > 0 via the pole expansion
//   f(x) = (3/(4 pi)) sum_k (-1)^k (k+1/2) e^{-lambda_k x},
// truncated once the next term drops below 1e-14 in magnitude.  Below the
// self-dual point of the underlying theta-like sum the terms first grow and
// cancel catastrophically, so that regime is evaluated through the modular
// transform of the same sum (numerically identical, all significant terms
// positive).  ConvergenceError if the truncation bound is not reached within
// `terms` terms.
double b_density(double x, int terms = 400);

// One draw of B by inverse-CDF lookup: 2^14-knot monotone-cubic table of the
// quantile function, exact exponential tail beyond the last 1e-8 of mass.
// The table is built on first use and shared; determinism is per rng state.
RadiusIncrement b_sample(SplitMix64& rng);

// Draw increments until the partial sum exceeds t; returns N_t and the path.
RenewalResult renewal_count(double t, SplitMix64& rng);

// Koebe-style bracket for N(epsilon), the number of nested loops surrounding
// the epsilon-disc: N_{log(1/(5 eps))} - 1 <= N(eps) < N_{log(1/eps)}, the
// strict upper bound stored inclusively as hi = N_{log(1/eps)} - 1.
AnnulusCountBracket n_epsilon_bracket(double epsilon, const RenewalPath& path);

LimitConstants limit_constants();

}  // namespace fpplab
