#pragma once
// Estimation utilities shared by the experiment drivers: streaming moments
// that merge across worker threads, integer-keyed histograms with total
// variation distance, least-squares lines for slope/tail readouts, and a
// one-sample Kolmogorov-Smirnov check against the standard normal.
//
// Accumulators and histograms are plain mergeable values; parallel reduction
// means each worker owns one and the driver folds them, so nothing here
// locks or shares state.

#include <cstdint>
#include <map>
#include <span>
#include <utility>

#include "fpplab/lattice.hpp"

namespace fpplab {

struct InsufficientData : FppError { using FppError::FppError; };
struct DegenerateInput : FppError { using FppError::FppError; };
struct EmptyHistogram : FppError { using FppError::FppError; };

// Welford streaming moments; merge uses the pairwise update so partial
// accumulators from different workers combine without precision loss.
struct MomentAccumulator {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the running mean

    void push(double x);
    void merge(const MomentAccumulator& other);
};

struct MomentSummary {
    long long n;
    double mean;
    double variance;   // sample variance, n - 1 in the denominator
    double std_error;  // sqrt(variance / n)
};

// Throws InsufficientData below two samples (no variance to report).
MomentSummary finalize(const MomentAccumulator& acc);

struct FitResult {
    double slope;
    double intercept;
    double r_squared;  // in [0,1]; 1 when the residuals vanish
};

// Ordinary least squares through (xs[i], ys[i]).  Throws DegenerateInput for
// fewer than three points or when all xs coincide.
FitResult fit_line(std::span<const double> xs, std::span<const double> ys);

// One-sample Kolmogorov-Smirnov test of pre-standardized samples against
// N(0,1).  Returns the two-sided statistic D and the asymptotic p-value
// 2 sum_k (-1)^{k-1} exp(-2 k^2 n D^2).  Throws InsufficientData for n < 8.
struct KsResult {
    double d;
    double p;
};
KsResult ks_normal(std::span<const double> samples);

// Exact counts keyed by integer outcomes (passage times and loop counts are
// integers, so no binning is involved).
struct Histogram {
    std::map<long long, long long> counts;

    void push(long long k) { counts[k] += 1; }
    long long total() const;
    void merge(const Histogram& other);
};

// Total variation distance (1/2) sum_k |p1(k) - p2(k)| between the two
// normalized histograms; throws EmptyHistogram if either has no samples.
double tv_distance(const Histogram& h1, const Histogram& h2);

}  // namespace fpplab
