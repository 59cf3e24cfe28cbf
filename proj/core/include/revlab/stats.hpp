#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace revlab::stats {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool overlaps(const Interval& other) const noexcept { return lo <= other.hi && other.lo <= hi; }
};

/// Two-sided standard-normal critical value for the given confidence (0.95 -> 1.95996...).
double normal_critical(double confidence);

/// Exact (Clopper-Pearson) binomial interval. With zero hits the lower end is 0 and the upper
/// end is the one-sided bound at the same confidence.
Interval clopper_pearson(std::size_t hits, std::size_t trials, double confidence = 0.95);
/// Same with real-valued (effective) counts, for autocorrelated indicator sequences.
Interval clopper_pearson_effective(double hits, double trials, double confidence = 0.95);

/// Wilson score interval; accepts a fractional effective sample size.
Interval wilson(double successes, double trials, double confidence = 0.95);

/// Exact Poisson interval for a rate count / exposure.
Interval poisson_rate(std::size_t count, double exposure, double confidence = 0.95);

double chi_square_sf(double statistic, double dof);

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean and its iid standard error.
MeanEstimate mean_estimate(std::span<const double> xs);

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
/// Returns 1 for uncorrelated series and for series too short to estimate.
double integrated_autocorrelation_time(std::span<const double> xs);

/// Mean with a standard error inflated by the integrated autocorrelation time.
MeanEstimate correlated_mean_estimate(std::span<const double> xs);

struct Binning {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 20;

    double width() const noexcept { return (hi - lo) / static_cast<double>(bins); }
    double center(std::size_t i) const noexcept { return lo + (static_cast<double>(i) + 0.5) * width(); }
    /// Bin index; values outside [lo, hi) are clamped into the end bins.
    std::size_t index(double x) const noexcept;
};

/// Normalized histogram (bin probabilities summing to 1). Empty input gives all zeros.
std::vector<double> histogram(std::span<const double> xs, const Binning& binning);

/// Half the L1 distance between two probability vectors; lies in [0, 1].
double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace revlab::stats
