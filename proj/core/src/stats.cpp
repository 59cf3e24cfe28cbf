#include "revlab/stats.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace revlab::stats {

namespace {

void check_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ContractViolation("confidence level must lie in (0, 1)");
    }
}

}  // namespace

double normal_critical(double confidence) {
    check_confidence(confidence);
    const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 0.5 + 0.5 * confidence);
}

Interval clopper_pearson(std::size_t hits, std::size_t trials, double confidence) {
    return clopper_pearson_effective(static_cast<double>(hits), static_cast<double>(trials), confidence);
}

Interval clopper_pearson_effective(double k, double n, double confidence) {
    check_confidence(confidence);
    if (!(n > 0.0)) throw ContractViolation("binomial interval needs at least one trial");
    if (!(k >= 0.0) || k > n) throw ContractViolation("binomial hits must lie in [0, trials]");
    if (k == 0.0) return {0.0, 1.0 - std::pow(1.0 - confidence, 1.0 / n)};
    if (k == n) return {std::pow(1.0 - confidence, 1.0 / n), 1.0};
    const double alpha = 1.0 - confidence;
    return {boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0),
            boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0)};
}

Interval wilson(double successes, double trials, double confidence) {
    if (!(trials > 0.0)) throw ContractViolation("Wilson interval needs positive trials");
    const double z = normal_critical(confidence);
    const double p = std::clamp(successes / trials, 0.0, 1.0);
    const double z2n = z * z / trials;
    const double centre = (p + 0.5 * z2n) / (1.0 + z2n);
    const double half = z * std::sqrt(p * (1.0 - p) / trials + 0.25 * z2n / trials) / (1.0 + z2n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Interval poisson_rate(std::size_t count, double exposure, double confidence) {
    check_confidence(confidence);
    if (!(exposure > 0.0)) throw ContractViolation("Poisson rate needs positive exposure");
    const double alpha = 1.0 - confidence;
    const double k = static_cast<double>(count);
    const double lo = count == 0 ? 0.0 : boost::math::gamma_p_inv(k, alpha / 2.0);
    const double hi = boost::math::gamma_p_inv(k + 1.0, 1.0 - alpha / 2.0);
    return {lo / exposure, hi / exposure};
}

double chi_square_sf(double statistic, double dof) {
    const boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

MeanEstimate mean_estimate(std::span<const double> xs) {
    MeanEstimate out;
    out.n = xs.size();
    if (xs.empty()) return out;
    const double n = static_cast<double>(xs.size());
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

double integrated_autocorrelation_time(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 16) return 1.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double c0 = 0.0;
    for (double x : xs) c0 += (x - mean) * (x - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    const std::size_t max_lag = n / 2;
    for (std::size_t lag = 1; lag < max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (xs[i] - mean) * (xs[i + lag] - mean);
        c /= static_cast<double>(n);
        tau += 2.0 * c / c0;
        if (static_cast<double>(lag) >= 5.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

MeanEstimate correlated_mean_estimate(std::span<const double> xs) {
    MeanEstimate out = mean_estimate(xs);
    out.standard_error *= std::sqrt(integrated_autocorrelation_time(xs));
    return out;
}

std::size_t Binning::index(double x) const noexcept {
    if (!(x >= lo)) return 0;
    const auto i = static_cast<std::size_t>((x - lo) / width());
    return std::min(i, bins - 1);
}

std::vector<double> histogram(std::span<const double> xs, const Binning& binning) {
    if (binning.bins == 0 || !(binning.hi > binning.lo)) {
        throw ContractViolation("histogram binning needs bins > 0 and hi > lo");
    }
    std::vector<double> counts(binning.bins, 0.0);
    for (double x : xs) counts[binning.index(x)] += 1.0;
    if (!xs.empty()) {
        for (double& c : counts) c /= static_cast<double>(xs.size());
    }
    return counts;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("histograms must share a binning");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return 0.5 * sum;
}

}  // namespace revlab::stats
