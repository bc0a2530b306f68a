#pragma once

// Goodness-of-fit and independence tests used to check the Poisson structure
// of exit-event logs.

#include "akmc/error.hpp"
#include "akmc/random.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace akmc::stats {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

[[nodiscard]] inline MeanSe mean_se(std::span<const double> x) {
    if (x.size() < 2) throw Error(Errc::TooFewSamples, "mean_se needs at least 2 samples");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Streaming mean and variance (Welford).
class Accumulator {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    [[nodiscard]] double se() const noexcept { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Kolmogorov-Smirnov distance between the sample and an exponential law
/// whose mean is fitted to the sample.
[[nodiscard]] inline double ks_exponential_statistic(std::vector<double> x) {
    if (x.size() < 2) throw Error(Errc::TooFewSamples, "KS test needs at least 2 samples");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = -std::expm1(-x[i] / mean);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.01;
    bool passed = true;
    std::string detail;
};

/// KS exponentiality test with estimated mean (Lilliefors). The fitted-mean
/// statistic is scale free, so its null law depends only on n and is sampled
/// by parametric bootstrap with `n_boot` replicates.
[[nodiscard]] inline TestResult ks_exponential_test(std::span<const double> x, double alpha, int n_boot, std::uint64_t seed) {
    TestResult r;
    r.name = "ks_exponential";
    r.alpha = alpha;
    r.statistic = ks_exponential_statistic(std::vector<double>(x.begin(), x.end()));
    RandomStream rng(seed);
    std::vector<double> sim(x.size());
    int exceed = 0;
    for (int b = 0; b < n_boot; ++b) {
        for (auto& v : sim) v = rng.exponential(1.0);
        if (ks_exponential_statistic(sim) >= r.statistic) ++exceed;
    }
    r.p_value = (1.0 + exceed) / (1.0 + n_boot);
    r.passed = r.p_value >= alpha;
    r.detail = "n=" + std::to_string(x.size()) + " bootstrap=" + std::to_string(n_boot);
    return r;
}

/// Upper tail of the chi-square law.
[[nodiscard]] inline double chi_square_sf(double statistic, double dof) {
    if (statistic <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

/// Pearson independence test on a contingency table (rows x cols).
[[nodiscard]] inline TestResult contingency_test(const std::vector<std::vector<double>>& table, double alpha) {
    TestResult r;
    r.name = "label_interarrival_independence";
    r.alpha = alpha;
    const std::size_t rows = table.size();
    const std::size_t cols = rows ? table.front().size() : 0;
    if (rows < 2 || cols < 2) {
        r.detail = "fewer than two categories; test vacuous";
        return r;
    }
    std::vector<double> row_sum(rows, 0.0);
    std::vector<double> col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
            total += table[i][j];
        }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double expected = row_sum[i] * col_sum[j] / total;
            if (expected > 0.0) chi2 += (table[i][j] - expected) * (table[i][j] - expected) / expected;
        }
    const double dof = static_cast<double>((rows - 1) * (cols - 1));
    r.statistic = chi2;
    r.p_value = chi_square_sf(chi2, dof);
    r.passed = r.p_value >= alpha;
    r.detail = std::to_string(rows) + "x" + std::to_string(cols) + " table";
    return r;
}

/// Dispersion test for Poisson counts in equal windows: (m-1) s^2 / mean is
/// chi-square with m-1 degrees of freedom. Two-sided. The statistic reported is
/// the Fano factor s^2 / mean.
[[nodiscard]] inline TestResult dispersion_test(std::span<const double> counts, double alpha) {
    TestResult r;
    r.name = "fano";
    r.alpha = alpha;
    const std::size_t m = counts.size();
    if (m < 2) throw Error(Errc::TooFewSamples, "dispersion test needs at least 2 windows");
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(m);
    if (mean <= 0.0) {
        r.detail = "no events";
        return r;
    }
    double ss = 0.0;
    for (double c : counts) ss += (c - mean) * (c - mean);
    const double s2 = ss / static_cast<double>(m - 1);
    const double d = static_cast<double>(m - 1) * s2 / mean;
    const boost::math::chi_squared law(static_cast<double>(m - 1));
    const double lower = boost::math::cdf(law, d);
    r.statistic = s2 / mean;
    r.p_value = std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
    r.passed = r.p_value >= alpha;
    r.detail = "windows=" + std::to_string(m) + " mean=" + std::to_string(mean);
    return r;
}

}  // namespace akmc::stats
