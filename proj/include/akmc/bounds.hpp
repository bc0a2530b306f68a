#pragma once

// Analytic bias / variance / MSE bounds for the Rtilde and Rhat estimators,
// bracketing bounds on the moments of xi_i^-1, and empirical error statistics.
//
// Conventions: Bias(X, Y) = E[X - Y], MSE(X, Y) = Bias(X, Y)^2 + Var(X).
// q_j(t) = exp(-kappa_j t), K = sum_j k_j. Bounds need the true kappa_j, so
// they are only available when the rate table carries it.

#include "akmc/error.hpp"
#include "akmc/estimators.hpp"
#include "akmc/rates.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace akmc {

struct ErrorStats {
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    double bias_se = 0.0;
    double variance_se = 0.0;
    double mse_se = 0.0;
    std::size_t samples = 0;
};

/// Sample bias against `target`, unbiased sample variance, and their sum as MSE.
/// Standard errors are the usual large-sample ones: s/sqrt(n) for the bias,
/// sqrt((m4 - s^4)/n) for the variance, and the SE of the mean of (x - target)^2
/// for the MSE.
[[nodiscard]] inline ErrorStats empirical_error(std::span<const double> samples, double target) {
    const std::size_t n = samples.size();
    if (n < 2) throw Error(Errc::TooFewSamples, "empirical error needs at least 2 samples");
    const double nd = static_cast<double>(n);

    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= nd;

    double m2 = 0.0;
    double m4 = 0.0;
    double sq_mean = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
        sq_mean += (x - target) * (x - target);
    }
    sq_mean /= nd;
    double sq_var = 0.0;
    for (double x : samples) {
        const double e = (x - target) * (x - target) - sq_mean;
        sq_var += e * e;
    }

    ErrorStats s;
    s.samples = n;
    s.bias = mean - target;
    s.variance = m2 / (nd - 1.0);
    s.mse = s.bias * s.bias + s.variance;
    s.bias_se = std::sqrt(s.variance / nd);
    const double pop_var = m2 / nd;
    s.variance_se = std::sqrt(std::max(0.0, m4 / nd - pop_var * pop_var) / nd);
    s.mse_se = std::sqrt(sq_var / (nd - 1.0) / nd);
    return s;
}

struct BoundTriple {
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
};

/// Quantities shared by every bound at one time point.
struct BoundInputs {
    std::size_t n_pathways = 0;
    double total_rate = 0.0;  ///< K
    double min_rate = 0.0;    ///< min_j k_j
    double max_q = 0.0;       ///< max_j q_j(t)
    double r_bar = 0.0;
};

[[nodiscard]] inline BoundInputs bound_inputs(const RateTable& rt, double t) {
    if (!rt.has_kappa()) throw Error(Errc::InvalidArgument, "error bounds need the true intensities kappa_j");
    BoundInputs in;
    in.n_pathways = rt.size();
    in.min_rate = rt.pathways.front().k_lo;
    for (const auto& r : rt.pathways) {
        in.total_rate += r.k_lo;
        in.min_rate = std::min(in.min_rate, r.k_lo);
        in.max_q = std::max(in.max_q, std::exp(-r.kappa * t));
    }
    const auto kappa = rt.kappa();
    const auto k_lo = rt.k_lo();
    in.r_bar = expected_proportion(kappa, k_lo, t);
    return in;
}

/// Per-pathway accuracy of the deterministic approximation ptilde_j(t):
/// Bias = ptilde - p, MSE = (ptilde - p)^2.
struct ApproxError {
    double bias = 0.0;
    double mse = 0.0;
};

[[nodiscard]] inline std::vector<ApproxError> p_tilde_errors(const RateTable& rt, double t) {
    std::vector<ApproxError> out;
    out.reserve(rt.size());
    for (const auto& r : rt.pathways) {
        const double d = p_tilde(r.k_hi, t) - discovery_probability(r.kappa, t);
        out.push_back({d, d * d});
    }
    return out;
}

[[nodiscard]] inline BoundTriple tilde_bounds(const RateTable& rt, double t, std::span<const ApproxError> p_tilde_err) {
    const BoundInputs in = bound_inputs(rt, t);
    if (p_tilde_err.size() != in.n_pathways) throw Error(Errc::InvalidArgument, "one p_tilde error per pathway required");
    double max_abs_bias = 0.0;
    double max_mse = 0.0;
    for (const auto& e : p_tilde_err) {
        max_abs_bias = std::max(max_abs_bias, std::abs(e.bias));
        max_mse = std::max(max_mse, e.mse);
    }
    const double N = static_cast<double>(in.n_pathways);
    const double ratio = in.total_rate / in.min_rate;
    const double rb2 = in.r_bar * in.r_bar;

    BoundTriple b;
    b.bias = N * max_abs_bias + ratio * in.r_bar * in.max_q;
    b.variance = 4.0 * ratio * ratio * rb2 * in.max_q;
    b.mse = 2.0 * N * N * max_mse + ratio * ratio * (2.0 * in.max_q + 4.0) * rb2 * in.max_q;
    return b;
}

/// Unconditional moments of phat_j(t) = 1 - exp(-Nhat_j(t)), N_j(t) ~ Poisson(kappa_j t).
struct PHatMoments {
    double mean = 0.0;
    double variance = 0.0;
    double mse_vs_p = 0.0;  ///< (mean - p)^2 + variance, p = 1 - exp(-kappa_j t)
    double bias = 0.0;      ///< mean - p
};

/// Series over the Poisson pmf. Terms further than ten standard deviations
/// below the mode are skipped (their mass is < 1e-20); the sum stops once the
/// remaining upper tail is below `tol`, or after 10*kappa_t + 50 terms. The
/// sums are divided by the accumulated mass, which cancels the rounding error
/// of the starting log-pmf when kappa_t is large.
[[nodiscard]] inline PHatMoments p_hat_moments(double kappa_t, double tol = 1e-12) {
    if (!(kappa_t >= 0.0)) throw Error(Errc::InvalidArgument, "kappa_t must be nonnegative");
    PHatMoments m;
    if (kappa_t == 0.0) return m;

    const auto first_n = static_cast<long long>(std::max(0.0, std::floor(kappa_t - 10.0 * std::sqrt(kappa_t) - 10.0)));
    const auto cap = static_cast<long long>(10.0 * kappa_t + 50.0);
    const double log_rate = std::log(kappa_t);
    double log_pmf = static_cast<double>(first_n) * log_rate - kappa_t - std::lgamma(static_cast<double>(first_n) + 1.0);
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (long long n = first_n, terms = 0; terms <= cap; ++n, ++terms) {
        if (n > first_n) log_pmf += log_rate - std::log(static_cast<double>(n));
        const double pmf = std::exp(log_pmf);
        const double f = p_hat(n);
        mass += pmf;
        first += f * pmf;
        second += f * f * pmf;
        // Past the mode the tail is dominated by a geometric series.
        const double ratio = kappa_t / static_cast<double>(n + 1);
        if (ratio < 1.0 && pmf * ratio / (1.0 - ratio) < tol) break;
    }
    first /= mass;
    second /= mass;
    const double p = discovery_probability(kappa_t, 1.0);
    m.mean = first;
    m.variance = std::max(0.0, second - first * first);
    m.bias = m.mean - p;
    m.mse_vs_p = m.bias * m.bias + m.variance;
    return m;
}

[[nodiscard]] inline BoundTriple hat_bounds(const RateTable& rt, double t, std::span<const PHatMoments> p_hat_mom) {
    const BoundInputs in = bound_inputs(rt, t);
    if (p_hat_mom.size() != in.n_pathways) throw Error(Errc::InvalidArgument, "one p_hat moment set per pathway required");
    double max_abs_bias = 0.0;
    double max_var = 0.0;
    double max_mse = 0.0;
    for (const auto& m : p_hat_mom) {
        max_abs_bias = std::max(max_abs_bias, std::abs(m.bias));
        max_var = std::max(max_var, m.variance);
        max_mse = std::max(max_mse, m.mse_vs_p);
    }
    const double N = static_cast<double>(in.n_pathways);
    const double ratio = in.total_rate / in.min_rate;
    const double rb2 = in.r_bar * in.r_bar;
    const double q = in.max_q;

    BoundTriple b;
    b.bias = N * max_abs_bias + ratio * in.r_bar * q;
    b.variance = 2.0 * ratio * ratio * rb2 * q + (1.0 + 2.0 * N * N * q) * max_var;
    b.mse = (1.0 + N * N + 2.0 * N * N * q) * max_mse + 4.0 * ratio * ratio * rb2 * (1.0 + q) * q;
    return b;
}

[[nodiscard]] inline std::vector<PHatMoments> p_hat_moments_all(const RateTable& rt, double t, double tol = 1e-12) {
    std::vector<PHatMoments> out;
    out.reserve(rt.size());
    for (const auto& r : rt.pathways) out.push_back(p_hat_moments(r.kappa * t, tol));
    return out;
}

/// Jensen lower and Edmundson-Madansky upper bounds on E[xi_i^-1] and E[xi_i^-2],
/// xi_i = k_i + sum_{m != i} k_m chi_m.
struct XiMomentBounds {
    double lower1 = 0.0;
    double upper1 = 0.0;
    double lower2 = 0.0;
    double upper2 = 0.0;
};

/// `pathway` is a label (1-based).
[[nodiscard]] inline XiMomentBounds xi_moment_bounds(const RateTable& rt, double t, int pathway) {
    if (!rt.has_kappa()) throw Error(Errc::InvalidArgument, "xi moment bounds need the true intensities kappa_j");
    if (pathway < 1 || pathway > static_cast<int>(rt.size())) throw Error(Errc::OutOfRange, "pathway label out of range");
    const auto i = static_cast<std::size_t>(pathway - 1);
    const double K = rt.total_low_rate();
    const double ki = rt.pathways[i].k_lo;
    double missing = 0.0;  // sum_{m != i} q_m k_m
    for (std::size_t m = 0; m < rt.size(); ++m)
        if (m != i) missing += std::exp(-rt.pathways[m].kappa * t) * rt.pathways[m].k_lo;
    const double mean_xi = K - missing;

    XiMomentBounds b;
    b.lower1 = 1.0 / mean_xi;
    b.upper1 = 1.0 / K + missing / (ki * K);
    b.lower2 = 1.0 / (mean_xi * mean_xi);
    b.upper2 = 1.0 / (K * K) + (K + ki) / (ki * ki * K * K) * missing;
    return b;
}

struct BoundRow {
    double t = 0.0;
    double target = 0.0;  ///< Rbar(t)
    EstimatorKind which = EstimatorKind::Tilde;
    BoundTriple bound;
    ErrorStats empirical;
    BoundInputs inputs;

    /// Each empirical quantity is within its bound plus `n_se` standard errors.
    [[nodiscard]] bool satisfied(double n_se = 3.0) const {
        return std::abs(empirical.bias) <= bound.bias + n_se * empirical.bias_se &&
               empirical.variance <= bound.variance + n_se * empirical.variance_se &&
               empirical.mse <= bound.mse + n_se * empirical.mse_se;
    }
};

struct BoundReport {
    std::vector<BoundRow> rows;

    [[nodiscard]] bool all_satisfied(double n_se = 3.0) const {
        return std::all_of(rows.begin(), rows.end(), [n_se](const BoundRow& r) { return r.satisfied(n_se); });
    }
};

/// CSV `t,target,which,bias_bound,bias_emp,bias_se,var_bound,var_emp,var_se,mse_bound,mse_emp,mse_se`.
/// Bounds are evaluated from the true intensities (analysis mode only).
inline void write_csv(std::ostream& os, const BoundReport& report) {
    const auto prec = os.precision(17);
    os << "t,target,which,bias_bound,bias_emp,bias_se,var_bound,var_emp,var_se,mse_bound,mse_emp,mse_se\n";
    for (const auto& r : report.rows) {
        os << r.t << ',' << r.target << ',' << to_string(r.which) << ',' << r.bound.bias << ',' << r.empirical.bias << ','
           << r.empirical.bias_se << ',' << r.bound.variance << ',' << r.empirical.variance << ','
           << r.empirical.variance_se << ',' << r.bound.mse << ',' << r.empirical.mse << ',' << r.empirical.mse_se << '\n';
    }
    os.precision(prec);
}

}  // namespace akmc
