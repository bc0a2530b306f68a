#pragma once

// Proportion-of-rate-found estimators used as stopping criteria for the
// saddle search.
//
//   R(t)     = sum chi_j k_j / K                       (needs every k_j)
//   Rbar(t)  = sum p_j(t) k_j / K,  p_j = 1 - exp(-kappa_j t)
//   Rtilde   = sum ptilde_j chi_j k_j / sum chi_j k_j,  ptilde_j = 1 - exp(-k_hi_j t)
//   Rhat     = sum phat_j chi_j k_j / sum chi_j k_j,    phat_j = 1 - exp(-Nhat_j)
//
// Rtilde and Rhat only ever read k_j for pathways with chi_j = 1. Both are
// 0 before the first exit.

#include "akmc/error.hpp"
#include "akmc/events.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace akmc {

enum class EstimatorKind { Tilde, Hat };

[[nodiscard]] inline std::string_view to_string(EstimatorKind kind) noexcept {
    return kind == EstimatorKind::Tilde ? "tilde" : "hat";
}

[[nodiscard]] inline std::optional<EstimatorKind> parse_estimator_kind(std::string_view name) {
    if (name == "tilde") return EstimatorKind::Tilde;
    if (name == "hat") return EstimatorKind::Hat;
    return std::nullopt;
}

struct StoppingRule {
    double epsilon = 0.05;
    EstimatorKind estimator = EstimatorKind::Tilde;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::InvalidArgument, "stop.epsilon must lie in (0, 1)");
    }
};

/// Strict: the search stops only once the estimate exceeds 1 - epsilon.
[[nodiscard]] inline bool should_stop(const StoppingRule& rule, double value) noexcept {
    return value > 1.0 - rule.epsilon;
}

[[nodiscard]] inline double proportion_found(const Counts& counts, std::span<const double> k_lo) {
    assert(counts.size() == k_lo.size());
    double found = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < k_lo.size(); ++j) {
        total += k_lo[j];
        if (counts.chi[j]) found += k_lo[j];
    }
    return total > 0.0 ? found / total : 0.0;
}

[[nodiscard]] inline double discovery_probability(double kappa, double t) noexcept { return -std::expm1(-kappa * t); }

[[nodiscard]] inline double expected_proportion(std::span<const double> kappa, std::span<const double> k_lo, double t) {
    assert(kappa.size() == k_lo.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < k_lo.size(); ++j) {
        num += discovery_probability(kappa[j], t) * k_lo[j];
        den += k_lo[j];
    }
    return den > 0.0 ? num / den : 0.0;
}

[[nodiscard]] inline double p_tilde(double k_hi, double t) noexcept { return -std::expm1(-k_hi * t); }

[[nodiscard]] inline long long n_hat(long long n) noexcept { return n >= 2 ? n : 0; }

[[nodiscard]] inline double p_hat(long long n) noexcept { return -std::expm1(-static_cast<double>(n_hat(n))); }

[[nodiscard]] inline double r_tilde(const Counts& counts, std::span<const double> k_lo, std::span<const double> k_hi, double t) {
    assert(counts.size() == k_lo.size() && k_lo.size() == k_hi.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (!counts.chi[j]) continue;
        num += p_tilde(k_hi[j], t) * k_lo[j];
        den += k_lo[j];
    }
    return den > 0.0 ? num / den : 0.0;
}

[[nodiscard]] inline double r_hat(const Counts& counts, std::span<const double> k_lo) {
    assert(counts.size() == k_lo.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (!counts.chi[j]) continue;
        num += p_hat(counts.n[j]) * k_lo[j];
        den += k_lo[j];
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Rhat written term by term as sum_j phat_j k_j / xi_j with
/// xi_j = k_j + sum_{m != j} chi_m k_m. Equal to r_hat whenever N >= 1.
[[nodiscard]] inline double r_hat_xi_form(const Counts& counts, std::span<const double> k_lo) {
    assert(counts.size() == k_lo.size());
    double found = 0.0;
    for (std::size_t m = 0; m < counts.size(); ++m)
        if (counts.chi[m]) found += k_lo[m];
    double sum = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const double xi = k_lo[j] + (found - (counts.chi[j] ? k_lo[j] : 0.0));
        sum += p_hat(counts.n[j]) * k_lo[j] / xi;
    }
    return sum;
}

[[nodiscard]] inline double estimate(EstimatorKind kind, const Counts& counts, std::span<const double> k_lo,
                                     std::span<const double> k_hi, double t) {
    return kind == EstimatorKind::Tilde ? r_tilde(counts, k_lo, k_hi, t) : r_hat(counts, k_lo);
}

struct PathwayEstimates {
    int chi = 0;
    long long n = 0;
    long long n_hat = 0;
    double p_tilde = 0.0;
    double p_hat = 0.0;
};

struct TraceRow {
    double t = 0.0;
    double r = 0.0;
    double r_bar = std::numeric_limits<double>::quiet_NaN();  ///< NaN when kappa is unknown
    double r_tilde = 0.0;
    double r_hat = 0.0;
    std::vector<PathwayEstimates> pathways;
};

struct EstimatorTrace {
    std::vector<TraceRow> rows;
};

/// Evaluates every estimator at time t. `kappa` may be empty.
[[nodiscard]] inline TraceRow evaluate_estimators(double t, const Counts& counts, std::span<const double> k_lo,
                                                  std::span<const double> k_hi, std::span<const double> kappa) {
    TraceRow row;
    row.t = t;
    row.r = proportion_found(counts, k_lo);
    if (!kappa.empty()) row.r_bar = expected_proportion(kappa, k_lo, t);
    row.r_tilde = r_tilde(counts, k_lo, k_hi, t);
    row.r_hat = r_hat(counts, k_lo);
    row.pathways.reserve(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        row.pathways.push_back({counts.chi[j], counts.n[j], n_hat(counts.n[j]), p_tilde(k_hi[j], t), p_hat(counts.n[j])});
    }
    return row;
}

/// CSV `t,R,R_bar,R_tilde,R_hat`, optionally followed by per-pathway columns
/// chi_j,n_j,n_hat_j,p_tilde_j,p_hat_j.
inline void write_csv(std::ostream& os, const EstimatorTrace& trace, bool wide = true) {
    const auto prec = os.precision(17);
    const std::size_t n_pathways = trace.rows.empty() ? 0 : trace.rows.front().pathways.size();
    os << "t,R,R_bar,R_tilde,R_hat";
    if (wide) {
        for (std::size_t j = 1; j <= n_pathways; ++j)
            os << ",chi_" << j << ",n_" << j << ",n_hat_" << j << ",p_tilde_" << j << ",p_hat_" << j;
    }
    os << '\n';
    for (const auto& row : trace.rows) {
        os << row.t << ',' << row.r << ',' << row.r_bar << ',' << row.r_tilde << ',' << row.r_hat;
        if (wide) {
            for (const auto& p : row.pathways)
                os << ',' << p.chi << ',' << p.n << ',' << p.n_hat << ',' << p.p_tilde << ',' << p.p_hat;
        }
        os << '\n';
    }
    os.precision(prec);
}

}  // namespace akmc
