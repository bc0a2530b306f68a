#pragma once

// High-temperature saddle search driver.
//
// Each cycle draws a starting point from the quasistationary distribution
// (simulation clock frozen), integrates until the trajectory leaves the basin
// (clock running), then records the exit pathway (clock frozen). The stopping
// criterion is monitored continuously while the clock runs: Rhat only moves
// at exit events, while Rtilde also grows between events, so its crossing of
// 1 - epsilon is located by bisection inside the running interval.

#include "akmc/error.hpp"
#include "akmc/estimators.hpp"
#include "akmc/events.hpp"
#include "akmc/potential.hpp"
#include "akmc/random.hpp"
#include "akmc/rates.hpp"
#include "akmc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace akmc {

enum class LabelScheme {
    Geometric,  ///< left saddle = 1, right saddle = 2
    Discovery,  ///< labels assigned in the order pathways are first found
};

[[nodiscard]] inline std::string_view to_string(LabelScheme s) noexcept {
    return s == LabelScheme::Geometric ? "geometric" : "discovery";
}

[[nodiscard]] inline std::optional<LabelScheme> parse_label_scheme(std::string_view name) {
    if (name == "geometric") return LabelScheme::Geometric;
    if (name == "discovery") return LabelScheme::Discovery;
    return std::nullopt;
}

struct SearchConfig {
    SdeConfig sde;
    LabelScheme labels = LabelScheme::Geometric;
    std::uint64_t max_cycles = 1'000'000;
    /// Absent: never stop on the estimator (fixed-length runs).
    std::optional<StoppingRule> stop;
    /// Present: end the run after this many exits without raising.
    std::optional<std::uint64_t> n_events;
};

struct SearchResult {
    EventLog log;
    EstimatorTrace trace;
    bool stopped = false;
    double stop_time = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t cycles = 0;
    /// reported_label[g - 1] is the label used in `log` and `trace` for geometric pathway g.
    std::vector<int> reported_label;
};

namespace detail {

/// First t in (lo, hi] with Rtilde(t) > 1 - epsilon, given that the
/// inequality fails at lo and holds at hi and counts are fixed.
[[nodiscard]] inline double rtilde_crossing(const StoppingRule& rule, const Counts& counts, std::span<const double> k_lo,
                                            std::span<const double> k_hi, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (should_stop(rule, r_tilde(counts, k_lo, k_hi, mid)))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

inline void permute_pathways(std::vector<PathwayEstimates>& v, const std::vector<int>& reported) {
    std::vector<PathwayEstimates> out(v.size());
    for (std::size_t g = 0; g < v.size(); ++g) out[static_cast<std::size_t>(reported[g] - 1)] = v[g];
    v = std::move(out);
}

}  // namespace detail

[[nodiscard]] inline SearchResult run_search(const Potential& p, const Basin& basin, const SearchConfig& cfg,
                                             const RateTable& rates, RandomStream& rng) {
    cfg.sde.validate();
    if (cfg.stop) cfg.stop->validate();
    if (!cfg.stop && !cfg.n_events) throw Error(Errc::InvalidArgument, "search needs a stopping rule or an event count");
    if (rates.size() != basin.size()) throw Error(Errc::InvalidArgument, "rate table does not match the basin's pathways");
    if (std::abs(cfg.sde.beta - rates.beta_hi) > 1e-12 * rates.beta_hi)
        throw Error(Errc::InvalidArgument, "search must run at beta_hi of the rate table");

    const std::vector<double> k_lo = rates.k_lo();
    const std::vector<double> k_hi = rates.k_hi();
    const std::vector<double> kappa = rates.has_kappa() ? rates.kappa() : std::vector<double>{};

    SearchResult result;
    result.log.n_pathways = static_cast<int>(basin.size());
    Counts counts(basin.size());
    double t_sim = 0.0;

    for (result.cycles = 1; result.cycles <= cfg.max_cycles; ++result.cycles) {
        const double x0 = sample_qsd(p, basin, cfg.sde, rng);
        const ExitRecord exit = run_until_exit(x0, p, basin, cfg.sde, rng);
        const double t_next = t_sim + exit.exit_time;

        if (cfg.stop && cfg.stop->estimator == EstimatorKind::Tilde && counts.total > 0 &&
            should_stop(*cfg.stop, r_tilde(counts, k_lo, k_hi, t_next))) {
            // Crossing while the clock runs: the in-flight trajectory is discarded.
            const double t_star = detail::rtilde_crossing(*cfg.stop, counts, k_lo, k_hi, t_sim, t_next);
            result.trace.rows.push_back(evaluate_estimators(t_star, counts, k_lo, k_hi, kappa));
            result.stopped = true;
            result.stop_time = t_star;
            result.log.horizon = t_star;
            break;
        }

        t_sim = t_next;
        result.log.append(t_sim, exit.pathway);
        counts.add(exit.pathway);
        result.trace.rows.push_back(evaluate_estimators(t_sim, counts, k_lo, k_hi, kappa));

        if (cfg.stop && should_stop(*cfg.stop, estimate(cfg.stop->estimator, counts, k_lo, k_hi, t_sim))) {
            result.stopped = true;
            result.stop_time = t_sim;
            break;
        }
        if (cfg.n_events && result.log.size() >= *cfg.n_events) break;
    }
    if (result.cycles > cfg.max_cycles)
        throw Error(Errc::MaxCyclesExceeded, "search did not finish within " + std::to_string(cfg.max_cycles) + " cycles");

    result.reported_label.resize(basin.size());
    for (std::size_t g = 0; g < basin.size(); ++g) result.reported_label[g] = static_cast<int>(g) + 1;
    if (cfg.labels == LabelScheme::Discovery) {
        std::vector<int> order;
        for (const auto& e : result.log.events)
            if (std::find(order.begin(), order.end(), e.pathway) == order.end()) order.push_back(e.pathway);
        for (int g = 1; g <= static_cast<int>(basin.size()); ++g)
            if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
        for (std::size_t i = 0; i < order.size(); ++i) result.reported_label[static_cast<std::size_t>(order[i] - 1)] = static_cast<int>(i) + 1;
        for (auto& e : result.log.events) e.pathway = result.reported_label[static_cast<std::size_t>(e.pathway - 1)];
        for (auto& row : result.trace.rows) detail::permute_pathways(row.pathways, result.reported_label);
    }
    return result;
}

}  // namespace akmc
