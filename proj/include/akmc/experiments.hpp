#pragma once

// Replica ensembles on the modified-Arrhenius test system, statistical checks
// of the Poisson structure of exit logs, and figure-data export.

#include "akmc/bounds.hpp"
#include "akmc/error.hpp"
#include "akmc/estimators.hpp"
#include "akmc/events.hpp"
#include "akmc/potential.hpp"
#include "akmc/random.hpp"
#include "akmc/rates.hpp"
#include "akmc/sde.hpp"
#include "akmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace akmc {

/// Direct simulation of the test system: independent Poisson processes with
/// intensities kappa_j, merged in time order.
[[nodiscard]] inline EventLog simulate_poisson_log(std::span<const double> kappa, double horizon, RandomStream& rng) {
    if (!(horizon > 0.0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
    EventLog log;
    log.n_pathways = static_cast<int>(kappa.size());
    for (std::size_t j = 0; j < kappa.size(); ++j) {
        for (double t = rng.exponential(kappa[j]); t <= horizon; t += rng.exponential(kappa[j]))
            log.events.push_back({t, static_cast<int>(j) + 1});
    }
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const ExitEvent& a, const ExitEvent& b) { return a.time < b.time; });
    log.horizon = horizon;
    return log;
}

[[nodiscard]] inline EventLog simulate_test_system(const TestSystemParams& params, double horizon, RandomStream& rng) {
    const auto kappa = build_test_system(params).kappa();
    return simulate_poisson_log(kappa, horizon, rng);
}

/// Counts N_j(t) on an increasing time grid, drawn as independent Poisson
/// increments between consecutive grid times. Same law as counts_at applied to
/// simulate_poisson_log, without materializing the events.
[[nodiscard]] inline std::vector<Counts> sample_counts_on_grid(std::span<const double> kappa, std::span<const double> t_grid,
                                                               RandomStream& rng) {
    std::vector<Counts> out;
    out.reserve(t_grid.size());
    std::vector<long long> n(kappa.size(), 0);
    double prev = 0.0;
    for (double t : t_grid) {
        if (t < prev) throw Error(Errc::InvalidArgument, "time grid must be nondecreasing and nonnegative");
        for (std::size_t j = 0; j < kappa.size(); ++j) n[j] += rng.poisson(kappa[j] * (t - prev));
        out.push_back(Counts::from(n));
        prev = t;
    }
    return out;
}

[[nodiscard]] inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw Error(Errc::InvalidArgument, "log grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

/// Log-spaced grid spanning [1e-2 / kappa_max, 1e2 / kappa_min].
[[nodiscard]] inline std::vector<double> default_figure_grid(const TestSystemParams& params, std::size_t points = 60) {
    const auto kappa = build_test_system(params).kappa();
    const auto [mn, mx] = std::minmax_element(kappa.begin(), kappa.end());
    return log_grid(1e-2 / *mx, 1e2 / *mn, points);
}

struct EnsemblePoint {
    double t = 0.0;
    double r_bar = 0.0;  ///< analytic, from the true kappa_j
    stats::MeanSe r;
    stats::MeanSe r_tilde;
    stats::MeanSe r_hat;
    stats::MeanSe tilde_minus_r;  ///< paired per replica
    stats::MeanSe hat_minus_r;
};

struct EnsembleStats {
    TestSystemParams params;
    std::vector<EnsemblePoint> points;
    std::size_t n_replicas = 0;
    std::uint64_t seed = 0;
};

/// Replica r draws from RandomStream(seed, r). Rtilde uses the unmodified
/// high-temperature rates k_hi; R and Rhat use k_lo; Rbar uses the true kappa.
[[nodiscard]] inline EnsembleStats run_ensemble(const TestSystemParams& params, std::span<const double> t_grid,
                                                std::size_t n_replicas, std::uint64_t seed) {
    if (n_replicas < 2) throw Error(Errc::InvalidArgument, "ensemble needs at least 2 replicas");
    const RateTable rt = build_test_system(params);
    const auto k_lo = rt.k_lo();
    const auto k_hi = rt.k_hi();
    const auto kappa = rt.kappa();

    const std::size_t nt = t_grid.size();
    std::vector<stats::Accumulator> acc_r(nt), acc_tilde(nt), acc_hat(nt), acc_dt(nt), acc_dh(nt);
    for (std::size_t rep = 0; rep < n_replicas; ++rep) {
        RandomStream rng(seed, rep);
        const auto counts = sample_counts_on_grid(kappa, t_grid, rng);
        for (std::size_t i = 0; i < nt; ++i) {
            const double r = proportion_found(counts[i], k_lo);
            const double rt_ = r_tilde(counts[i], k_lo, k_hi, t_grid[i]);
            const double rh = r_hat(counts[i], k_lo);
            acc_r[i].add(r);
            acc_tilde[i].add(rt_);
            acc_hat[i].add(rh);
            acc_dt[i].add(rt_ - r);
            acc_dh[i].add(rh - r);
        }
    }

    EnsembleStats out;
    out.params = params;
    out.n_replicas = n_replicas;
    out.seed = seed;
    for (std::size_t i = 0; i < nt; ++i) {
        EnsemblePoint p;
        p.t = t_grid[i];
        p.r_bar = expected_proportion(kappa, k_lo, t_grid[i]);
        p.r = {acc_r[i].mean(), acc_r[i].se()};
        p.r_tilde = {acc_tilde[i].mean(), acc_tilde[i].se()};
        p.r_hat = {acc_hat[i].mean(), acc_hat[i].se()};
        p.tilde_minus_r = {acc_dt[i].mean(), acc_dt[i].se()};
        p.hat_minus_r = {acc_dh[i].mean(), acc_dh[i].se()};
        out.points.push_back(p);
    }
    return out;
}

/// Columns `time,exact,chill_1,chill_2` = mean(1-R), mean(1-Rtilde), mean(1-Rhat).
inline void write_figure_csv(std::ostream& os, const EnsembleStats& stats) {
    const auto prec = os.precision(17);
    os << "time,exact,chill_1,chill_2\n";
    for (const auto& p : stats.points)
        os << p.t << ',' << 1.0 - p.r.mean << ',' << 1.0 - p.r_tilde.mean << ',' << 1.0 - p.r_hat.mean << '\n';
    os.precision(prec);
}

inline void export_figure_data(const EnsembleStats& stats, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
    write_figure_csv(os, stats);
    if (!os) throw Error(Errc::Io, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Poisson-structure verification

/// QSD-initialized exits on an SDE testbed, accumulated on one clock. Labels
/// are geometric.
[[nodiscard]] inline EventLog sde_exit_log(const Potential& p, const Basin& basin, const SdeConfig& cfg, std::size_t n_events,
                                           RandomStream& rng) {
    cfg.validate();
    EventLog log;
    log.n_pathways = static_cast<int>(basin.size());
    double t = 0.0;
    for (std::size_t i = 0; i < n_events; ++i) {
        const double x0 = sample_qsd(p, basin, cfg, rng);
        const ExitRecord exit = run_until_exit(x0, p, basin, cfg, rng);
        t += exit.exit_time;
        log.append(t, exit.pathway);
    }
    return log;
}

struct PoissonCheckConfig {
    double alpha = 0.01;
    std::size_t n_windows = 50;
    int n_bootstrap = 2000;
    std::size_t n_interarrival_bins = 4;
    /// Pathways with fewer events are pooled (contingency) or skipped (Fano).
    std::size_t min_events = 50;
    std::uint64_t seed = 0;
};

struct PoissonReport {
    std::string source;
    std::size_t n_events = 0;
    std::vector<stats::TestResult> tests;

    [[nodiscard]] bool passed() const {
        return std::all_of(tests.begin(), tests.end(), [](const stats::TestResult& t) { return t.passed; });
    }
    [[nodiscard]] const stats::TestResult* find(const std::string& name) const {
        for (const auto& t : tests)
            if (t.name == name) return &t;
        return nullptr;
    }
};

/// (i) KS exponentiality of merged interarrivals, (ii) independence of label
/// and interarrival quantile bin, (iii) per-pathway dispersion of counts in
/// equal windows.
[[nodiscard]] inline PoissonReport verify_poisson(const EventLog& log, const PoissonCheckConfig& cfg, std::string source = "") {
    if (log.size() < 2 * cfg.n_interarrival_bins)
        throw Error(Errc::TooFewSamples, "too few events for Poisson verification");
    PoissonReport report;
    report.source = std::move(source);
    report.n_events = log.size();

    std::vector<double> gaps;
    gaps.reserve(log.size());
    double prev = 0.0;
    for (const auto& e : log.events) {
        gaps.push_back(e.time - prev);
        prev = e.time;
    }
    report.tests.push_back(stats::ks_exponential_test(gaps, cfg.alpha, cfg.n_bootstrap, cfg.seed));

    // Label x interarrival-bin table. Rare labels are pooled into one row.
    std::vector<std::size_t> per_label(static_cast<std::size_t>(log.n_pathways), 0);
    for (const auto& e : log.events) ++per_label[static_cast<std::size_t>(e.pathway - 1)];
    std::vector<int> row_of(per_label.size(), -1);
    int n_rows = 0;
    bool pooled = false;
    for (std::size_t j = 0; j < per_label.size(); ++j) {
        if (per_label[j] >= cfg.min_events) row_of[j] = n_rows++;
        else if (per_label[j] > 0) pooled = true;
    }
    const int pooled_row = pooled ? n_rows++ : -1;
    for (std::size_t j = 0; j < per_label.size(); ++j)
        if (row_of[j] < 0 && per_label[j] > 0) row_of[j] = pooled_row;

    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (std::size_t b = 1; b < cfg.n_interarrival_bins; ++b)
        cuts.push_back(sorted[b * sorted.size() / cfg.n_interarrival_bins]);
    std::vector<std::vector<double>> table(static_cast<std::size_t>(n_rows), std::vector<double>(cfg.n_interarrival_bins, 0.0));
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto bin = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), gaps[i]) - cuts.begin());
        table[static_cast<std::size_t>(row_of[static_cast<std::size_t>(log.events[i].pathway - 1)])][bin] += 1.0;
    }
    report.tests.push_back(stats::contingency_test(table, cfg.alpha));

    const double horizon = std::max(log.horizon, log.events.back().time);
    const double width = horizon / static_cast<double>(cfg.n_windows);
    for (std::size_t j = 0; j < per_label.size(); ++j) {
        if (per_label[j] < cfg.min_events) continue;
        std::vector<double> windows(cfg.n_windows, 0.0);
        for (const auto& e : log.events) {
            if (e.pathway != static_cast<int>(j) + 1) continue;
            const auto w = std::min(cfg.n_windows - 1, static_cast<std::size_t>(e.time / width));
            windows[w] += 1.0;
        }
        auto t = stats::dispersion_test(windows, cfg.alpha);
        t.name = "fano_pathway_" + std::to_string(j + 1);
        report.tests.push_back(std::move(t));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Conditional unbiasedness of Nhat and conservativeness of phat

struct RateEstPoint {
    double kappa_t = 0.0;
    std::size_t n_samples = 0;  ///< accepted draws with N_j >= 1
    stats::MeanSe n_hat;
    stats::MeanSe p_hat;
    double p = 0.0;  ///< 1 - exp(-kappa_t)
    bool unbiased = false;      ///< |mean Nhat - kappa_t| <= 3 SE
    bool conservative = false;  ///< mean phat <= p + 3 SE
};

/// Draws N ~ Poisson(kappa_t) until `n_samples` draws with N >= 1 are collected.
[[nodiscard]] inline std::vector<RateEstPoint> verify_rate_est(std::span<const double> kappa_t_values, std::size_t n_samples,
                                                               std::uint64_t seed) {
    std::vector<RateEstPoint> out;
    for (std::size_t i = 0; i < kappa_t_values.size(); ++i) {
        const double kt = kappa_t_values[i];
        if (!(kt > 0.0)) throw Error(Errc::InvalidArgument, "kappa_t must be positive");
        RandomStream rng(seed, i);
        stats::Accumulator acc_n, acc_p;
        while (acc_n.count() < n_samples) {
            const long long n = rng.poisson(kt);
            if (n < 1) continue;
            acc_n.add(static_cast<double>(n_hat(n)));
            acc_p.add(p_hat(n));
        }
        RateEstPoint pt;
        pt.kappa_t = kt;
        pt.n_samples = n_samples;
        pt.n_hat = {acc_n.mean(), acc_n.se()};
        pt.p_hat = {acc_p.mean(), acc_p.se()};
        pt.p = -std::expm1(-kt);
        pt.unbiased = std::abs(pt.n_hat.mean - kt) <= 3.0 * pt.n_hat.se;
        pt.conservative = pt.p_hat.mean <= pt.p + 3.0 * pt.p_hat.se;
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical check of the analytic error bounds

/// Rtilde uses the table's k_hi; the error of ptilde is evaluated against the
/// true kappa.
[[nodiscard]] inline BoundReport verify_error_bounds(const RateTable& rt, std::span<const double> t_grid, std::size_t n_replicas,
                                                     std::uint64_t seed) {
    if (n_replicas < 2) throw Error(Errc::InvalidArgument, "need at least 2 replicas");
    const auto k_lo = rt.k_lo();
    const auto k_hi = rt.k_hi();
    const auto kappa = rt.kappa();
    BoundReport report;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        std::vector<double> tilde(n_replicas), hat(n_replicas);
        for (std::size_t rep = 0; rep < n_replicas; ++rep) {
            RandomStream rng(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)), rep);
            std::vector<long long> n(kappa.size());
            for (std::size_t j = 0; j < kappa.size(); ++j) n[j] = rng.poisson(kappa[j] * t);
            const Counts c = Counts::from(std::move(n));
            tilde[rep] = r_tilde(c, k_lo, k_hi, t);
            hat[rep] = r_hat(c, k_lo);
        }
        const BoundInputs in = bound_inputs(rt, t);
        const auto tilde_err = p_tilde_errors(rt, t);
        const auto hat_mom = p_hat_moments_all(rt, t);

        BoundRow row_t;
        row_t.t = t;
        row_t.target = in.r_bar;
        row_t.which = EstimatorKind::Tilde;
        row_t.bound = tilde_bounds(rt, t, tilde_err);
        row_t.empirical = empirical_error(tilde, in.r_bar);
        row_t.inputs = in;
        report.rows.push_back(row_t);

        BoundRow row_h = row_t;
        row_h.which = EstimatorKind::Hat;
        row_h.bound = hat_bounds(rt, t, hat_mom);
        row_h.empirical = empirical_error(hat, in.r_bar);
        report.rows.push_back(row_h);
    }
    return report;
}

[[nodiscard]] inline BoundReport verify_error_bounds(const TestSystemParams& params, std::span<const double> t_grid,
                                                     std::size_t n_replicas, std::uint64_t seed) {
    return verify_error_bounds(build_test_system(params), t_grid, n_replicas, seed);
}

/// Times at which max_j q_j(t) = exp(-kappa_min t) takes log-spaced values
/// between q_hi and q_lo.
[[nodiscard]] inline std::vector<double> grid_for_max_q(const RateTable& rt, double q_hi, double q_lo, std::size_t points) {
    const auto kappa = rt.kappa();
    const double kmin = *std::min_element(kappa.begin(), kappa.end());
    return log_grid(-std::log(q_hi) / kmin, -std::log(q_lo) / kmin, points);
}

// ---------------------------------------------------------------------------
// Search-process intensities from SDE exits

struct IntensityEstimate {
    std::vector<long long> counts;  ///< per pathway
    std::vector<double> kappa;      ///< counts / total time
    std::vector<double> kappa_se;   ///< sqrt(counts) / total time
    double total_time = 0.0;
    std::size_t n_exits = 0;
};

[[nodiscard]] inline IntensityEstimate estimate_intensities(const Potential& p, const Basin& basin, const SdeConfig& cfg,
                                                            std::size_t n_exits, RandomStream& rng) {
    const EventLog log = sde_exit_log(p, basin, cfg, n_exits, rng);
    IntensityEstimate est;
    est.n_exits = n_exits;
    est.total_time = log.horizon;
    est.counts.assign(basin.size(), 0);
    for (const auto& e : log.events) ++est.counts[static_cast<std::size_t>(e.pathway - 1)];
    for (long long c : est.counts) {
        est.kappa.push_back(static_cast<double>(c) / est.total_time);
        est.kappa_se.push_back(std::sqrt(static_cast<double>(c)) / est.total_time);
    }
    return est;
}

}  // namespace akmc
