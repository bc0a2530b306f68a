#pragma once

// Euler-Maruyama integration of overdamped Langevin dynamics
//   dX = -V'(X) dt + sqrt(2/beta) dW
// with first-exit detection and quasistationary sampling inside a basin.

#include "akmc/error.hpp"
#include "akmc/potential.hpp"
#include "akmc/random.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace akmc {

struct SdeConfig {
    double beta = 1.0;
    double dt = 1e-4;
    double t_corr = 5.0;
    std::uint64_t max_steps = 2'000'000'000ULL;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(Errc::InvalidArgument, "sde.beta must be positive");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::InvalidArgument, "sde.dt must be positive");
        if (!(t_corr >= 0.0) || !std::isfinite(t_corr)) throw Error(Errc::InvalidArgument, "sde.t_corr must be >= 0");
        if (max_steps == 0) throw Error(Errc::InvalidArgument, "sde.max_steps must be positive");
    }
};

/// Five relaxation times of the well.
[[nodiscard]] inline double default_t_corr(const Basin& basin) { return 5.0 / basin.curvature_at_min; }

struct ExitRecord {
    double exit_time = 0.0;  ///< steps * dt, measured from the trajectory start
    int pathway = 0;
    double exit_point = 0.0;
};

[[nodiscard]] inline double em_step(double x, const Potential& p, const SdeConfig& cfg, double gaussian) {
    const double next = x - p.gradient(x) * cfg.dt + std::sqrt(2.0 * cfg.dt / cfg.beta) * gaussian;
    if (!std::isfinite(next)) throw Error(Errc::NonFinite, "Euler-Maruyama step left the finite range from x=" + std::to_string(x));
    return next;
}

/// Endpoint of a trajectory that stayed in the basin for t_corr. A trajectory
/// that exits early is restarted from `start` with its confinement clock reset.
[[nodiscard]] inline double sample_qsd(const Potential& p, const Basin& basin, const SdeConfig& cfg, RandomStream& rng,
                                       double start) {
    if (!basin.contains(start)) throw Error(Errc::InvalidArgument, "QSD sampling must start inside the basin");
    const auto needed = static_cast<std::uint64_t>(std::llround(cfg.t_corr / cfg.dt));
    if (needed == 0) return start;

    const double noise = std::sqrt(2.0 * cfg.dt / cfg.beta);
    double x = start;
    std::uint64_t confined = 0;
    for (std::uint64_t total = 0; total < cfg.max_steps; ++total) {
        x = x - p.gradient(x) * cfg.dt + noise * rng.normal();
        if (!basin.contains(x)) {
            if (!std::isfinite(x)) throw Error(Errc::NonFinite, "QSD trajectory diverged");
            x = start;
            confined = 0;
            continue;
        }
        if (++confined == needed) return x;
    }
    throw Error(Errc::MaxStepsExceeded, "QSD sampling exhausted " + std::to_string(cfg.max_steps) + " steps");
}

[[nodiscard]] inline double sample_qsd(const Potential& p, const Basin& basin, const SdeConfig& cfg, RandomStream& rng) {
    return sample_qsd(p, basin, cfg, rng, basin.minimum);
}

/// Integrates from `start` until the first grid time whose endpoint is outside (a, b).
[[nodiscard]] inline ExitRecord run_until_exit(double start, const Potential& p, const Basin& basin, const SdeConfig& cfg,
                                               RandomStream& rng) {
    if (!basin.contains(start)) throw Error(Errc::InvalidArgument, "trajectory must start inside the basin");
    const double noise = std::sqrt(2.0 * cfg.dt / cfg.beta);
    double x = start;
    for (std::uint64_t n = 1; n <= cfg.max_steps; ++n) {
        x = x - p.gradient(x) * cfg.dt + noise * rng.normal();
        if (!basin.contains(x)) {
            if (!std::isfinite(x)) throw Error(Errc::NonFinite, "exit trajectory diverged");
            return ExitRecord{static_cast<double>(n) * cfg.dt, classify_exit(basin, x), x};
        }
    }
    throw Error(Errc::MaxStepsExceeded, "no exit within " + std::to_string(cfg.max_steps) + " steps");
}

}  // namespace akmc
