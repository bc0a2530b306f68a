#pragma once

// Eyring-Kramers rates and the modified-Arrhenius test system.

#include "akmc/error.hpp"
#include "akmc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace akmc {

/// Harmonic prefactor |lambda_1|/pi * sqrt(|det H(m) / det H(s)|).
[[nodiscard]] inline double eyring_kramers_prefactor(double lambda1, double det_hessian_min, double det_hessian_saddle) {
    if (!(lambda1 < 0.0)) throw Error(Errc::BadCurvature, "saddle eigenvalue lambda_1 must be negative");
    if (!(det_hessian_min > 0.0)) throw Error(Errc::BadCurvature, "Hessian at the minimum must be positive definite");
    if (det_hessian_saddle == 0.0 || !std::isfinite(det_hessian_saddle))
        throw Error(Errc::BadCurvature, "Hessian at the saddle must be non-degenerate");
    return std::abs(lambda1) / std::numbers::pi * std::sqrt(std::abs(det_hessian_min / det_hessian_saddle));
}

/// k = g exp(-beta * barrier), the one-dimensional case of the determinant form.
[[nodiscard]] inline double eyring_kramers(const PathwayInfo& info, double curvature_at_min, double beta) {
    if (!(info.barrier > 0.0)) throw Error(Errc::BadCurvature, "barrier must be positive");
    if (!(curvature_at_min > 0.0)) throw Error(Errc::BadCurvature, "curvature at the minimum must be positive");
    const double g = eyring_kramers_prefactor(info.curvature_at_saddle, curvature_at_min, info.curvature_at_saddle);
    return g * std::exp(-beta * info.barrier);
}

/// (beta_lo / beta_hi)^n * g * exp(-beta_hi * barrier)
[[nodiscard]] inline double modified_arrhenius(double g, double barrier, double beta_hi, double beta_lo, double n) {
    return std::pow(beta_lo / beta_hi, n) * g * std::exp(-beta_hi * barrier);
}

struct PathwayRates {
    int label = 0;
    double barrier = 0.0;
    double k_lo = 0.0;
    double k_hi = 0.0;
    /// True intensity of the search process; NaN when unknown (SDE mode).
    double kappa = std::numeric_limits<double>::quiet_NaN();
};

struct RateTable {
    std::vector<PathwayRates> pathways;  ///< indexed by label - 1
    double beta_lo = 0.0;
    double beta_hi = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return pathways.size(); }

    /// K, the total low-temperature rate.
    [[nodiscard]] double total_low_rate() const noexcept {
        return std::accumulate(pathways.begin(), pathways.end(), 0.0,
                               [](double s, const PathwayRates& r) { return s + r.k_lo; });
    }

    [[nodiscard]] bool has_kappa() const noexcept {
        return !pathways.empty() &&
               std::all_of(pathways.begin(), pathways.end(), [](const PathwayRates& r) { return std::isfinite(r.kappa); });
    }

    [[nodiscard]] std::vector<double> k_lo() const { return column(&PathwayRates::k_lo); }
    [[nodiscard]] std::vector<double> k_hi() const { return column(&PathwayRates::k_hi); }
    [[nodiscard]] std::vector<double> kappa() const { return column(&PathwayRates::kappa); }

    void validate() const {
        if (pathways.empty()) throw Error(Errc::InvalidArgument, "rate table has no pathways");
        if (!(beta_lo > beta_hi && beta_hi > 0.0))
            throw Error(Errc::InvalidArgument, "rate table requires beta_lo > beta_hi > 0");
        for (std::size_t i = 0; i < pathways.size(); ++i) {
            const auto& r = pathways[i];
            if (r.label != static_cast<int>(i) + 1) throw Error(Errc::InvalidArgument, "rate table labels must be 1..N in order");
            if (!(r.k_lo > 0.0) || !(r.k_hi > 0.0))
                throw Error(Errc::InvalidArgument, "pathway " + std::to_string(r.label) + " has a non-positive rate");
            if (std::isfinite(r.kappa) && !(r.kappa > 0.0))
                throw Error(Errc::InvalidArgument, "pathway " + std::to_string(r.label) + " has non-positive kappa");
        }
    }

private:
    [[nodiscard]] std::vector<double> column(double PathwayRates::*field) const {
        std::vector<double> out;
        out.reserve(pathways.size());
        for (const auto& r : pathways) out.push_back(r.*field);
        return out;
    }
};

/// Eyring-Kramers rates of every pathway of `basin` at both temperatures.
/// kappa is left unknown.
[[nodiscard]] inline RateTable rates_from_basin(const Basin& basin, double beta_lo, double beta_hi) {
    RateTable table;
    table.beta_lo = beta_lo;
    table.beta_hi = beta_hi;
    for (const auto& info : basin.pathways) {
        PathwayRates r;
        r.label = info.label;
        r.barrier = info.barrier;
        r.k_lo = eyring_kramers(info, basin.curvature_at_min, beta_lo);
        r.k_hi = eyring_kramers(info, basin.curvature_at_min, beta_hi);
        table.pathways.push_back(r);
    }
    table.validate();
    return table;
}

/// Parameters of the 20-pathway modified-Arrhenius test system.
struct TestSystemParams {
    double n = 0.0;  ///< deviation exponent
    double beta_hi = 2.5;
    double beta_lo = 10.0;
    int n_pathways = 20;
    double prefactor = 1.0;  ///< g_j, shared by all pathways and both temperatures

    /// V(s_j) - V(m) = 1 + 4 j / 19, j = 0..n_pathways-1.
    [[nodiscard]] double barrier(int j) const {
        return 1.0 + 4.0 * static_cast<double>(j) / static_cast<double>(n_pathways - 1);
    }

    void validate() const {
        if (!std::isfinite(n)) throw Error(Errc::InvalidArgument, "testsystem.n must be finite");
        if (!(beta_lo > beta_hi && beta_hi > 0.0)) throw Error(Errc::InvalidArgument, "testsystem requires beta_lo > beta_hi > 0");
        if (n_pathways < 2) throw Error(Errc::InvalidArgument, "testsystem.n_pathways must be >= 2");
        if (!(prefactor > 0.0)) throw Error(Errc::InvalidArgument, "testsystem.prefactor must be positive");
    }
};

/// Pathway label j+1 carries barrier 1 + 4j/19. k_lo and k_hi follow the
/// unmodified Arrhenius law; kappa follows the modified law with exponent n.
[[nodiscard]] inline RateTable build_test_system(const TestSystemParams& params) {
    params.validate();
    RateTable table;
    table.beta_lo = params.beta_lo;
    table.beta_hi = params.beta_hi;
    for (int j = 0; j < params.n_pathways; ++j) {
        PathwayRates r;
        r.label = j + 1;
        r.barrier = params.barrier(j);
        r.k_lo = params.prefactor * std::exp(-params.beta_lo * r.barrier);
        r.k_hi = params.prefactor * std::exp(-params.beta_hi * r.barrier);
        r.kappa = modified_arrhenius(params.prefactor, r.barrier, params.beta_hi, params.beta_lo, params.n);
        table.pathways.push_back(r);
    }
    return table;
}

[[nodiscard]] inline RateTable build_test_system(double n) {
    TestSystemParams params;
    params.n = n;
    return build_test_system(params);
}

/// CSV with header `pathway,barrier,k_lo,k_hi,kappa`.
inline void write_csv(std::ostream& os, const RateTable& table) {
    const auto prec = os.precision(17);
    os << "pathway,barrier,k_lo,k_hi,kappa\n";
    for (const auto& r : table.pathways)
        os << r.label << ',' << r.barrier << ',' << r.k_lo << ',' << r.k_hi << ',' << r.kappa << '\n';
    os.precision(prec);
}

}  // namespace akmc
