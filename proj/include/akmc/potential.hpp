#pragma once

// Analytic one-dimensional energy landscapes and their basin geometry.

#include "akmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace akmc {

enum class PotentialKind {
    DoubleWell,  ///< V(x) = x^4/4 - x^2/2
    TwoSaddle,   ///< V(x) = -x^4/4 - c x^3/3 + x^2/2
    Quadratic,   ///< V(x) = omega x^2 / 2
};

[[nodiscard]] inline std::string_view to_string(PotentialKind kind) noexcept {
    switch (kind) {
        case PotentialKind::DoubleWell: return "double-well";
        case PotentialKind::TwoSaddle: return "two-saddle";
        case PotentialKind::Quadratic: return "quadratic";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<PotentialKind> parse_potential_kind(std::string_view name) {
    if (name == "double-well") return PotentialKind::DoubleWell;
    if (name == "two-saddle") return PotentialKind::TwoSaddle;
    if (name == "quadratic") return PotentialKind::Quadratic;
    return std::nullopt;
}

/// A built-in analytic potential. Immutable once constructed.
class Potential {
public:
    [[nodiscard]] static Potential double_well() { return Potential(PotentialKind::DoubleWell, 0.0); }

    /// Single well at 0 with saddles at the roots of x^2 + c x - 1 = 0.
    [[nodiscard]] static Potential two_saddle(double c = 0.2) {
        if (!std::isfinite(c)) throw Error(Errc::InvalidArgument, "two-saddle asymmetry c must be finite");
        return Potential(PotentialKind::TwoSaddle, c);
    }

    [[nodiscard]] static Potential quadratic(double omega) {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw Error(Errc::InvalidArgument, "quadratic stiffness must be positive");
        return Potential(PotentialKind::Quadratic, omega);
    }

    [[nodiscard]] PotentialKind kind() const noexcept { return kind_; }
    /// The family's single coefficient: c for two-saddle, omega for quadratic, unused otherwise.
    [[nodiscard]] double parameter() const noexcept { return param_; }

    [[nodiscard]] double value(double x) const noexcept {
        const double x2 = x * x;
        switch (kind_) {
            case PotentialKind::DoubleWell: return 0.25 * x2 * x2 - 0.5 * x2;
            case PotentialKind::TwoSaddle: return -0.25 * x2 * x2 - param_ * x2 * x / 3.0 + 0.5 * x2;
            case PotentialKind::Quadratic: return 0.5 * param_ * x2;
        }
        return 0.0;
    }

    [[nodiscard]] double gradient(double x) const noexcept {
        const double x2 = x * x;
        switch (kind_) {
            case PotentialKind::DoubleWell: return x2 * x - x;
            case PotentialKind::TwoSaddle: return -x2 * x - param_ * x2 + x;
            case PotentialKind::Quadratic: return param_ * x;
        }
        return 0.0;
    }

    [[nodiscard]] double hessian(double x) const noexcept {
        switch (kind_) {
            case PotentialKind::DoubleWell: return 3.0 * x * x - 1.0;
            case PotentialKind::TwoSaddle: return -3.0 * x * x - 2.0 * param_ * x + 1.0;
            case PotentialKind::Quadratic: return param_;
        }
        return 0.0;
    }

    /// Analytic starting points for the minima and saddles of the family.
    [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> stationary_seeds() const {
        switch (kind_) {
            case PotentialKind::DoubleWell: return {{-1.0, 1.0}, {0.0}};
            case PotentialKind::TwoSaddle: {
                const double disc = std::sqrt(param_ * param_ + 4.0);
                return {{0.0}, {(-param_ - disc) / 2.0, (-param_ + disc) / 2.0}};
            }
            case PotentialKind::Quadratic: return {{0.0}, {}};
        }
        return {};
    }

private:
    Potential(PotentialKind kind, double param) : kind_(kind), param_(param) {}

    PotentialKind kind_;
    double param_;
};

[[nodiscard]] inline double evaluate(const Potential& p, double x) noexcept { return p.value(x); }
[[nodiscard]] inline double gradient(const Potential& p, double x) noexcept { return p.gradient(x); }
[[nodiscard]] inline double hessian(const Potential& p, double x) noexcept { return p.hessian(x); }

struct PathwayInfo {
    int label = 0;
    double saddle = 0.0;
    double barrier = 0.0;               ///< V(saddle) - V(minimum)
    double curvature_at_saddle = 0.0;   ///< lambda_1 < 0
    double curvature_at_min = 0.0;      ///< > 0
};

/// Basin of attraction (a, b) of one minimum. The boundary points are the
/// saddles themselves; an infinite endpoint has no pathway.
struct Basin {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();
    double minimum = 0.0;
    double value_at_min = 0.0;
    double curvature_at_min = 0.0;
    std::vector<PathwayInfo> pathways;  ///< sorted by label
    std::optional<int> left_label;      ///< pathway owning the exit at a
    std::optional<int> right_label;     ///< pathway owning the exit at b

    [[nodiscard]] bool contains(double x) const noexcept { return x > a && x < b; }
    [[nodiscard]] std::size_t size() const noexcept { return pathways.size(); }
    [[nodiscard]] const PathwayInfo& pathway(int label) const { return pathways.at(static_cast<std::size_t>(label - 1)); }
};

namespace detail {

inline constexpr double kNewtonTolerance = 1e-12;
inline constexpr int kNewtonMaxIterations = 100;

[[nodiscard]] inline double newton_stationary(const Potential& p, double seed) {
    double x = seed;
    for (int it = 0; it < kNewtonMaxIterations; ++it) {
        const double g = p.gradient(x);
        if (std::abs(g) <= kNewtonTolerance) return x;
        const double h = p.hessian(x);
        if (h == 0.0 || !std::isfinite(h)) break;
        x -= g / h;
        if (!std::isfinite(x)) break;
    }
    if (std::abs(p.gradient(x)) <= kNewtonTolerance) return x;
    throw Error(Errc::NoConvergence, "Newton refinement from seed " + std::to_string(seed) + " did not converge");
}

}  // namespace detail

/// Locates the single minimum inside `search_interval` and the saddles
/// flanking it, refined by Newton iteration on V'.
[[nodiscard]] inline Basin stationary_points(const Potential& p, std::pair<double, double> search_interval) {
    const auto [lo, hi] = search_interval;
    if (!(lo < hi)) throw Error(Errc::InvalidArgument, "search interval must satisfy lo < hi");
    const auto in_range = [lo, hi](double x) { return x >= lo && x <= hi; };

    auto [min_seeds, saddle_seeds] = p.stationary_seeds();
    std::vector<double> minima;
    for (double s : min_seeds) {
        if (!in_range(s)) continue;
        const double m = detail::newton_stationary(p, s);
        if (!(p.hessian(m) > 0.0))
            throw Error(Errc::WrongSignature, "point " + std::to_string(m) + " registered as minimum has V'' <= 0");
        minima.push_back(m);
    }
    if (minima.size() != 1)
        throw Error(Errc::InvalidArgument, "search interval must contain exactly one minimum of " +
                                               std::string(to_string(p.kind())));

    Basin basin;
    basin.minimum = minima.front();
    basin.value_at_min = p.value(basin.minimum);
    basin.curvature_at_min = p.hessian(basin.minimum);

    std::optional<double> left;
    std::optional<double> right;
    for (double s : saddle_seeds) {
        if (!in_range(s)) continue;
        const double x = detail::newton_stationary(p, s);
        if (!(p.hessian(x) < 0.0))
            throw Error(Errc::WrongSignature, "point " + std::to_string(x) + " registered as saddle has V'' >= 0");
        if (x < basin.minimum && (!left || x > *left)) left = x;
        if (x > basin.minimum && (!right || x < *right)) right = x;
    }
    if (!left && !right)
        throw Error(Errc::WrongSignature, std::string(to_string(p.kind())) + " has no saddle in the search interval");

    const auto make_pathway = [&](int label, double s) {
        PathwayInfo info;
        info.label = label;
        info.saddle = s;
        info.barrier = p.value(s) - basin.value_at_min;
        info.curvature_at_saddle = p.hessian(s);
        info.curvature_at_min = basin.curvature_at_min;
        if (!(info.barrier > 0.0))
            throw Error(Errc::WrongSignature, "saddle " + std::to_string(s) + " lies below the minimum");
        return info;
    };

    int label = 0;
    if (left) {
        basin.a = *left;
        basin.left_label = ++label;
        basin.pathways.push_back(make_pathway(label, *left));
    }
    if (right) {
        basin.b = *right;
        basin.right_label = ++label;
        basin.pathways.push_back(make_pathway(label, *right));
    }
    return basin;
}

/// Pathway label of a boundary crossing.
[[nodiscard]] inline int classify_exit(const Basin& basin, double exit_point) {
    if (basin.contains(exit_point))
        throw Error(Errc::InsideBasin, "exit point " + std::to_string(exit_point) + " lies inside the basin");
    if (exit_point <= basin.a) {
        if (!basin.left_label) throw Error(Errc::OutOfRange, "basin has no pathway at its left end");
        return *basin.left_label;
    }
    if (!basin.right_label) throw Error(Errc::OutOfRange, "basin has no pathway at its right end");
    return *basin.right_label;
}

}  // namespace akmc
