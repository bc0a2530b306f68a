#pragma once

// Command-line configuration for the akmc tool. Every option can also come
// from a JSON config file (--config); options given on the command line win.
// The resolved configuration is echoed into each run's metadata.json, which
// is itself a valid config file.

#include "akmc/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace akmc::cli {

using nlohmann::json;

inline constexpr double kAuto = std::numeric_limits<double>::quiet_NaN();

struct RunConfig {
    std::string command;

    // potential
    std::string potential = "two-saddle";
    double c = 0.2;
    double search_lo = kAuto;
    double search_hi = kAuto;

    // sde / search
    double beta_hi = 2.5;
    double beta_lo = 10.0;
    double dt = 1e-4;
    double t_corr = kAuto;  ///< default 5 / curvature at the minimum
    std::uint64_t max_steps = 2'000'000'000ULL;
    std::uint64_t max_cycles = 1'000'000;
    std::string labels = "discovery";
    double epsilon = kAuto;
    std::string estimator = "tilde";

    // test system
    std::vector<double> n_values{-0.5, 0.0, 0.5};
    std::uint64_t replicas = 10'000;
    std::uint64_t grid_points = 60;

    // verify
    std::string source = "sde";
    std::uint64_t events = 5'000;
    double alpha = kAuto;  ///< 0.001 for sde sources, 0.01 for direct Poisson
    bool negative_control = false;
    std::uint64_t windows = 50;
    std::uint64_t bootstrap = 2'000;
    std::vector<double> kappa_t{0.01, 0.1, 1.0, 5.0};
    std::uint64_t rate_samples = 100'000;
    std::uint64_t bound_replicas = 10'000;
    std::uint64_t bound_points = 6;

    // rates
    std::string system = "test";
    double n = 0.0;

    std::uint64_t seed = 42;
    std::string out = "akmc_out";
};

/// Per-subcommand option registry: keeps, for every option, a way to echo
/// its resolved value as JSON.
class OptionRegistry {
public:
    explicit OptionRegistry(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, T& field, const std::string& help) {
        echo_.push_back({name, [&field] { return json(field); }});
        return app_->add_option("--" + name, field, help);
    }

    CLI::Option* add_flag(const std::string& name, bool& field, const std::string& help) {
        echo_.push_back({name, [&field] { return json(field); }});
        return app_->add_flag("--" + name, field, help);
    }

    [[nodiscard]] json echo() const {
        json j = json::object();
        for (const auto& [name, fn] : echo_) j[name] = fn();
        return j;
    }

    [[nodiscard]] bool knows(const std::string& name) const {
        for (const auto& e : echo_)
            if (e.first == name) return true;
        return false;
    }

    [[nodiscard]] CLI::App* app() const noexcept { return app_; }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<json()>>> echo_;
};

inline void register_potential(OptionRegistry& r, RunConfig& c) {
    r.add("potential", c.potential, "Potential family: two-saddle | double-well")
        ->check(CLI::IsMember({"two-saddle", "double-well"}));
    r.add("c", c.c, "Asymmetry coefficient of the two-saddle potential");
    r.add("search-lo", c.search_lo, "Lower end of the stationary-point search interval");
    r.add("search-hi", c.search_hi, "Upper end of the stationary-point search interval");
}

inline void register_sde(OptionRegistry& r, RunConfig& c) {
    r.add("beta-hi", c.beta_hi, "Inverse temperature of the search");
    r.add("beta-lo", c.beta_lo, "Inverse temperature of interest");
    r.add("dt", c.dt, "Euler-Maruyama time step");
    r.add("t-corr", c.t_corr, "QSD decorrelation time (default 5 / curvature at the minimum)");
    r.add("max-steps", c.max_steps, "Step cap per QSD sample or exit trajectory");
}

/// Tokens `--name` / `--name=value` present on the command line.
[[nodiscard]] inline std::set<std::string> given_long_options(const std::vector<std::string>& args) {
    std::set<std::string> names;
    for (const auto& a : args) {
        if (a.size() < 3 || a.compare(0, 2, "--") != 0) continue;
        names.insert(a.substr(2, a.find('=') - 2));
    }
    return names;
}

/// Turns a config object into command-line tokens for every key not already
/// given explicitly. Unknown keys are usage errors.
[[nodiscard]] inline std::vector<std::string> config_tokens(const json& doc, const OptionRegistry& reg,
                                                            const std::set<std::string>& given) {
    const json& cfg = doc.contains("config") ? doc.at("config") : doc;
    if (!cfg.is_object()) throw CLI::ValidationError("config", "config file must hold a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command") continue;
        if (!reg.knows(key)) throw CLI::ValidationError("config." + key, "unknown key for this command");
        if (given.count(key)) continue;
        if (value.is_boolean()) {
            tokens.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
        } else if (value.is_array()) {
            if (value.empty()) continue;
            tokens.push_back("--" + key);
            for (const auto& v : value) tokens.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else if (value.is_null()) {
            continue;  // NaN echoes as null: keep the automatic default
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return tokens;
}

/// Field-path validation message.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg) : std::runtime_error(path + ": " + msg) {}
};

inline void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw ConfigError(path, msg);
}

inline void validate_common(const RunConfig& c) {
    require(std::isfinite(c.c), "potential.c", "must be finite");
    require(c.beta_hi > 0.0 && std::isfinite(c.beta_hi), "sde.beta-hi", "must be positive");
    require(c.beta_lo > c.beta_hi && std::isfinite(c.beta_lo), "sde.beta-lo", "must exceed beta-hi");
    require(c.dt > 0.0 && std::isfinite(c.dt), "sde.dt", "must be positive");
    require(std::isnan(c.t_corr) || (c.t_corr >= 0.0 && std::isfinite(c.t_corr)), "sde.t-corr", "must be >= 0");
    require(c.max_steps > 0, "sde.max-steps", "must be positive");
    require(std::isnan(c.search_lo) == std::isnan(c.search_hi), "potential.search-lo", "give both ends of the interval or neither");
    require(std::isnan(c.search_lo) || c.search_lo < c.search_hi, "potential.search-lo", "must be below search-hi");
}

}  // namespace akmc::cli
