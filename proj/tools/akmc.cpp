// akmc: saddle-search stopping-criterion experiments.
//
//   akmc search     --epsilon 0.05 [--potential two-saddle --c 0.2 --beta-hi 2.5 ...]
//   akmc testsystem [--n -0.5 0 0.5 --replicas 10000 --grid-points 60]
//   akmc verify     [--source sde|testsystem --events 5000 --negative-control]
//   akmc rates      [--system test|two-saddle|double-well --n 0]
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime error.

#include "run_config.hpp"

#include "akmc/bounds.hpp"
#include "akmc/error.hpp"
#include "akmc/estimators.hpp"
#include "akmc/events.hpp"
#include "akmc/experiments.hpp"
#include "akmc/potential.hpp"
#include "akmc/random.hpp"
#include "akmc/rates.hpp"
#include "akmc/sde.hpp"
#include "akmc/search.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace akmc;
using namespace akmc::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Testbed {
    Potential potential;
    Basin basin;
};

Testbed make_testbed(RunConfig& c) {
    Potential p = c.potential == "double-well" ? Potential::double_well() : Potential::two_saddle(c.c);
    if (std::isnan(c.search_lo)) {
        if (p.kind() == PotentialKind::DoubleWell) {
            c.search_lo = -0.5;
            c.search_hi = 2.0;
        } else {
            c.search_lo = -3.0;
            c.search_hi = 3.0;
        }
    }
    Basin b = stationary_points(p, {c.search_lo, c.search_hi});
    if (std::isnan(c.t_corr)) c.t_corr = default_t_corr(b);
    return {p, std::move(b)};
}

SdeConfig sde_config(const RunConfig& c) {
    SdeConfig s;
    s.beta = c.beta_hi;
    s.dt = c.dt;
    s.t_corr = c.t_corr;
    s.max_steps = c.max_steps;
    return s;
}

fs::path prepare_out(const RunConfig& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream os(path);
    if (!os) throw Error(Errc::Io, "cannot open " + path.string());
    writer(os);
    if (!os) throw Error(Errc::Io, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_file(path, [&](std::ostream& os) { os << std::setw(2) << j << '\n'; });
}

std::string format_n(double n) {
    std::ostringstream os;
    os << n;
    return os.str();
}

json to_json(const stats::TestResult& t, const std::string& group) {
    return {{"group", group},
            {"test", t.name},
            {"statistic", t.statistic},
            {"p_value", t.p_value},
            {"alpha", t.alpha},
            {"passed", t.passed},
            {"detail", t.detail}};
}

// ---------------------------------------------------------------------------

int cmd_search(RunConfig& c, const OptionRegistry& reg) {
    validate_common(c);
    require(std::isfinite(c.epsilon) && c.epsilon > 0.0 && c.epsilon < 1.0, "stop.epsilon", "must lie in (0, 1)");
    require(c.max_cycles > 0, "search.max-cycles", "must be positive");
    const auto kind = parse_estimator_kind(c.estimator);
    const auto labels = parse_label_scheme(c.labels);

    Testbed tb = make_testbed(c);
    const RateTable rates = rates_from_basin(tb.basin, c.beta_lo, c.beta_hi);
    SearchConfig sc;
    sc.sde = sde_config(c);
    sc.labels = *labels;
    sc.max_cycles = c.max_cycles;
    sc.stop = StoppingRule{c.epsilon, *kind};

    RandomStream rng(derive_seed(c.seed, "search"));
    const SearchResult res = run_search(tb.potential, tb.basin, sc, rates, rng);

    const fs::path dir = prepare_out(c);
    write_file(dir / "events.csv", [&](std::ostream& os) { write_csv(os, res.log); });
    write_file(dir / "trace.csv", [&](std::ostream& os) { write_csv(os, res.trace); });
    write_file(dir / "rates.csv", [&](std::ostream& os) { write_csv(os, rates); });

    json meta;
    meta["command"] = "search";
    meta["config"] = reg.echo();
    meta["seed"] = c.seed;
    meta["horizon"] = res.log.horizon;
    meta["stopped"] = res.stopped;
    meta["stop_time"] = res.stop_time;
    meta["events"] = res.log.size();
    meta["cycles"] = res.cycles;
    meta["reported_label"] = res.reported_label;
    write_json(dir / "metadata.json", meta);

    const TraceRow& last = res.trace.rows.back();
    std::cout << std::setprecision(10) << "stopping time " << res.stop_time << " after " << res.log.size()
              << " exits; R_tilde=" << last.r_tilde << " R_hat=" << last.r_hat << " R=" << last.r << '\n';
    return kExitOk;
}

int cmd_testsystem(RunConfig& c, const OptionRegistry& reg) {
    require(!c.n_values.empty(), "testsystem.n", "needs at least one exponent");
    require(c.replicas >= 2, "testsystem.replicas", "must be >= 2");
    require(c.grid_points >= 2, "testsystem.grid-points", "must be >= 2");
    require(c.beta_lo > c.beta_hi && c.beta_hi > 0.0, "sde.beta-lo", "must exceed beta-hi > 0");
    for (double n : c.n_values) require(std::isfinite(n), "testsystem.n", "must be finite");

    const fs::path dir = prepare_out(c);
    json files = json::array();
    for (std::size_t i = 0; i < c.n_values.size(); ++i) {
        TestSystemParams params;
        params.n = c.n_values[i];
        params.beta_hi = c.beta_hi;
        params.beta_lo = c.beta_lo;
        const auto grid = default_figure_grid(params, c.grid_points);
        const auto stats = run_ensemble(params, grid, c.replicas, derive_seed(c.seed, "testsystem.n=" + format_n(params.n)));
        const fs::path file = dir / ("figure_n" + format_n(params.n) + ".csv");
        export_figure_data(stats, file);
        files.push_back(file.filename().string());
        std::cout << "wrote " << file.string() << '\n';
    }
    json meta;
    meta["command"] = "testsystem";
    meta["config"] = reg.echo();
    meta["seed"] = c.seed;
    meta["files"] = files;
    write_json(dir / "metadata.json", meta);
    return kExitOk;
}

int cmd_verify(RunConfig& c, const OptionRegistry& reg) {
    validate_common(c);
    require(c.source == "sde" || c.source == "testsystem", "verify.source", "must be sde or testsystem");
    require(c.events >= 100, "verify.events", "must be >= 100");
    require(c.windows >= 2, "verify.windows", "must be >= 2");
    require(c.rate_samples >= 2, "verify.rate-samples", "must be >= 2");
    require(c.bound_replicas >= 2, "verify.bound-replicas", "must be >= 2");
    require(c.bound_points >= 2, "verify.bound-points", "must be >= 2");
    for (double kt : c.kappa_t) require(kt > 0.0 && std::isfinite(kt), "verify.kappa-t", "values must be positive");
    if (std::isnan(c.alpha)) c.alpha = c.source == "sde" ? 0.001 : 0.01;
    require(c.alpha > 0.0 && c.alpha < 1.0, "verify.alpha", "must lie in (0, 1)");

    json tests = json::array();
    bool all_passed = true;
    const auto record = [&](const stats::TestResult& t, const std::string& group) {
        tests.push_back(to_json(t, group));
        all_passed = all_passed && t.passed;
        if (!t.passed) std::cout << "FAILED " << group << '.' << t.name << " (p=" << t.p_value << ")\n";
    };

    PoissonCheckConfig pc;
    pc.alpha = c.alpha;
    pc.n_windows = c.windows;
    pc.n_bootstrap = static_cast<int>(c.bootstrap);
    pc.seed = derive_seed(c.seed, "verify.bootstrap");

    // (1) Poisson structure of the exit log.
    EventLog log;
    if (c.source == "sde") {
        Testbed tb = make_testbed(c);
        RandomStream rng(derive_seed(c.seed, "verify.poisson"));
        log = sde_exit_log(tb.potential, tb.basin, sde_config(c), c.events, rng);
    } else {
        TestSystemParams params;
        params.beta_hi = c.beta_hi;
        params.beta_lo = c.beta_lo;
        const auto kappa = build_test_system(params).kappa();
        double total = 0.0;
        for (double k : kappa) total += k;
        RandomStream rng(derive_seed(c.seed, "verify.poisson"));
        log = simulate_poisson_log(kappa, static_cast<double>(c.events) / total, rng);
    }
    for (const auto& t : verify_poisson(log, pc, c.source).tests) record(t, "poisson");

    if (c.negative_control) {
        // Exits launched from the minimum instead of the QSD.
        RunConfig broken = c;
        broken.t_corr = 0.0;
        Testbed tb = make_testbed(broken);
        SdeConfig s = sde_config(broken);
        RandomStream rng(derive_seed(c.seed, "verify.negative_control"));
        const EventLog bad = sde_exit_log(tb.potential, tb.basin, s, c.events, rng);
        PoissonCheckConfig nc = pc;
        nc.alpha = 0.01;
        record(stats::ks_exponential_test(
                   [&] {
                       std::vector<double> gaps;
                       double prev = 0.0;
                       for (const auto& e : bad.events) {
                           gaps.push_back(e.time - prev);
                           prev = e.time;
                       }
                       return gaps;
                   }(),
                   nc.alpha, nc.n_bootstrap, nc.seed),
               "negative_control");
    }

    // (2) Conditional unbiasedness of Nhat, conservativeness of phat.
    for (const auto& pt : verify_rate_est(c.kappa_t, c.rate_samples, derive_seed(c.seed, "verify.rate_est"))) {
        stats::TestResult unbiased;
        unbiased.name = "nhat_unbiased_kt=" + format_n(pt.kappa_t);
        unbiased.statistic = (pt.n_hat.mean - pt.kappa_t) / pt.n_hat.se;
        unbiased.p_value = std::erfc(std::abs(unbiased.statistic) / std::sqrt(2.0));
        unbiased.alpha = 0.0027;
        unbiased.passed = pt.unbiased;
        unbiased.detail = "mean=" + std::to_string(pt.n_hat.mean) + " se=" + std::to_string(pt.n_hat.se);
        record(unbiased, "rate_est");

        stats::TestResult conservative;
        conservative.name = "phat_conservative_kt=" + format_n(pt.kappa_t);
        conservative.statistic = (pt.p_hat.mean - pt.p) / pt.p_hat.se;
        conservative.p_value = 0.5 * std::erfc(conservative.statistic / std::sqrt(2.0));
        conservative.alpha = 0.00135;
        conservative.passed = pt.conservative;
        conservative.detail = "mean=" + std::to_string(pt.p_hat.mean) + " p=" + std::to_string(pt.p);
        record(conservative, "rate_est");
    }

    // (3) Error bounds on the n = 0 test system.
    TestSystemParams params;
    params.beta_hi = c.beta_hi;
    params.beta_lo = c.beta_lo;
    const RateTable rt = build_test_system(params);
    const auto grid = grid_for_max_q(rt, 0.99, 1e-4, c.bound_points);
    const BoundReport bounds = verify_error_bounds(rt, grid, c.bound_replicas, derive_seed(c.seed, "verify.bounds"));
    for (const auto& row : bounds.rows) {
        stats::TestResult t;
        t.name = std::string("bounds_") + std::string(to_string(row.which)) + "_t=" + format_n(row.t);
        t.statistic = std::abs(row.empirical.bias);
        t.p_value = row.satisfied() ? 1.0 : 0.0;
        t.alpha = 0.0;
        t.passed = row.satisfied();
        t.detail = "bias_bound=" + format_n(row.bound.bias) + " var_emp=" + format_n(row.empirical.variance) +
                   " var_bound=" + format_n(row.bound.variance);
        record(t, "error_bounds");
    }

    const fs::path dir = prepare_out(c);
    write_file(dir / "bounds.csv", [&](std::ostream& os) { write_csv(os, bounds); });
    json report;
    report["command"] = "verify";
    report["config"] = reg.echo();
    report["seed"] = c.seed;
    report["passed"] = all_passed;
    report["tests"] = tests;
    write_json(dir / "report.json", report);
    std::cout << (all_passed ? "all verification checks passed" : "verification FAILED") << " (" << tests.size()
              << " checks, report in " << (dir / "report.json").string() << ")\n";
    return all_passed ? kExitOk : kExitVerifyFailed;
}

int cmd_rates(RunConfig& c, const OptionRegistry& /*reg*/, bool to_stdout) {
    RateTable rt;
    if (c.system == "test") {
        require(std::isfinite(c.n), "rates.n", "must be finite");
        TestSystemParams params;
        params.n = c.n;
        params.beta_hi = c.beta_hi;
        params.beta_lo = c.beta_lo;
        rt = build_test_system(params);
    } else {
        validate_common(c);
        c.potential = c.system;
        Testbed tb = make_testbed(c);
        rt = rates_from_basin(tb.basin, c.beta_lo, c.beta_hi);
    }
    if (to_stdout) {
        write_csv(std::cout, rt);
    } else {
        write_file(fs::path(c.out), [&](std::ostream& os) { write_csv(os, rt); });
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Stopping criteria for adaptive kinetic Monte Carlo saddle searches"};
    app.require_subcommand(1);
    std::string config_path;

    auto* search = app.add_subcommand("search", "Run the high-temperature saddle search until the stopping rule fires");
    auto* testsystem = app.add_subcommand("testsystem", "Ensemble estimator curves on the 20-pathway test system");
    auto* verify = app.add_subcommand("verify", "Statistical verification battery");
    auto* rates = app.add_subcommand("rates", "Print a rate table as CSV");

    OptionRegistry r_search(search), r_test(testsystem), r_verify(verify), r_rates(rates);
    for (auto* sub : {search, testsystem, verify, rates})
        sub->add_option("--config", config_path, "JSON config file (metadata.json of a previous run works)");

    register_potential(r_search, cfg);
    register_sde(r_search, cfg);
    r_search.add("max-cycles", cfg.max_cycles, "Cycle cap");
    r_search.add("labels", cfg.labels, "Pathway labels: discovery | geometric")->check(CLI::IsMember({"discovery", "geometric"}));
    r_search.add("epsilon", cfg.epsilon, "Stop once the estimator exceeds 1 - epsilon")->required();
    r_search.add("estimator", cfg.estimator, "Stopping estimator: tilde | hat")->check(CLI::IsMember({"tilde", "hat"}));
    r_search.add("seed", cfg.seed, "Root seed");
    r_search.add("out", cfg.out, "Output directory");

    r_test.add("n", cfg.n_values, "Deviation exponents")->expected(1, -1);
    r_test.add("beta-hi", cfg.beta_hi, "Search inverse temperature");
    r_test.add("beta-lo", cfg.beta_lo, "Low inverse temperature");
    r_test.add("replicas", cfg.replicas, "Replicas per exponent");
    r_test.add("grid-points", cfg.grid_points, "Log-spaced time points");
    r_test.add("seed", cfg.seed, "Root seed");
    r_test.add("out", cfg.out, "Output directory");

    register_potential(r_verify, cfg);
    register_sde(r_verify, cfg);
    r_verify.add("source", cfg.source, "Exit-log source: sde | testsystem")->check(CLI::IsMember({"sde", "testsystem"}));
    r_verify.add("events", cfg.events, "Exit events in the Poisson check");
    r_verify.add("alpha", cfg.alpha, "Test level (default 0.001 for sde, 0.01 for testsystem)");
    r_verify.add_flag("negative-control", cfg.negative_control, "Also run the broken-QSD control (expected to fail)");
    r_verify.add("windows", cfg.windows, "Windows for the Fano-factor check");
    r_verify.add("bootstrap", cfg.bootstrap, "Bootstrap replicates for the KS p-value");
    r_verify.add("kappa-t", cfg.kappa_t, "kappa*t values for the Nhat check")->expected(1, -1);
    r_verify.add("rate-samples", cfg.rate_samples, "Conditional draws per kappa*t value");
    r_verify.add("bound-replicas", cfg.bound_replicas, "Replicas per time point in the bound check");
    r_verify.add("bound-points", cfg.bound_points, "Time points in the bound check");
    r_verify.add("seed", cfg.seed, "Root seed");
    r_verify.add("out", cfg.out, "Output directory");

    r_rates.add("system", cfg.system, "Rate source: test | two-saddle | double-well")
        ->check(CLI::IsMember({"test", "two-saddle", "double-well"}));
    r_rates.add("n", cfg.n, "Deviation exponent (test system)");
    r_rates.add("c", cfg.c, "Asymmetry of the two-saddle potential");
    r_rates.add("beta-hi", cfg.beta_hi, "Search inverse temperature");
    r_rates.add("beta-lo", cfg.beta_lo, "Low inverse temperature");
    r_rates.add("out", cfg.out, "Output CSV file (default: standard output)");

    std::vector<std::string> args(argv + 1, argv + argc);
    bool rates_to_stdout = true;
    try {
        // Locate --config before the real parse so its keys can be injected.
        std::string sub_name;
        std::string cfg_file;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (sub_name.empty() && args[i].rfind("-", 0) != 0) sub_name = args[i];
            if (args[i] == "--config" && i + 1 < args.size()) cfg_file = args[i + 1];
            if (args[i].rfind("--config=", 0) == 0) cfg_file = args[i].substr(9);
        }
        const auto given = given_long_options(args);
        rates_to_stdout = !given.count("out");
        if (!cfg_file.empty()) {
            std::ifstream is(cfg_file);
            if (!is) throw CLI::ValidationError("--config", "cannot read " + cfg_file);
            json doc;
            try {
                is >> doc;
            } catch (const json::exception& e) {
                throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
            }
            const OptionRegistry* reg = sub_name == "search"       ? &r_search
                                        : sub_name == "testsystem" ? &r_test
                                        : sub_name == "verify"     ? &r_verify
                                        : sub_name == "rates"      ? &r_rates
                                                                   : nullptr;
            if (reg == nullptr) throw CLI::ValidationError("subcommand", "unknown or missing subcommand");
            auto tokens = config_tokens(doc, *reg, given);
            auto pos = std::find(args.begin(), args.end(), sub_name);
            args.insert(pos + 1, tokens.begin(), tokens.end());
            if (sub_name == "rates" && doc.contains("config") && doc["config"].contains("out")) rates_to_stdout = false;
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (search->parsed()) return cmd_search(cfg, r_search);
        if (testsystem->parsed()) return cmd_testsystem(cfg, r_test);
        if (verify->parsed()) return cmd_verify(cfg, r_verify);
        if (rates->parsed()) return cmd_rates(cfg, r_rates, rates_to_stdout);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
