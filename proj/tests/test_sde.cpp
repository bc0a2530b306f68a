#include "akmc/sde.hpp"
#include "akmc/stats.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace akmc;
using Catch::Approx;

namespace {

Basin testbed(double c = 0.2) { return stationary_points(Potential::two_saddle(c), {-3.0, 3.0}); }

SdeConfig config(double beta, double dt = 1e-3, double t_corr = 1.0) {
    SdeConfig cfg;
    cfg.beta = beta;
    cfg.dt = dt;
    cfg.t_corr = t_corr;
    return cfg;
}

}  // namespace

TEST_CASE("em_step update formula") {
    const auto p = Potential::two_saddle(0.2);
    const SdeConfig cfg = config(2.5, 1e-3);
    CHECK(em_step(0.0, p, cfg, 1.0) == Approx(0.0282842712474619).epsilon(1e-14));
    CHECK(em_step(0.0, p, cfg, 0.0) == 0.0);

    const double x = 0.3;
    const double expected = x - p.gradient(x) * cfg.dt + std::sqrt(2.0 * cfg.dt / cfg.beta) * -0.7;
    CHECK(em_step(x, p, cfg, -0.7) == expected);
    CHECK(em_step(x, p, cfg, -0.7) == em_step(x, p, cfg, -0.7));
}

TEST_CASE("em_step without drift or noise leaves x unchanged") {
    // x = 0 is the barrier top of the double well, so V'(0) = 0
    CHECK(em_step(0.0, Potential::double_well(), config(1.0), 0.0) == 0.0);
    CHECK(em_step(1.0, Potential::double_well(), config(1.0), 0.0) == 1.0);
}

TEST_CASE("em_step rejects non-finite results") {
    const auto p = Potential::double_well();
    try {
        (void)em_step(1e200, p, config(1.0), 0.0);
        FAIL("expected NonFinite");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NonFinite);
    }
}

TEST_CASE("SdeConfig validation") {
    SdeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.t_corr = -0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("Ornstein-Uhlenbeck stationary variance") {
    const double omega = 2.0;
    const auto p = Potential::quadratic(omega);
    for (double beta : {1.0, 2.5, 10.0}) {
        CAPTURE(beta);
        const SdeConfig cfg = config(beta, 1e-3);
        RandomStream rng(7, static_cast<std::uint64_t>(beta * 10));
        double x = 0.0;
        for (int i = 0; i < 5000; ++i) x = em_step(x, p, cfg, rng.normal());
        // subsample every relaxation time to keep draws nearly independent
        stats::Accumulator acc;
        for (int i = 0; i < 4'000'000; ++i) {
            x = em_step(x, p, cfg, rng.normal());
            if (i % 250 == 0) acc.add(x * x);
        }
        CHECK(acc.mean() == Approx(1.0 / (beta * omega)).epsilon(0.05));
    }
}

TEST_CASE("sample_qsd with t_corr = 0 returns the start point") {
    const Basin b = testbed();
    RandomStream rng(1);
    CHECK(sample_qsd(Potential::two_saddle(0.2), b, config(2.5, 1e-3, 0.0), rng, 0.3) == 0.3);
}

TEST_CASE("sample_qsd stays inside the basin and is symmetric for c = 0") {
    const auto p = Potential::two_saddle(0.0);
    const Basin b = testbed(0.0);
    const SdeConfig cfg = config(5.0, 1e-3, 1.0);
    RandomStream rng(11);
    std::vector<double> xs;
    for (int i = 0; i < 10'000; ++i) {
        const double x = sample_qsd(p, b, cfg, rng);
        REQUIRE(b.contains(x));
        xs.push_back(x);
    }
    const auto ms = stats::mean_se(xs);
    CHECK(std::abs(ms.mean) <= 3.0 * ms.se);
}

TEST_CASE("sample_qsd gives up after max_steps") {
    SdeConfig cfg = config(0.05, 1e-3, 100.0);
    cfg.max_steps = 1000;
    RandomStream rng(3);
    try {
        (void)sample_qsd(Potential::two_saddle(0.2), testbed(), cfg, rng);
        FAIL("expected MaxStepsExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MaxStepsExceeded);
    }
}

TEST_CASE("sample_qsd and run_until_exit require a start inside the basin") {
    RandomStream rng(3);
    const Basin b = testbed();
    const auto p = Potential::two_saddle(0.2);
    CHECK_THROWS_AS(sample_qsd(p, b, config(1.0), rng, 5.0), Error);
    CHECK_THROWS_AS(run_until_exit(5.0, p, b, config(1.0), rng), Error);
}

TEST_CASE("deterministic outward drift exits through the nearer boundary") {
    // Widen the basin past both saddles so that points near its edges sit on
    // the outward-drifting side; beta = 1e12 makes the noise negligible.
    const auto p = Potential::two_saddle(0.2);
    Basin b = testbed();
    b.a = -1.2;
    b.b = 0.95;
    const SdeConfig cfg = config(1e12, 1e-2);
    RandomStream rng(5);
    const ExitRecord r = run_until_exit(0.93, p, b, cfg, rng);
    CHECK(r.pathway == 2);
    CHECK(r.exit_point >= b.b);
    CHECK(r.exit_time > 0.0);
    const ExitRecord l = run_until_exit(-1.15, p, b, cfg, rng);
    CHECK(l.pathway == 1);
    CHECK(l.exit_point <= b.a);
}

TEST_CASE("run_until_exit records a positive time and an outside point") {
    const auto p = Potential::two_saddle(0.2);
    const Basin b = testbed();
    const SdeConfig cfg = config(2.5, 1e-3, 0.5);
    RandomStream rng(21);
    for (int i = 0; i < 200; ++i) {
        const ExitRecord e = run_until_exit(sample_qsd(p, b, cfg, rng), p, b, cfg, rng);
        CHECK(e.exit_time > 0.0);
        CHECK_FALSE(b.contains(e.exit_point));
        CHECK(e.pathway == classify_exit(b, e.exit_point));
        const double steps = e.exit_time / cfg.dt;
        CHECK(steps == Approx(std::round(steps)).margin(1e-6));
    }
}

TEST_CASE("lower barrier is crossed more often") {
    const auto p = Potential::two_saddle(0.2);
    const Basin b = testbed();
    const SdeConfig cfg = config(5.0, 1e-3, 1.0);
    RandomStream rng(99);
    int right = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i)
        if (run_until_exit(sample_qsd(p, b, cfg, rng), p, b, cfg, rng).pathway == 2) ++right;
    const double frac = static_cast<double>(right) / n;
    const double se = std::sqrt(frac * (1.0 - frac) / n);
    CHECK(frac - (1.0 - frac) > 3.0 * se);
}

TEST_CASE("fixed seed reproduces QSD samples and exits") {
    const auto p = Potential::two_saddle(0.2);
    const Basin b = testbed();
    const SdeConfig cfg = config(2.5, 1e-3, 0.5);
    RandomStream a(123), c(123);
    for (int i = 0; i < 20; ++i) {
        const double xa = sample_qsd(p, b, cfg, a);
        const double xc = sample_qsd(p, b, cfg, c);
        REQUIRE(xa == xc);
        const auto ea = run_until_exit(xa, p, b, cfg, a);
        const auto ec = run_until_exit(xc, p, b, cfg, c);
        REQUIRE(ea.exit_time == ec.exit_time);
        REQUIRE(ea.pathway == ec.pathway);
    }
}

TEST_CASE("default decorrelation time") {
    const Basin b = testbed();
    CHECK(default_t_corr(b) == Approx(5.0));
    const Basin dw = stationary_points(Potential::double_well(), {-0.5, 2.0});
    CHECK(default_t_corr(dw) == Approx(2.5));
}
