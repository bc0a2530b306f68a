#include "akmc/events.hpp"
#include "akmc/search.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace akmc;
using Catch::Approx;

namespace {

struct Testbed {
    Potential p = Potential::two_saddle(0.2);
    Basin basin = stationary_points(p, {-3.0, 3.0});
    RateTable rates = rates_from_basin(basin, 10.0, 2.5);
};

SearchConfig search_config(double epsilon, EstimatorKind kind = EstimatorKind::Tilde) {
    SearchConfig cfg;
    cfg.sde.beta = 2.5;
    cfg.sde.dt = 1e-3;
    cfg.sde.t_corr = 1.0;
    cfg.stop = StoppingRule{epsilon, kind};
    return cfg;
}

EventLog small_log() {
    EventLog log;
    log.n_pathways = 2;
    log.append(1.0, 1);
    log.append(2.0, 1);
    log.append(3.0, 2);
    return log;
}

}  // namespace

TEST_CASE("counts_at hand example") {
    const EventLog log = small_log();
    const Counts c = counts_at(log, 2.5);
    CHECK(c.n[0] == 2);
    CHECK(c.n[1] == 0);
    CHECK(c.chi[0] == 1);
    CHECK(c.chi[1] == 0);
    CHECK(c.total == 2);
}

TEST_CASE("counts_at edges and monotonicity") {
    const EventLog log = small_log();
    const Counts zero = counts_at(log, 0.0);
    CHECK(zero.total == 0);
    CHECK(zero.chi[0] == 0);
    CHECK(counts_at(log, log.horizon).total == 3);
    CHECK(counts_at(log, 1.0).total == 1);  // events at t count

    Counts prev = zero;
    for (double t = 0.0; t <= 3.0; t += 0.125) {
        const Counts c = counts_at(log, t);
        for (std::size_t j = 0; j < 2; ++j) CHECK(c.n[j] >= prev.n[j]);
        prev = c;
    }
    CHECK_THROWS_AS(counts_at(log, -0.1), Error);
    CHECK_THROWS_AS(counts_at(log, 3.1), Error);
}

TEST_CASE("Counts invariants") {
    Counts c(3);
    c.add(2);
    c.add(2, 4);
    c.add(3);
    CHECK(c.n[1] == 5);
    CHECK(c.chi[0] == 0);
    CHECK(c.chi[1] == 1);
    CHECK(c.total == 6);
    const Counts f = Counts::from({0, 2, 1});
    CHECK(f.total == 3);
    CHECK(f.chi == std::vector<int>{0, 1, 1});
}

TEST_CASE("EventLog rejects bad appends") {
    EventLog log;
    log.n_pathways = 2;
    log.append(1.0, 2);
    CHECK_THROWS_AS(log.append(0.5, 1), Error);
    CHECK_THROWS_AS(log.append(2.0, 3), Error);
    CHECK_THROWS_AS(log.append(2.0, 0), Error);
    log.append(1.0, 1);  // ties keep insertion order
    CHECK(log.events.back().pathway == 1);
    CHECK(log.n_pathways_seen() == 2);
}

TEST_CASE("event csv round trip") {
    const EventLog log = small_log();
    std::ostringstream os;
    write_csv(os, log);
    CHECK(os.str().rfind("t_event,pathway\n", 0) == 0);
    std::istringstream is(os.str());
    const EventLog back = read_event_csv(is, 2);
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(back.events[i].time == log.events[i].time);
        CHECK(back.events[i].pathway == log.events[i].pathway);
    }
    std::istringstream bad("time,label\n1,1\n");
    CHECK_THROWS_AS(read_event_csv(bad, 2), Error);
}

TEST_CASE("loose criterion stops as soon as one pathway is plausible") {
    Testbed tb;
    SearchConfig cfg = search_config(0.99);
    RandomStream rng(1);
    const SearchResult r = run_search(tb.p, tb.basin, cfg, tb.rates, rng);
    REQUIRE(r.stopped);
    // the first event makes Rtilde = p_tilde_j(t) of one pathway, > 0.01 almost surely
    CHECK(r.log.size() == 1);
    CHECK(r.stop_time == r.log.events.front().time);
    CHECK(r.trace.rows.back().r_tilde > 0.01);
}

TEST_CASE("tight criterion finds both pathways") {
    Testbed tb;
    SearchConfig cfg = search_config(1e-12);
    RandomStream rng(2);
    const SearchResult r = run_search(tb.p, tb.basin, cfg, tb.rates, rng);
    REQUIRE(r.stopped);
    const Counts final_counts = counts_at(r.log, r.log.horizon);
    CHECK(final_counts.chi[0] == 1);
    CHECK(final_counts.chi[1] == 1);
    CHECK(r.trace.rows.back().r_tilde > 1.0 - 1e-12);
}

TEST_CASE("Rtilde stop happens at the crossing and nowhere earlier") {
    Testbed tb;
    const auto k_lo = tb.rates.k_lo();
    const auto k_hi = tb.rates.k_hi();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SearchConfig cfg = search_config(0.05);
        cfg.labels = LabelScheme::Geometric;
        RandomStream rng(seed);
        const SearchResult r = run_search(tb.p, tb.basin, cfg, tb.rates, rng);
        REQUIRE(r.stopped);
        const double threshold = 1.0 - 0.05;
        const TraceRow& last = r.trace.rows.back();
        CHECK(last.t == r.stop_time);
        CHECK(last.r_tilde > threshold);
        for (std::size_t i = 0; i + 1 < r.trace.rows.size(); ++i) CHECK(r.trace.rows[i].r_tilde <= threshold);
        CHECK(r.log.horizon == r.stop_time);
        CHECK(r.log.events.back().time <= r.stop_time);
        // a stop between events is the first crossing: just before it, the criterion fails
        if (r.log.events.back().time < r.stop_time) {
            const Counts c = counts_at(r.log, r.stop_time);
            CHECK(r_tilde(c, k_lo, k_hi, r.stop_time * (1.0 - 1e-9)) <= threshold);
        }
    }
}

TEST_CASE("Rhat stop happens at an event") {
    Testbed tb;
    SearchConfig cfg = search_config(0.2, EstimatorKind::Hat);
    RandomStream rng(8);
    const SearchResult r = run_search(tb.p, tb.basin, cfg, tb.rates, rng);
    REQUIRE(r.stopped);
    CHECK(r.stop_time == r.log.events.back().time);
    CHECK(r.trace.rows.back().r_hat > 0.8);
}

TEST_CASE("fixed seed gives identical logs") {
    Testbed tb;
    const SearchConfig cfg = search_config(0.05);
    RandomStream a(42), b(42);
    const SearchResult ra = run_search(tb.p, tb.basin, cfg, tb.rates, a);
    const SearchResult rb = run_search(tb.p, tb.basin, cfg, tb.rates, b);
    std::ostringstream sa, sb;
    write_csv(sa, ra.log);
    write_csv(sb, rb.log);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("discovery labels relabel by first appearance") {
    Testbed tb;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SearchConfig geo = search_config(0.01);
        SearchConfig disc = geo;
        disc.labels = LabelScheme::Discovery;
        RandomStream a(seed), b(seed);
        const SearchResult rg = run_search(tb.p, tb.basin, geo, tb.rates, a);
        const SearchResult rd = run_search(tb.p, tb.basin, disc, tb.rates, b);
        REQUIRE(rg.log.size() == rd.log.size());
        CHECK(rd.log.events.front().pathway == 1);
        for (std::size_t i = 0; i < rg.log.size(); ++i)
            CHECK(rd.log.events[i].pathway == rd.reported_label[static_cast<std::size_t>(rg.log.events[i].pathway - 1)]);
        const auto& row_g = rg.trace.rows.back();
        const auto& row_d = rd.trace.rows.back();
        for (std::size_t g = 0; g < 2; ++g)
            CHECK(row_d.pathways[static_cast<std::size_t>(rd.reported_label[g] - 1)].n == row_g.pathways[g].n);
        CHECK(row_d.r_tilde == row_g.r_tilde);
    }
}

TEST_CASE("fixed-length runs and the cycle cap") {
    Testbed tb;
    SearchConfig cfg = search_config(0.05);
    cfg.stop.reset();
    cfg.n_events = 25;
    RandomStream rng(5);
    const SearchResult r = run_search(tb.p, tb.basin, cfg, tb.rates, rng);
    CHECK_FALSE(r.stopped);
    CHECK(r.log.size() == 25);
    CHECK(r.trace.rows.size() == 25);

    cfg.n_events.reset();
    cfg.stop = StoppingRule{1e-12, EstimatorKind::Tilde};
    cfg.max_cycles = 1;
    RandomStream rng2(5);
    try {
        (void)run_search(tb.p, tb.basin, cfg, tb.rates, rng2);
        FAIL("expected MaxCyclesExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MaxCyclesExceeded);
    }
}

TEST_CASE("run_search input validation") {
    Testbed tb;
    RandomStream rng(1);
    SearchConfig cfg = search_config(0.05);
    cfg.sde.beta = 3.0;
    CHECK_THROWS_AS(run_search(tb.p, tb.basin, cfg, tb.rates, rng), Error);
    cfg = search_config(0.05);
    cfg.stop.reset();
    CHECK_THROWS_AS(run_search(tb.p, tb.basin, cfg, tb.rates, rng), Error);
    cfg = search_config(1.5);
    CHECK_THROWS_AS(run_search(tb.p, tb.basin, cfg, tb.rates, rng), Error);
    cfg = search_config(0.05);
    CHECK_THROWS_AS(run_search(tb.p, tb.basin, cfg, build_test_system(0.0), rng), Error);
    CHECK(parse_label_scheme(to_string(LabelScheme::Discovery)) == LabelScheme::Discovery);
    CHECK_FALSE(parse_label_scheme("alphabetical").has_value());
}
