#pragma once

// Exit-event log of a saddle search and the counting processes N_j(t).

#include "akmc/error.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace akmc {

struct ExitEvent {
    double time = 0.0;  ///< cumulative simulation clock
    int pathway = 0;
};

struct EventLog {
    std::vector<ExitEvent> events;  ///< nondecreasing in time
    double horizon = 0.0;           ///< final value of the simulation clock
    int n_pathways = 0;             ///< number of labels the counts are sized for

    [[nodiscard]] std::size_t size() const noexcept { return events.size(); }

    [[nodiscard]] int n_pathways_seen() const {
        std::vector<bool> seen(static_cast<std::size_t>(n_pathways), false);
        for (const auto& e : events) seen.at(static_cast<std::size_t>(e.pathway - 1)) = true;
        return static_cast<int>(std::count(seen.begin(), seen.end(), true));
    }

    void append(double t, int pathway) {
        if (pathway < 1 || pathway > n_pathways)
            throw Error(Errc::OutOfRange, "pathway label " + std::to_string(pathway) + " is not registered");
        if (!events.empty() && t < events.back().time)
            throw Error(Errc::InvalidArgument, "event times must be nondecreasing");
        events.push_back({t, pathway});
        horizon = std::max(horizon, t);
    }
};

/// N_j, chi_j and N at one instant.
struct Counts {
    std::vector<long long> n;  ///< per pathway, index label - 1
    std::vector<int> chi;
    long long total = 0;

    Counts() = default;
    explicit Counts(std::size_t n_pathways) : n(n_pathways, 0), chi(n_pathways, 0) {}

    /// Builds counts from raw per-pathway numbers.
    [[nodiscard]] static Counts from(std::vector<long long> per_pathway) {
        Counts c;
        c.n = std::move(per_pathway);
        c.chi.resize(c.n.size());
        for (std::size_t j = 0; j < c.n.size(); ++j) {
            c.chi[j] = c.n[j] >= 1 ? 1 : 0;
            c.total += c.n[j];
        }
        return c;
    }

    void add(int pathway, long long k = 1) {
        auto& nj = n.at(static_cast<std::size_t>(pathway - 1));
        nj += k;
        chi[static_cast<std::size_t>(pathway - 1)] = nj >= 1 ? 1 : 0;
        total += k;
    }

    [[nodiscard]] std::size_t size() const noexcept { return n.size(); }
};

[[nodiscard]] inline Counts counts_at(const EventLog& log, double t) {
    if (t < 0.0 || t > log.horizon)
        throw Error(Errc::OutOfRange, "time " + std::to_string(t) + " outside [0, horizon]");
    Counts c(static_cast<std::size_t>(log.n_pathways));
    for (const auto& e : log.events) {
        if (e.time > t) break;
        c.add(e.pathway);
    }
    return c;
}

/// CSV with header `t_event,pathway`.
inline void write_csv(std::ostream& os, const EventLog& log) {
    const auto prec = os.precision(17);
    os << "t_event,pathway\n";
    for (const auto& e : log.events) os << e.time << ',' << e.pathway << '\n';
    os.precision(prec);
}

/// Reads the CSV produced by write_csv. Horizon defaults to the last event time.
[[nodiscard]] inline EventLog read_event_csv(std::istream& is, int n_pathways) {
    EventLog log;
    log.n_pathways = n_pathways;
    std::string line;
    if (!std::getline(is, line) || line != "t_event,pathway") throw Error(Errc::Io, "missing t_event,pathway header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t = 0.0;
        char comma = 0;
        int label = 0;
        if (!(row >> t >> comma >> label) || comma != ',') throw Error(Errc::Io, "malformed event row: " + line);
        log.append(t, label);
    }
    return log;
}

}  // namespace akmc
