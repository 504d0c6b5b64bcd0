#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fifm/core.hpp"
#include "fifm/driving.hpp"

namespace fifm {

enum class EventKind : std::uint8_t { Arrival, MatchDeparture, Reneging, Acceptance };

/// One line of the event log. Size bookkeeping: Acceptance +1,
/// MatchDeparture -1, Reneging -1; Arrival marks a driving arrival that
/// matched (net 0 on its own, the paired MatchDeparture carries the -1).
struct EventLogRecord {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::int64_t id_a = 0; // arrival / departing particle
    std::int64_t id_b = 0; // matched partner (MatchDeparture only)
    int state_size_after = 0;
};

const char* event_kind_name(EventKind kind);

enum class LogLevel : std::uint8_t { None, Matches, Full };

struct SimOptions {
    LogLevel log_level = LogLevel::Full;
    double sample_dt = 0.0;   // if > 0, record (t, total, reds, blues) rows
    bool validate_each_step = false;
};

struct SampleRow {
    double time = 0.0;
    int total = 0;
    int reds = 0;
    int blues = 0;
};

struct SimResult {
    OrderedConfiguration final_state;
    std::vector<EventLogRecord> log;
    std::vector<SampleRow> samples;
};

/// Replay of the forward construction: next event is the earlier of the next
/// arrival and the earliest patience expiry; arrivals apply the matching
/// rule; expired particles are removed. Deterministic in its inputs;
/// initial-condition particles must carry patience values.
SimResult simulate(const Space& space, const ModelParams& params,
                   const OrderedConfiguration& initial, const EventSeq& events,
                   double t_end, const SimOptions& options = {});

using TestFunctional = std::function<double(const OrderedConfiguration&)>;

/// Lf(eta): departure terms use priority-region masses, the arrival integral
/// runs over the acceptance region (exact finite sum on type spaces,
/// adaptive quadrature on 1D domains). Torus is unsupported.
double evaluate_generator(const Space& space, const ModelParams& params,
                          const OrderedConfiguration& config, const TestFunctional& f);

/// The bounded cylinder functionals used by the stationarity checks:
/// total count, red count, and number of pairs within the interaction radius.
struct FunctionalDictionary {
    static double count(const OrderedConfiguration& config);
    static double red_count(const OrderedConfiguration& config);
    static TestFunctional pair_count(const Space& space);
};

} // namespace fifm
