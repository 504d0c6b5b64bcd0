#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fifm/driving.hpp"
#include "fifm/simulator.hpp"

namespace fifm {

/// kappa: every arrival either matches an earlier accepted, still-alive,
/// unmatched particle of the opposite color within the interaction radius
/// (the earliest-ranked such one), or exits on its own.
struct KillingAssignment {
    enum class Fate : std::uint8_t { SelfExit, Matched, Unresolved };
    struct Entry {
        Fate fate = Fate::Unresolved;
        std::int64_t target = 0; // matched event id, when fate == Matched
    };
    std::unordered_map<std::int64_t, Entry> map;

    std::vector<std::pair<std::int64_t, std::int64_t>> match_pairs() const;
};

/// Chronological evaluation of the killing recursion over a finite event
/// window; on such windows this coincides with the recursive definition.
KillingAssignment compute_kappa(const Space& space, const EventSeq& events);

/// Match pairs (arrival id, partner id) extracted from a simulator log.
std::vector<std::pair<std::int64_t, std::int64_t>> match_pairs_from_log(
    const std::vector<EventLogRecord>& log);

/// Densities of the particles present in only one of two coupled processes
/// (zombies: first only; antizombies: second only), sampled on a time grid.
struct DiscrepancyTrace {
    std::vector<double> times;
    std::vector<double> zombie_density;
    std::vector<double> antizombie_density;

    double special_density(std::size_t i) const {
        return zombie_density[i] + antizombie_density[i];
    }
};

/// Classified transitions of the coupled pair; every class change falls in
/// one of these cases (asserted in instrumented runs).
enum class CoupledTransition : std::uint8_t {
    BothAccept = 0,
    AcceptVsMatchAntizombie,
    MatchZombieVsAccept,
    MatchZombieVsMatchAntizombie,
    MatchZombieVsMatchRegular,
    MatchRegularVsMatchAntizombie,
    MatchRegularSame,
    ExpireRegular,
    ExpireZombie,
    ExpireAntizombie,
    Count
};

const char* coupled_transition_name(CoupledTransition t);

/// Axis-aligned square window centered in the torus.
struct TorusWindow {
    double side = 0.0;
    bool contains(const Space& space, const Point& p) const;
};

struct CoupledOptions {
    double sample_dt = 0.1;
    bool instrument = false;               // classify and check every transition
    std::optional<TorusWindow> window;     // presence tracking for coupling times
};

struct CoupledResult {
    DiscrepancyTrace trace;
    std::vector<double> window_presence_times; // event times with a special in the window
    std::array<std::int64_t, static_cast<std::size_t>(CoupledTransition::Count)> case_counts{};
    bool specials_reappeared_after_zero = false;
};

/// Two processes driven by one arrival stream (blocks of (seed, stream)
/// starting at time 0). Initial particles are matched across the two
/// configurations by (position, color); a particle present in both adopts
/// the first configuration's patience so the pair stays coupled.
CoupledResult coupled_simulate(const Space& space, const ModelParams& params,
                               const OrderedConfiguration& init1,
                               const OrderedConfiguration& init2, double t_end,
                               std::uint64_t seed, std::uint64_t stream = 0,
                               const CoupledOptions& options = {});

struct CouplingTimeOptions {
    double t_max = 20.0;       // run horizon
    double confirm = 5.0;      // quiet window required after the last discrepancy
    double earlier_start = 1.0; // head start of the comparison process
};

struct CouplingTimeResult {
    std::vector<double> tau;      // per replica: last time a special was seen in K
    std::vector<bool> censored;   // tau too close to the horizon to confirm
    double mean = 0.0;            // over uncensored replicas
    double stderr_mean = 0.0;
    std::int64_t censored_count = 0;

    void finalize(double t_max, double confirm);
};

/// Replica presence-time lists for the pair (start at -earlier_start vs 0,
/// both empty), so coupling times can be evaluated at several horizons.
std::vector<std::vector<double>> coupling_presence_times(const Space& space,
                                                         const ModelParams& params,
                                                         const TorusWindow& window,
                                                         int replicas, std::uint64_t seed,
                                                         const CouplingTimeOptions& opts = {});

CouplingTimeResult estimate_coupling_time(const Space& space, const ModelParams& params,
                                          const TorusWindow& window, int replicas,
                                          std::uint64_t seed,
                                          const CouplingTimeOptions& opts = {});

} // namespace fifm
