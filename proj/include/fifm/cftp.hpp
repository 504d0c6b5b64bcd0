#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fifm/driving.hpp"
#include "fifm/simulator.hpp"

namespace fifm {

/// True iff no event born at or before t is still alive at t, i.e. every
/// such event has birth + patience < t. `events` must cover (-inf, t] up to
/// negligible mass; see missed_event_bound for the residual risk.
bool is_regeneration_time(const EventSeq& events, double t);

/// Expected number of events older than `depth` still alive at the test
/// time: arrival_rate * exp(-mu * depth) / mu.
double missed_event_bound(const Space& space, const ModelParams& params, double depth);

struct CftpOptions {
    std::int64_t scan_limit = 0; // candidate regeneration times to try; 0 = auto
    double tail_tolerance = 1e-15; // drives the survival-check window depth
};

/// Lazy bi-infinite driving process over (-inf, 0]; block k holds the
/// events in (-k-1, -k], generated on demand from (seed, stream, block) so
/// deeper scans extend the same realization.
class BackwardDriving {
public:
    BackwardDriving(const Space& space, const ModelParams& params, std::uint64_t seed,
                    std::uint64_t stream);

    void ensure(std::int64_t depth); // blocks 0..depth-1 available
    const Space& space() const { return space_; }
    const ModelParams& params() const { return params_; }
    const EventSeq& block(std::int64_t k) const { return blocks_[static_cast<std::size_t>(k)]; }
    double block_max_expiry(std::int64_t k) const {
        return max_expiry_[static_cast<std::size_t>(k)];
    }
    std::int64_t depth() const { return static_cast<std::int64_t>(blocks_.size()); }

    /// Events with birth in (t0, 0], ascending. t0 must be an integer <= 0.
    EventSeq events_since(std::int64_t t0) const;

private:
    const Space& space_;
    ModelParams params_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::vector<EventSeq> blocks_;
    std::vector<double> max_expiry_;
};

/// First `count` regeneration times in the scan 0, -1, -2, ...
std::vector<std::int64_t> scan_regeneration_times(BackwardDriving& driving, int count,
                                                  const CftpOptions& opts = {});

/// Perfect stationary sample: scan backwards for a regeneration time T and
/// run forward from T with empty initial conditions to time 0.
OrderedConfiguration sample_stationary(const Space& space, const ModelParams& params,
                                       std::uint64_t seed, const CftpOptions& opts = {});

/// As above but on an explicit stream, for replica-parallel draws.
OrderedConfiguration sample_stationary_stream(const Space& space, const ModelParams& params,
                                              std::uint64_t seed, std::uint64_t stream,
                                              const CftpOptions& opts = {});

/// Monte Carlo estimate of the probability that a fixed time is a
/// regeneration time; exact value exp(-arrival_rate / mu).
std::pair<double, double> estimate_regeneration_probability(const Space& space,
                                                            const ModelParams& params,
                                                            std::int64_t trials,
                                                            std::uint64_t seed);

} // namespace fifm
