#include "fifm/cftp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fifm/errors.hpp"
#include "fifm/parallel.hpp"

namespace fifm {

bool is_regeneration_time(const EventSeq& events, double t) {
    for (const auto& ev : events)
        if (ev.birth <= t && ev.expiry() >= t) return false;
    return true;
}

double missed_event_bound(const Space& space, const ModelParams& params, double depth) {
    return arrival_rate(space, params) * std::exp(-params.mu * depth) / params.mu;
}

BackwardDriving::BackwardDriving(const Space& space, const ModelParams& params,
                                 std::uint64_t seed, std::uint64_t stream)
    : space_(space), params_(params), seed_(seed), stream_(stream) {}

void BackwardDriving::ensure(std::int64_t depth) {
    while (static_cast<std::int64_t>(blocks_.size()) < depth) {
        std::int64_t k = static_cast<std::int64_t>(blocks_.size());
        blocks_.push_back(generate_block(space_, params_, seed_, stream_, -k - 1));
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& ev : blocks_.back()) mx = std::max(mx, ev.expiry());
        max_expiry_.push_back(mx);
    }
}

EventSeq BackwardDriving::events_since(std::int64_t t0) const {
    EventSeq out;
    for (std::int64_t k = -t0 - 1; k >= 0; --k)
        for (const auto& ev : blocks_[static_cast<std::size_t>(k)]) out.push_back(ev);
    return out;
}

namespace {

std::int64_t window_depth(const Space& space, const ModelParams& params, double tol) {
    double rate = arrival_rate(space, params);
    double d = std::log(std::max(1.0, rate / (params.mu * tol))) / params.mu;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(d)));
}

std::int64_t auto_scan_limit(const Space& space, const ModelParams& params) {
    double ratio = arrival_rate(space, params) / params.mu;
    double limit = 10.0 * std::max(1.0, ratio) * std::exp(ratio);
    return static_cast<std::int64_t>(std::clamp(limit, 1e3, 1e9));
}

} // namespace

namespace {

std::vector<std::int64_t> scan_impl(const Space& space, const ModelParams& params,
                                    BackwardDriving& driving, int count,
                                    const CftpOptions& opts) {
    require_params(params);
    const std::int64_t depth = window_depth(space, params, opts.tail_tolerance);
    const std::int64_t limit =
        opts.scan_limit > 0 ? opts.scan_limit : auto_scan_limit(space, params);
    std::vector<std::int64_t> found;
    for (std::int64_t j = 0; j < limit && static_cast<int>(found.size()) < count; ++j) {
        const double t = -static_cast<double>(j);
        driving.ensure(j + depth);
        bool regen = true;
        for (std::int64_t k = j; k < j + depth; ++k) {
            if (driving.block_max_expiry(k) >= t) {
                regen = false;
                break;
            }
        }
        if (regen) found.push_back(-j);
    }
    if (static_cast<int>(found.size()) < count)
        throw sampling_error("regeneration scan exhausted after " + std::to_string(limit) +
                             " candidate times (deepest block " +
                             std::to_string(driving.depth()) + "); raise scan_limit");
    return found;
}

} // namespace

std::vector<std::int64_t> scan_regeneration_times(BackwardDriving& driving, int count,
                                                  const CftpOptions& opts) {
    return scan_impl(driving.space(), driving.params(), driving, count, opts);
}

OrderedConfiguration sample_stationary_stream(const Space& space, const ModelParams& params,
                                              std::uint64_t seed, std::uint64_t stream,
                                              const CftpOptions& opts) {
    require_params(params);
    if (total_measure(space) <= 0.0) throw std::invalid_argument("empty domain");
    BackwardDriving driving(space, params, seed, stream);
    std::int64_t T = scan_impl(space, params, driving, 1, opts).front();
    EventSeq events = driving.events_since(T);
    SimOptions sim_opts;
    sim_opts.log_level = LogLevel::None;
    return simulate(space, params, {}, events, 0.0, sim_opts).final_state;
}

OrderedConfiguration sample_stationary(const Space& space, const ModelParams& params,
                                       std::uint64_t seed, const CftpOptions& opts) {
    return sample_stationary_stream(space, params, seed, 0, opts);
}

std::pair<double, double> estimate_regeneration_probability(const Space& space,
                                                            const ModelParams& params,
                                                            std::int64_t trials,
                                                            std::uint64_t seed) {
    require_params(params);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (total_measure(space) <= 0.0) throw std::invalid_argument("empty domain");
    const std::int64_t depth = window_depth(space, params, 1e-15);
    std::vector<char> hit(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, [&](std::int64_t trial) {
        // Stream per trial; generate backwards until a survivor shows up.
        for (std::int64_t k = 0; k < depth; ++k) {
            EventSeq block =
                generate_block(space, params, seed, 1 + static_cast<std::uint64_t>(trial), -k - 1);
            for (const auto& ev : block) {
                if (ev.expiry() >= 0.0) return; // not a regeneration time
            }
        }
        hit[static_cast<std::size_t>(trial)] = 1;
    });
    double successes = 0;
    for (char h : hit) successes += h;
    double n = static_cast<double>(trials);
    double p = successes / n;
    // Half-count floor keeps the reported error meaningful at 0 or n hits.
    double p_se = (successes + 0.5) / (n + 1.0);
    double se = std::sqrt(p_se * (1.0 - p_se) / n);
    return {p, se};
}

} // namespace fifm
