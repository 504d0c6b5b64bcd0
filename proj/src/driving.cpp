#include "fifm/driving.hpp"

#include <cmath>
#include <stdexcept>

#include "fifm/rng.hpp"

namespace fifm {

double arrival_rate(const Space& space, const ModelParams& params) {
    return params.intensity * lambda_bar_total(space);
}

namespace {

Point sample_position(const Space& space, Rng& rng, Color& color_out) {
    Point p;
    if (space.is_interval()) {
        p.x = rng.uniform(0.0, std::get<SpaceInterval>(space.kind).length);
        color_out = rng.coin() ? Color::Red : Color::Blue;
    } else if (space.is_circle()) {
        p.x = rng.uniform(0.0, std::get<SpaceCircle>(space.kind).length);
        color_out = rng.coin() ? Color::Red : Color::Blue;
    } else if (space.is_torus()) {
        double L = std::get<SpaceTorus2D>(space.kind).side;
        p.x = rng.uniform(0.0, L);
        p.y = rng.uniform(0.0, L);
        color_out = rng.coin() ? Color::Red : Color::Blue;
    } else {
        const auto& f = space.finite();
        double total = 0.0;
        for (double w : f.weights) total += w;
        double u = rng.uniform() * total;
        int type = 0;
        for (std::size_t i = 0; i < f.weights.size(); ++i) {
            if (u <= f.weights[i] || i + 1 == f.weights.size()) { type = static_cast<int>(i); break; }
            u -= f.weights[i];
        }
        p.type = type;
        color_out = finite_type_color(f, type);
    }
    return p;
}

} // namespace

EventSeq generate_block(const Space& space, const ModelParams& params,
                        std::uint64_t seed, std::uint64_t stream, std::int64_t block) {
    require_params(params, /*need_positive_mu=*/false);
    const double rate = arrival_rate(space, params);
    Rng rng(seed, stream, block);
    EventSeq events;
    double t = static_cast<double>(block);
    const double block_end = static_cast<double>(block) + 1.0;
    std::int64_t idx = 0;
    while (true) {
        t += rng.exponential(rate);
        if (t > block_end) break;
        Particle ev;
        ev.birth = t;
        ev.pos = sample_position(space, rng, ev.color);
        ev.patience = rng.exponential(params.mu);
        ev.id = block * kEventsPerBlock + idx;
        ++idx;
        if (idx >= kEventsPerBlock) throw std::runtime_error("block event capacity exceeded");
        events.push_back(ev);
    }
    return events;
}

EventSeq generate_driving_process(const Space& space, const ModelParams& params,
                                  double t0, double t1, std::uint64_t seed,
                                  std::uint64_t stream) {
    if (!(t0 < t1)) {
        if (t0 == t1) return {};
        throw std::invalid_argument("generate_driving_process: t0 must be <= t1");
    }
    EventSeq all;
    const std::int64_t first = static_cast<std::int64_t>(std::floor(t0));
    const std::int64_t last = static_cast<std::int64_t>(std::ceil(t1));
    for (std::int64_t b = first; b < last; ++b) {
        EventSeq block = generate_block(space, params, seed, stream, b);
        for (auto& ev : block)
            if (ev.birth >= t0 && ev.birth < t1) all.push_back(ev);
    }
    return all;
}

void assign_missing_patience(OrderedConfiguration& config, const ModelParams& params,
                             std::uint64_t seed) {
    Rng rng(seed, 0xf1f0u, 0);
    for (auto& p : config)
        if (std::isnan(p.patience)) p.patience = rng.exponential(params.mu);
}

} // namespace fifm
