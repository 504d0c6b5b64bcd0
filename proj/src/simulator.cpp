#include "fifm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "fifm/errors.hpp"

namespace fifm {

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Arrival: return "arrival";
        case EventKind::MatchDeparture: return "match";
        case EventKind::Reneging: return "renege";
        case EventKind::Acceptance: return "accept";
    }
    return "?";
}

namespace {

struct Expiry {
    double time;
    std::int64_t id;
    bool operator>(const Expiry& o) const {
        return time != o.time ? time > o.time : id > o.id;
    }
};

int count_color(const OrderedConfiguration& c, Color col) {
    int n = 0;
    for (const auto& p : c) n += p.color == col;
    return n;
}

} // namespace

SimResult simulate(const Space& space, const ModelParams& params,
                   const OrderedConfiguration& initial, const EventSeq& events,
                   double t_end, const SimOptions& options) {
    require_params(params, /*need_positive_mu=*/false);
    if (!is_valid_configuration(space, initial))
        throw std::invalid_argument("simulate: initial configuration is invalid");
    for (const auto& p : initial)
        if (std::isnan(p.patience))
            throw std::invalid_argument("simulate: initial particle lacks a patience value");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].birth < events[i - 1].birth)
            throw std::invalid_argument("simulate: events not sorted by birth");

    SimResult result;
    OrderedConfiguration state = initial;
    std::priority_queue<Expiry, std::vector<Expiry>, std::greater<>> expiries;
    for (const auto& p : state) expiries.push({p.expiry(), p.id});

    auto log_record = [&](double t, EventKind kind, std::int64_t a, std::int64_t b) {
        if (options.log_level == LogLevel::None) return;
        if (options.log_level == LogLevel::Matches && kind == EventKind::Arrival) return;
        result.log.push_back({t, kind, a, b, static_cast<int>(state.size())});
    };

    double next_sample = options.sample_dt > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    auto emit_samples_until = [&](double t) {
        while (next_sample <= t && next_sample <= t_end) {
            result.samples.push_back({next_sample, static_cast<int>(state.size()),
                                      count_color(state, Color::Red),
                                      count_color(state, Color::Blue)});
            next_sample += options.sample_dt;
        }
    };

    auto alive = [&](std::int64_t id) {
        return std::any_of(state.begin(), state.end(),
                           [&](const Particle& p) { return p.id == id; });
    };
    auto erase_id = [&](std::int64_t id) {
        for (std::size_t i = 0; i < state.size(); ++i) {
            if (state[i].id == id) {
                state.erase(state.begin() + static_cast<std::ptrdiff_t>(i));
                return;
            }
        }
    };

    std::size_t next_event = 0;
    while (true) {
        double t_arrival = next_event < events.size() ? events[next_event].birth
                                                      : std::numeric_limits<double>::infinity();
        // Drop expiries of particles no longer present (matched earlier).
        while (!expiries.empty() && !alive(expiries.top().id)) expiries.pop();
        double t_expiry = expiries.empty() ? std::numeric_limits<double>::infinity()
                                           : expiries.top().time;

        double t_next = std::min(t_arrival, t_expiry);
        if (t_next > t_end || !std::isfinite(t_next)) break;

        emit_samples_until(t_next);
        // Simultaneous events break ties by (time, id); arrivals and
        // expiries never share a time under the continuous marks.
        bool is_arrival = t_arrival < t_expiry ||
                          (t_arrival == t_expiry && !expiries.empty() &&
                           events[next_event].id < expiries.top().id);
        if (is_arrival) {
            const Particle& ev = events[next_event];
            ++next_event;
            MatchOutcome outcome = fifm_match(space, state, ev.marked());
            if (outcome.accepted()) {
                state.push_back(ev);
                expiries.push({ev.expiry(), ev.id});
                log_record(ev.birth, EventKind::Acceptance, ev.id, 0);
            } else {
                std::int64_t partner = state[*outcome.matched_index].id;
                log_record(ev.birth, EventKind::Arrival, ev.id, 0);
                state.erase(state.begin() + static_cast<std::ptrdiff_t>(*outcome.matched_index));
                log_record(ev.birth, EventKind::MatchDeparture, ev.id, partner);
            }
        } else {
            Expiry e = expiries.top();
            expiries.pop();
            erase_id(e.id);
            log_record(e.time, EventKind::Reneging, e.id, 0);
        }
        if (options.validate_each_step && !is_valid_configuration(space, state))
            throw std::logic_error("simulate: state became invalid");
    }
    emit_samples_until(t_end);
    result.final_state = std::move(state);
    return result;
}

namespace {

// Adaptive Simpson on [a, b]; integrands here are piecewise smooth once the
// caller has split at the ball-boundary breakpoints.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double integrate_piece(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, tol, 24);
}

} // namespace

double evaluate_generator(const Space& space, const ModelParams& params,
                          const OrderedConfiguration& config, const TestFunctional& f) {
    require_params(params, /*need_positive_mu=*/false);
    if (space.is_torus())
        throw capability_error("evaluate_generator: torus quadrature unsupported");
    if (!is_valid_configuration(space, config))
        throw std::invalid_argument("evaluate_generator: invalid configuration");

    const double f_eta = f(config);
    double total = 0.0;

    // Departure terms: each particle leaves at rate mu + lambda_bar(W_x).
    auto pts = marked_points(config);
    for (std::size_t i = 0; i < config.size(); ++i) {
        std::span<const MarkedPoint> prefix(pts.data(), i);
        double w_mass = params.intensity * priority_region_measure(space, prefix, pts[i]);
        OrderedConfiguration removed = config;
        removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
        total += (params.mu + w_mass) * (f(removed) - f_eta);
    }

    // Arrival term over the acceptance region {x not in N(eta)}.
    auto appended = [&](Point p, Color c) {
        OrderedConfiguration extended = config;
        Particle added;
        added.pos = p;
        added.color = c;
        added.id = std::numeric_limits<std::int64_t>::max();
        extended.push_back(added);
        return f(extended) - f_eta;
    };

    if (space.is_finite()) {
        const auto& fin = space.finite();
        for (int t = 0; t < static_cast<int>(fin.names.size()); ++t) {
            Color c = finite_type_color(fin, t);
            std::uint64_t covered = covered_side_finite(space, pts, c);
            if ((covered >> t) & 1u) continue;
            Point p;
            p.type = t;
            total += params.intensity * fin.weights[t] * appended(p, c);
        }
        return total;
    }

    const double L = total_measure(space);
    for (Color c : {Color::Red, Color::Blue}) {
        IntervalSet allowed = covered_side_1d(space, pts, c).complement(L);
        // Split at every ball boundary so the integrand is smooth per piece.
        std::vector<double> cuts;
        for (const auto& p : config) {
            for (double d : {p.pos.x - space.radius, p.pos.x + space.radius}) {
                if (space.is_circle()) {
                    d = std::fmod(d, L);
                    if (d < 0) d += L;
                }
                if (d > 0 && d < L) cuts.push_back(d);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        auto integrand = [&](double x) { return appended(Point{x, 0, -1}, c); };
        for (auto [lo, hi] : allowed.parts()) {
            double start = lo;
            for (double cut : cuts) {
                if (cut <= start) continue;
                if (cut >= hi) break;
                total += params.intensity * integrate_piece(integrand, start, cut, 1e-9);
                start = cut;
            }
            total += params.intensity * integrate_piece(integrand, start, hi, 1e-9);
        }
    }
    return total;
}

double FunctionalDictionary::count(const OrderedConfiguration& config) {
    return static_cast<double>(config.size());
}

double FunctionalDictionary::red_count(const OrderedConfiguration& config) {
    double n = 0;
    for (const auto& p : config) n += p.color == Color::Red;
    return n;
}

TestFunctional FunctionalDictionary::pair_count(const Space& space) {
    return [&space](const OrderedConfiguration& config) {
        double n = 0;
        for (std::size_t i = 0; i < config.size(); ++i)
            for (std::size_t j = i + 1; j < config.size(); ++j)
                if (distance(space, config[i].pos, config[j].pos) <= space.radius) n += 1;
        return n;
    };
}

} // namespace fifm
