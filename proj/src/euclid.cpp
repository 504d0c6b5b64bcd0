#include "fifm/euclid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "fifm/parallel.hpp"

namespace fifm {

std::vector<std::pair<std::int64_t, std::int64_t>> KillingAssignment::match_pairs() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& [id, entry] : map)
        if (entry.fate == Fate::Matched) pairs.emplace_back(id, entry.target);
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

KillingAssignment compute_kappa(const Space& space, const EventSeq& events) {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].birth < events[i - 1].birth)
            throw std::invalid_argument("compute_kappa: events not sorted by birth");
    KillingAssignment out;
    std::unordered_map<std::int64_t, bool> already_matched; // accepted events later matched
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Particle& x = events[i];
        KillingAssignment::Entry entry;
        entry.fate = KillingAssignment::Fate::SelfExit;
        // Earliest-ranked prior event that is opposite-colored, within the
        // radius, accepted, still alive, and not yet matched.
        for (std::size_t j = 0; j < i; ++j) {
            const Particle& y = events[j];
            if (y.color == x.color) continue;
            if (distance(space, y.pos, x.pos) > space.radius) continue;
            auto it = out.map.find(y.id);
            if (it == out.map.end() || it->second.fate != KillingAssignment::Fate::SelfExit)
                continue; // y was not accepted
            if (y.expiry() <= x.birth) continue; // y's patience ran out
            if (already_matched[y.id]) continue;
            entry.fate = KillingAssignment::Fate::Matched;
            entry.target = y.id;
            already_matched[y.id] = true;
            break;
        }
        out.map[x.id] = entry;
    }
    return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> match_pairs_from_log(
    const std::vector<EventLogRecord>& log) {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& rec : log)
        if (rec.kind == EventKind::MatchDeparture) pairs.emplace_back(rec.id_a, rec.id_b);
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

const char* coupled_transition_name(CoupledTransition t) {
    switch (t) {
        case CoupledTransition::BothAccept: return "both-accept";
        case CoupledTransition::AcceptVsMatchAntizombie: return "accept/match-antizombie";
        case CoupledTransition::MatchZombieVsAccept: return "match-zombie/accept";
        case CoupledTransition::MatchZombieVsMatchAntizombie: return "match-zombie/match-antizombie";
        case CoupledTransition::MatchZombieVsMatchRegular: return "match-zombie/match-regular";
        case CoupledTransition::MatchRegularVsMatchAntizombie: return "match-regular/match-antizombie";
        case CoupledTransition::MatchRegularSame: return "match-same-regular";
        case CoupledTransition::ExpireRegular: return "expire-regular";
        case CoupledTransition::ExpireZombie: return "expire-zombie";
        case CoupledTransition::ExpireAntizombie: return "expire-antizombie";
        default: return "?";
    }
}

bool TorusWindow::contains(const Space& space, const Point& p) const {
    if (side <= 0.0) return false;
    double L = std::get<SpaceTorus2D>(space.kind).side;
    double cx = 0.5 * L, cy = 0.5 * L;
    auto wrap = [L](double a, double b) {
        double d = std::fabs(a - b);
        d = std::fmod(d, L);
        return std::min(d, L - d);
    };
    return wrap(p.x, cx) <= 0.5 * side && wrap(p.y, cy) <= 0.5 * side;
}

namespace {

struct ProcessState {
    OrderedConfiguration particles;
    std::priority_queue<std::pair<double, std::int64_t>,
                        std::vector<std::pair<double, std::int64_t>>, std::greater<>>
        expiries;
    std::unordered_map<std::int64_t, char> present;

    void insert(const Particle& p) {
        particles.push_back(p);
        expiries.push({p.expiry(), p.id});
        present[p.id] = 1;
    }
    void erase_id(std::int64_t id) {
        for (std::size_t i = 0; i < particles.size(); ++i) {
            if (particles[i].id == id) {
                particles.erase(particles.begin() + static_cast<std::ptrdiff_t>(i));
                break;
            }
        }
        present.erase(id);
    }
    bool has(std::int64_t id) const { return present.count(id) != 0; }
    double next_expiry() {
        while (!expiries.empty() && !has(expiries.top().second)) expiries.pop();
        return expiries.empty() ? std::numeric_limits<double>::infinity()
                                : expiries.top().first;
    }
};

struct KeyedPoint {
    Point pos;
    Color color;
};

// Exact position/color key for matching initial particles across the pair.
struct InitKey {
    double x, y;
    int type;
    Color color;
    bool operator<(const InitKey& o) const {
        return std::tie(x, y, type, color) < std::tie(o.x, o.y, o.type, o.color);
    }
};

} // namespace

CoupledResult coupled_simulate(const Space& space, const ModelParams& params,
                               const OrderedConfiguration& init1,
                               const OrderedConfiguration& init2, double t_end,
                               std::uint64_t seed, std::uint64_t stream,
                               const CoupledOptions& options) {
    require_params(params, /*need_positive_mu=*/false);
    if (!is_valid_configuration(space, init1) || !is_valid_configuration(space, init2))
        throw std::invalid_argument("coupled_simulate: invalid initial configuration");

    // Re-key initial particles: shared (position, color) pairs get one id and
    // the first process's patience.
    std::map<InitKey, std::int64_t> key_ids;
    std::map<std::int64_t, Particle> canonical;
    std::int64_t next_init_id = -1;
    auto keyed = [&](const OrderedConfiguration& init) {
        OrderedConfiguration out;
        for (const auto& p : init) {
            InitKey key{p.pos.x, p.pos.y, p.pos.type, p.color};
            auto it = key_ids.find(key);
            if (it == key_ids.end()) {
                Particle q = p;
                q.id = next_init_id--;
                if (std::isnan(q.patience))
                    throw std::invalid_argument("coupled_simulate: initial particle lacks patience");
                key_ids.emplace(key, q.id);
                canonical.emplace(q.id, q);
                out.push_back(q);
            } else {
                out.push_back(canonical.at(it->second));
            }
        }
        return out;
    };
    OrderedConfiguration keyed1 = keyed(init1);
    OrderedConfiguration keyed2 = keyed(init2);
    {
        // Shared particles must appear in the same relative order.
        std::vector<std::int64_t> o1, o2;
        for (const auto& p : keyed1)
            if (std::any_of(keyed2.begin(), keyed2.end(),
                            [&](const Particle& q) { return q.id == p.id; }))
                o1.push_back(p.id);
        for (const auto& p : keyed2)
            if (std::any_of(keyed1.begin(), keyed1.end(),
                            [&](const Particle& q) { return q.id == p.id; }))
                o2.push_back(p.id);
        if (o1 != o2)
            throw std::invalid_argument(
                "coupled_simulate: shared initial particles are inconsistently ordered");
    }

    ProcessState proc1, proc2;
    for (const auto& p : keyed1) proc1.insert(p);
    for (const auto& p : keyed2) proc2.insert(p);

    CoupledResult result;
    auto& counts = result.case_counts;

    const double window_measure = total_measure(space);
    std::unordered_map<std::int64_t, KeyedPoint> info;
    for (const auto& [id, p] : canonical) info[id] = {p.pos, p.color};

    std::int64_t zombies = 0, antizombies = 0, specials_in_k = 0;
    auto in_window = [&](std::int64_t id) {
        return options.window && options.window->contains(space, info.at(id).pos);
    };
    // Class bookkeeping: 1 = process 1 only, 2 = process 2 only, 3 = both.
    auto membership = [&](std::int64_t id) {
        return (proc1.has(id) ? 1 : 0) | (proc2.has(id) ? 2 : 0);
    };
    auto on_class_change = [&](std::int64_t id, int before, int after) {
        auto delta = [&](int m, int sign) {
            if (m == 1) zombies += sign;
            if (m == 2) antizombies += sign;
            if (m == 1 || m == 2) {
                if (in_window(id)) specials_in_k += sign;
            }
        };
        if (before == after) return;
        delta(before, -1);
        delta(after, +1);
    };

    // Seed class counters from the initial memberships.
    for (const auto& [id, p] : canonical) on_class_change(id, 0, membership(id));

    EventSeq arrivals;
    {
        std::int64_t last_block = static_cast<std::int64_t>(std::ceil(t_end));
        for (std::int64_t b = 0; b < last_block; ++b) {
            EventSeq block = generate_block(space, params, seed, stream, b);
            for (auto& ev : block)
                if (ev.birth <= t_end) arrivals.push_back(ev);
        }
    }

    double next_sample = options.sample_dt > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    auto emit_samples_until = [&](double t) {
        while (next_sample <= t && next_sample <= t_end) {
            result.trace.times.push_back(next_sample);
            result.trace.zombie_density.push_back(static_cast<double>(zombies) / window_measure);
            result.trace.antizombie_density.push_back(static_cast<double>(antizombies) /
                                                      window_measure);
            next_sample += options.sample_dt;
        }
    };

    auto note_transition = [&](CoupledTransition t) {
        ++counts[static_cast<std::size_t>(t)];
    };

    std::size_t next_arrival = 0;
    while (true) {
        double t_arr = next_arrival < arrivals.size() ? arrivals[next_arrival].birth
                                                      : std::numeric_limits<double>::infinity();
        double t_exp1 = proc1.next_expiry();
        double t_exp2 = proc2.next_expiry();
        double t_next = std::min({t_arr, t_exp1, t_exp2});
        if (t_next > t_end || !std::isfinite(t_next)) break;
        emit_samples_until(t_next);

        if (options.window && specials_in_k > 0)
            result.window_presence_times.push_back(t_next);

        bool was_coalesced = zombies == 0 && antizombies == 0;

        if (t_arr <= t_next) {
            const Particle& ev = arrivals[next_arrival];
            ++next_arrival;
            info[ev.id] = {ev.pos, ev.color};
            MatchOutcome o1 = fifm_match(space, proc1.particles, ev.marked());
            MatchOutcome o2 = fifm_match(space, proc2.particles, ev.marked());
            std::int64_t y1 = o1.accepted() ? 0 : proc1.particles[*o1.matched_index].id;
            std::int64_t y2 = o2.accepted() ? 0 : proc2.particles[*o2.matched_index].id;
            int m_y1 = o1.accepted() ? -1 : membership(y1);
            int m_y2 = o2.accepted() ? -1 : membership(y2);

            if (options.instrument) {
                CoupledTransition t;
                if (o1.accepted() && o2.accepted()) t = CoupledTransition::BothAccept;
                else if (o1.accepted()) {
                    if (m_y2 != 2) throw std::logic_error("coupled: accept paired with non-antizombie match");
                    t = CoupledTransition::AcceptVsMatchAntizombie;
                } else if (o2.accepted()) {
                    if (m_y1 != 1) throw std::logic_error("coupled: accept paired with non-zombie match");
                    t = CoupledTransition::MatchZombieVsAccept;
                } else if (m_y1 == 1 && m_y2 == 2) t = CoupledTransition::MatchZombieVsMatchAntizombie;
                else if (m_y1 == 1 && m_y2 == 3) t = CoupledTransition::MatchZombieVsMatchRegular;
                else if (m_y1 == 3 && m_y2 == 2) t = CoupledTransition::MatchRegularVsMatchAntizombie;
                else if (m_y1 == 3 && m_y2 == 3) {
                    if (y1 != y2)
                        throw std::logic_error("coupled: regular matches disagree across the pair");
                    t = CoupledTransition::MatchRegularSame;
                } else {
                    throw std::logic_error("coupled: impossible arrival outcome pair");
                }
                note_transition(t);
            }

            if (o1.accepted()) proc1.insert(ev);
            else proc1.erase_id(y1);
            if (o2.accepted()) proc2.insert(ev);
            else proc2.erase_id(y2);

            // Apply class deltas for every particle whose membership moved.
            if (o1.accepted() || o2.accepted())
                on_class_change(ev.id, 0, membership(ev.id));
            if (!o1.accepted()) on_class_change(y1, m_y1, membership(y1));
            if (!o2.accepted() && y2 != y1) on_class_change(y2, m_y2, membership(y2));
        } else {
            // Expiry; a shared particle expires in both processes at once.
            bool in1 = t_exp1 <= t_next;
            std::int64_t id = in1 ? proc1.expiries.top().second : proc2.expiries.top().second;
            int before = membership(id);
            if (proc1.has(id)) proc1.erase_id(id);
            if (proc2.has(id)) proc2.erase_id(id);
            on_class_change(id, before, membership(id));
            if (options.instrument) {
                if (before == 3) note_transition(CoupledTransition::ExpireRegular);
                else if (before == 1) note_transition(CoupledTransition::ExpireZombie);
                else note_transition(CoupledTransition::ExpireAntizombie);
            }
        }

        if (was_coalesced && (zombies != 0 || antizombies != 0))
            result.specials_reappeared_after_zero = true;
    }
    emit_samples_until(t_end);
    return result;
}

std::vector<std::vector<double>> coupling_presence_times(const Space& space,
                                                         const ModelParams& params,
                                                         const TorusWindow& window,
                                                         int replicas, std::uint64_t seed,
                                                         const CouplingTimeOptions& opts) {
    if (!space.is_torus()) throw std::invalid_argument("coupling-time experiments run on a torus");
    double L = std::get<SpaceTorus2D>(space.kind).side;
    if (window.side > 0 && window.side + 4.0 * space.radius > L)
        throw std::invalid_argument("window must sit inside the torus with a 2-radius margin");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");

    std::vector<std::vector<double>> presence(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t r) {
        std::uint64_t stream = static_cast<std::uint64_t>(r) + 1;
        // Head-start process: empty at -earlier_start, run to 0.
        EventSeq pre;
        std::int64_t first = -static_cast<std::int64_t>(std::ceil(opts.earlier_start));
        for (std::int64_t b = first; b < 0; ++b) {
            EventSeq block = generate_block(space, params, seed, stream, b);
            for (auto& ev : block)
                if (ev.birth >= -opts.earlier_start && ev.birth <= 0.0) pre.push_back(ev);
        }
        SimOptions pre_opts;
        pre_opts.log_level = LogLevel::None;
        OrderedConfiguration sigma0 =
            simulate(space, params, {}, pre, 0.0, pre_opts).final_state;

        CoupledOptions copts;
        copts.sample_dt = 0.0;
        copts.window = window;
        CoupledResult res = coupled_simulate(space, params, {}, sigma0, opts.t_max, seed,
                                             stream, copts);
        presence[static_cast<std::size_t>(r)] = std::move(res.window_presence_times);
    });
    return presence;
}

void CouplingTimeResult::finalize(double t_max, double confirm) {
    censored.assign(tau.size(), false);
    censored_count = 0;
    double sum = 0.0, sumsq = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] > t_max - confirm) {
            censored[i] = true;
            ++censored_count;
            continue;
        }
        sum += tau[i];
        sumsq += tau[i] * tau[i];
        ++n;
    }
    if (n > 0) {
        mean = sum / static_cast<double>(n);
        double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
        stderr_mean = std::sqrt(var / static_cast<double>(n));
    }
}

CouplingTimeResult estimate_coupling_time(const Space& space, const ModelParams& params,
                                          const TorusWindow& window, int replicas,
                                          std::uint64_t seed,
                                          const CouplingTimeOptions& opts) {
    auto presence = coupling_presence_times(space, params, window, replicas, seed, opts);
    CouplingTimeResult out;
    out.tau.reserve(presence.size());
    for (const auto& p : presence) out.tau.push_back(p.empty() ? 0.0 : p.back());
    out.finalize(opts.t_max, opts.confirm);
    return out;
}

} // namespace fifm
