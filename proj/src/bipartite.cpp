#include "fifm/bipartite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

#include "fifm/errors.hpp"

namespace fifm {

using json = nlohmann::json;

double CompatibilityGraph::weight_total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double CompatibilityGraph::mass(std::uint64_t bits) const {
    double s = 0.0;
    while (bits) {
        int i = std::countr_zero(bits);
        s += weights[static_cast<std::size_t>(i)];
        bits &= bits - 1;
    }
    return s;
}

CompatibilityGraph CompatibilityGraph::make(std::vector<std::string> customers,
                                            std::vector<std::string> servers,
                                            const std::vector<std::pair<int, int>>& edges,
                                            std::vector<double> weights) {
    CompatibilityGraph g;
    const int nc = static_cast<int>(customers.size());
    const int ns = static_cast<int>(servers.size());
    if (nc + ns == 0) throw std::invalid_argument("graph: no types");
    if (nc + ns > 64) throw capability_error("graph: at most 64 types supported");
    g.customers = std::move(customers);
    g.servers = std::move(servers);
    if (weights.empty()) weights.assign(static_cast<std::size_t>(nc + ns), 1.0);
    if (static_cast<int>(weights.size()) != nc + ns)
        throw std::invalid_argument("graph: one weight per type");
    for (double w : weights)
        if (!(w > 0)) throw std::invalid_argument("graph: weights must be positive");
    g.weights = std::move(weights);
    g.adjacency.assign(static_cast<std::size_t>(nc + ns), 0);
    for (auto [c, s] : edges) {
        if (c < 0 || c >= nc || s < 0 || s >= ns) throw std::invalid_argument("graph: bad edge");
        int sg = nc + s;
        g.adjacency[static_cast<std::size_t>(c)] |= 1ull << sg;
        g.adjacency[static_cast<std::size_t>(sg)] |= 1ull << c;
    }
    return g;
}

CompatibilityGraph CompatibilityGraph::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("graph: invalid JSON: ") + e.what());
    }
    std::vector<std::string> customers, servers;
    for (const auto& c : j.at("customers")) customers.push_back(c.get<std::string>());
    for (const auto& s : j.at("servers")) servers.push_back(s.get<std::string>());
    std::vector<std::pair<int, int>> edges;
    auto find_index = [](const std::vector<std::string>& v, const std::string& n) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] == n) return static_cast<int>(i);
        return -1;
    };
    for (const auto& e : j.at("edges")) {
        if (e.at(0).is_string()) {
            int c = find_index(customers, e.at(0).get<std::string>());
            int s = find_index(servers, e.at(1).get<std::string>());
            if (c < 0 || s < 0) throw std::invalid_argument("graph: edge names unknown");
            edges.emplace_back(c, s);
        } else {
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
    }
    std::vector<double> weights;
    if (j.contains("weights")) {
        if (j.at("weights").is_object()) {
            for (const auto& name : customers) weights.push_back(j.at("weights").at(name).get<double>());
            for (const auto& name : servers) weights.push_back(j.at("weights").at(name).get<double>());
        } else {
            weights = j.at("weights").get<std::vector<double>>();
        }
    }
    return make(std::move(customers), std::move(servers), edges, std::move(weights));
}

Space CompatibilityGraph::to_space(double radius) const {
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> edges;
    names.reserve(weights.size());
    for (int t = 0; t < num_types(); ++t) names.push_back(name(t));
    for (int c = 0; c < static_cast<int>(customers.size()); ++c)
        for (int t = 0; t < num_types(); ++t)
            if ((adjacency[static_cast<std::size_t>(c)] >> t) & 1u) edges.emplace_back(c, t);
    return make_finite(std::move(names), weights, edges, radius);
}

std::string disc_state_to_string(const CompatibilityGraph& g, const DiscState& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << " ";
        os << g.name(s[i].type) << (s[i].mark == Mark::Unmatched ? "u" : "m");
    }
    os << "]";
    return os.str();
}

namespace {

bool compatible(const CompatibilityGraph& g, int a, int b) {
    return (g.adj(a) >> b) & 1u;
}

} // namespace

bool is_valid_backward_state(const CompatibilityGraph& g, const DiscState& s) {
    if (!s.empty() && s.front().mark != Mark::Unmatched) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            bool uu = s[i].mark == Mark::Unmatched && s[j].mark == Mark::Unmatched;
            bool um = s[i].mark == Mark::Unmatched && s[j].mark == Mark::Matched;
            if ((uu || um) && compatible(g, s[i].type, s[j].type)) return false;
        }
    }
    return true;
}

bool is_valid_forward_state(const CompatibilityGraph& g, const DiscState& s) {
    if (!s.empty() && s.back().mark != Mark::Matched) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            bool mm = s[i].mark == Mark::Matched && s[j].mark == Mark::Matched;
            bool um = s[i].mark == Mark::Unmatched && s[j].mark == Mark::Matched;
            if ((mm || um) && compatible(g, s[i].type, s[j].type)) return false;
        }
    }
    return true;
}

std::vector<DiscState> enumerate_valid_states(const CompatibilityGraph& g, int max_len,
                                              std::int64_t state_cap) {
    if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
    std::vector<DiscState> out;
    out.push_back({});
    DiscState current;
    std::int64_t count = 1;
    // Grow valid states item by item; the three conditions check
    // incrementally against the existing prefix.
    std::function<void()> grow = [&] {
        if (static_cast<int>(current.size()) == max_len) return;
        for (int t = 0; t < g.num_types(); ++t) {
            for (Mark m : {Mark::Unmatched, Mark::Matched}) {
                if (current.empty() && m == Mark::Matched) continue;
                bool ok = true;
                for (const auto& item : current) {
                    if (item.mark != Mark::Unmatched) continue;
                    if (compatible(g, item.type, t)) { ok = false; break; }
                }
                if (!ok) continue;
                if (++count > state_cap)
                    throw capability_error("state enumeration exceeds the cap");
                current.push_back({t, m});
                out.push_back(current);
                grow();
                current.pop_back();
            }
        }
    };
    grow();
    std::stable_sort(out.begin(), out.end(),
                     [](const DiscState& a, const DiscState& b) { return a.size() < b.size(); });
    return out;
}

double disc_rho(const CompatibilityGraph& g, const ModelParams& params, int n) {
    return params.intensity * g.weight_total() + n * params.mu;
}

namespace {

DiscState prune_leading_matched(DiscState s) {
    std::size_t drop = 0;
    while (drop < s.size() && s[drop].mark == Mark::Matched) ++drop;
    s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(drop));
    return s;
}

// Unmatched items of the prefix strictly before position i (0-based).
std::uint64_t unmatched_neighborhood_before(const CompatibilityGraph& g, const DiscState& s,
                                            std::size_t i) {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < i; ++j)
        if (s[j].mark == Mark::Unmatched) bits |= g.adj(s[j].type);
    return bits;
}

} // namespace

std::vector<RatedTransition> backward_transitions(const CompatibilityGraph& g,
                                                  const ModelParams& params,
                                                  const DiscState& state) {
    require_params(params);
    if (!is_valid_backward_state(g, state))
        throw std::invalid_argument("backward_transitions: invalid state");
    std::vector<RatedTransition> out;

    std::uint64_t all_unmatched = unmatched_neighborhood_before(g, state, state.size());

    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i].mark != Mark::Unmatched) continue;
        // Reneging: remove, file a matched copy at the end, prune.
        DiscState target = state;
        target.erase(target.begin() + static_cast<std::ptrdiff_t>(i));
        target.push_back({state[i].type, Mark::Matched});
        out.push_back({prune_leading_matched(std::move(target)), params.mu, TransKind::Renege});

        // Match-and-exchange: an arrival of type t lands in W_{x_i}, i.e. t
        // is compatible with x_i but with no earlier unmatched item.
        std::uint64_t w_bits = g.adj(state[i].type) &
                               ~unmatched_neighborhood_before(g, state, i);
        std::uint64_t bits = w_bits;
        while (bits) {
            int t = std::countr_zero(bits);
            bits &= bits - 1;
            DiscState swapped = state;
            swapped[i] = {t, Mark::Matched};
            swapped.push_back({state[i].type, Mark::Matched});
            out.push_back({prune_leading_matched(std::move(swapped)),
                           params.intensity * g.weight(t), TransKind::MatchExchange});
        }
    }

    // Acceptance: arrival types compatible with no unmatched item.
    for (int t = 0; t < g.num_types(); ++t) {
        if ((all_unmatched >> t) & 1u) continue;
        DiscState target = state;
        target.push_back({t, Mark::Unmatched});
        out.push_back({std::move(target), params.intensity * g.weight(t), TransKind::Accept});
    }
    return out;
}

namespace {

// Q_m^i: matched items strictly after position i (1-based prefix count).
std::vector<int> matched_suffix_counts(const DiscState& s) {
    const int n = static_cast<int>(s.size());
    std::vector<int> q(static_cast<std::size_t>(n) + 1, 0);
    for (int i = n - 1; i >= 0; --i)
        q[static_cast<std::size_t>(i)] =
            q[static_cast<std::size_t>(i) + 1] + (s[static_cast<std::size_t>(i)].mark == Mark::Matched);
    return q;
}

int q_m_at(const std::vector<int>& q, int i) {
    const int n = static_cast<int>(q.size()) - 1;
    return i >= n ? 0 : q[static_cast<std::size_t>(i)];
}

} // namespace

double forward_tau_tail(const CompatibilityGraph& g, const ModelParams& params,
                        const DiscState& state, int k) {
    auto q = matched_suffix_counts(state);
    double tail = 1.0;
    for (int i = 1; i <= k; ++i) {
        double r = disc_rho(g, params, q_m_at(q, i));
        tail *= r / (r + params.mu);
    }
    return tail;
}

double forward_tau_pmf(const CompatibilityGraph& g, const ModelParams& params,
                       const DiscState& state, int k) {
    if (k < 1) return 0.0;
    auto q = matched_suffix_counts(state);
    double p = params.mu / (disc_rho(g, params, q_m_at(q, k)) + params.mu);
    for (int i = 1; i < k; ++i) {
        double r = disc_rho(g, params, q_m_at(q, i));
        p *= r / (r + params.mu);
    }
    return p;
}

ForwardTransitions forward_transitions(const CompatibilityGraph& g, const ModelParams& params,
                                       const DiscState& state, int target_len_cap) {
    require_params(params);
    if (!is_valid_forward_state(g, state))
        throw std::invalid_argument("forward_transitions: invalid state");
    ForwardTransitions out;
    const int n = static_cast<int>(state.size());
    auto qm = matched_suffix_counts(state);
    const double rho0 = disc_rho(g, params, q_m_at(qm, 0));
    const double lambda_total = params.intensity * g.weight_total();

    // Aggregate over the sampled head when the state is empty.
    struct HeadCase {
        DiscState working;
        double prob;
    };
    std::vector<HeadCase> heads;
    if (n == 0) {
        for (int t = 0; t < g.num_types(); ++t)
            heads.push_back({{DiscItem{t, Mark::Unmatched}}, params.intensity * g.weight(t) / lambda_total});
    } else if (state.front().mark == Mark::Matched) {
        DiscState target(state.begin() + 1, state.end());
        out.transitions.push_back({std::move(target), rho0, TransKind::PopMatched});
        return out;
    } else {
        heads.push_back({state, 1.0});
    }

    double emitted = 0.0;
    for (const auto& head : heads) {
        const DiscState& w = head.working;
        const int wn = static_cast<int>(w.size());
        auto wq = matched_suffix_counts(w);
        const int head_type = w.front().type;
        const double compat_mass = params.intensity * g.mass(g.adj(head_type));

        auto tau_pmf = [&](int k) {
            double p = params.mu / (disc_rho(g, params, q_m_at(wq, k)) + params.mu);
            for (int i = 1; i < k; ++i) {
                double r = disc_rho(g, params, q_m_at(wq, i));
                p *= r / (r + params.mu);
            }
            return p;
        };
        auto tau_tail = [&](int k) {
            double t = 1.0;
            for (int i = 1; i <= k; ++i) {
                double r = disc_rho(g, params, q_m_at(wq, i));
                t *= r / (r + params.mu);
            }
            return t;
        };

        // First FCFS slot within the state: the earliest unmatched item
        // (position >= 2) compatible with the head.
        int first_compat = 0; // 1-based; 0 = none
        for (int i = 2; i <= wn; ++i) {
            const auto& item = w[static_cast<std::size_t>(i - 1)];
            if (item.mark == Mark::Unmatched && compatible(g, item.type, head_type)) {
                first_compat = i;
                break;
            }
        }

        if (first_compat != 0) {
            // Match inside the state; happens whenever tau reaches the slot.
            DiscState target(w.begin() + 1, w.end());
            target[static_cast<std::size_t>(first_compat - 2)] = {head_type, Mark::Matched};
            double rate = rho0 * head.prob * tau_tail(first_compat - 1);
            out.transitions.push_back({std::move(target), rate, TransKind::FcfsInsert});
            emitted += rate;
            // tau below the slot files the head without a match.
            for (int k = 1; k < first_compat; ++k) {
                DiscState t2(w.begin() + 1, w.end());
                t2.insert(t2.begin() + (k - 1), {head_type, Mark::Matched});
                double r2 = rho0 * head.prob * tau_pmf(k);
                out.transitions.push_back({std::move(t2), r2, TransKind::NoMatchInsert});
                emitted += r2;
            }
        } else {
            // No slot inside the state: tau <= wn files the head in place;
            // beyond the state, enumerate fill-in tuples of new unmatched
            // arrivals (head-incompatible ones persist, a compatible one
            // ends the excursion with a match).
            for (int k = 1; k <= wn; ++k) {
                DiscState t2(w.begin() + 1, w.end());
                t2.insert(t2.begin() + (k - 1), {head_type, Mark::Matched});
                double r2 = rho0 * head.prob * tau_pmf(k);
                out.transitions.push_back({std::move(t2), r2, TransKind::NoMatchInsert});
                emitted += r2;
            }
            // DFS over retained (incompatible) fill types.
            std::vector<int> fills;
            std::function<void(double)> extend = [&](double fill_prob) {
                const int d = static_cast<int>(fills.size());
                const int target_len = wn + d; // both emissions below
                if (target_len > target_len_cap) return;
                auto base_target = [&] {
                    DiscState t3(w.begin() + 1, w.end());
                    for (int f : fills) t3.push_back({f, Mark::Unmatched});
                    return t3;
                };
                if (d >= 1) {
                    // tau = wn + d with every fill incompatible.
                    DiscState t3 = base_target();
                    t3.push_back({head_type, Mark::Matched});
                    double r3 = rho0 * head.prob * tau_pmf(wn + d) * fill_prob;
                    out.transitions.push_back({std::move(t3), r3, TransKind::NoMatchInsert});
                    emitted += r3;
                }
                {
                    // Fill at position wn + d + 1 is compatible: match there,
                    // aggregated over the compatible types.
                    DiscState t3 = base_target();
                    t3.push_back({head_type, Mark::Matched});
                    double r3 = rho0 * head.prob * tau_tail(wn + d) *
                                (compat_mass / lambda_total) * fill_prob;
                    out.transitions.push_back({std::move(t3), r3, TransKind::FcfsInsert});
                    emitted += r3;
                }
                for (int t = 0; t < g.num_types(); ++t) {
                    if (compatible(g, t, head_type)) continue;
                    fills.push_back(t);
                    extend(fill_prob * params.intensity * g.weight(t) / lambda_total);
                    fills.pop_back();
                }
            };
            extend(1.0);
        }
    }
    out.tail_rate = std::max(0.0, rho0 - emitted);
    // Merge duplicate targets: a no-match filing and an aggregated match can
    // land on the same list.
    std::map<DiscState, std::pair<double, TransKind>> merged;
    for (auto& tr : out.transitions) {
        auto [it, inserted] = merged.try_emplace(tr.target, std::make_pair(tr.rate, tr.kind));
        if (!inserted) it->second.first += tr.rate;
    }
    out.transitions.clear();
    for (auto& [target, rk] : merged)
        out.transitions.push_back({target, rk.first, rk.second});
    return out;
}

DiscState reverse_map(const DiscState& state) {
    DiscState out(state.rbegin(), state.rend());
    for (auto& item : out)
        item.mark = item.mark == Mark::Unmatched ? Mark::Matched : Mark::Unmatched;
    return out;
}

double log_detailed_product_form(const CompatibilityGraph& g, const ModelParams& params,
                                 const DiscState& state) {
    double log_v = 0.0;
    int q_u = 0;
    for (const auto& item : state) {
        if (item.mark == Mark::Unmatched) ++q_u;
        log_v += std::log(params.intensity * g.weight(item.type)) -
                 std::log(disc_rho(g, params, q_u));
    }
    return log_v;
}

BalanceReport check_local_balance(const CompatibilityGraph& g, const ModelParams& params,
                                  int max_len, double density_mu_perturbation,
                                  double tolerance) {
    require_params(params);
    BalanceReport report;
    report.density_mu_perturbation = density_mu_perturbation;
    ModelParams density_params = params;
    density_params.mu += density_mu_perturbation;

    auto states = enumerate_valid_states(g, max_len);
    for (const auto& j : states) {
        // Distinct transitions may share a target (identical reneges, or a
        // match-exchange whose pruning lands on a renege target); the
        // balance identity holds for the aggregated rates.
        std::map<DiscState, double> by_target;
        for (const auto& tr : backward_transitions(g, params, j))
            by_target[tr.target] += tr.rate;
        double log_pi_j = log_detailed_product_form(g, density_params, j);
        for (const auto& [k, q_jk] : by_target) {
            double log_pi_k = log_detailed_product_form(g, density_params, k);
            double lhs = std::exp(log_pi_j) * q_jk;

            DiscState from = reverse_map(k);
            DiscState to = reverse_map(j);
            auto fwd = forward_transitions(g, params, from,
                                           static_cast<int>(j.size()) + 1);
            double q_rev = 0.0;
            for (const auto& ft : fwd.transitions)
                if (ft.target == to) q_rev += ft.rate;
            double rhs = std::exp(log_pi_k) * q_rev;

            double rel = std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
            ++report.transitions_checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.witness = disc_state_to_string(g, j) + " -> " +
                                 disc_state_to_string(g, k) + " lhs=" + std::to_string(lhs) +
                                 " rhs=" + std::to_string(rhs);
            }
        }
    }
    report.pass = report.max_rel_err <= tolerance;
    return report;
}

std::vector<PlainState> enumerate_plain_states(const CompatibilityGraph& g, int max_len,
                                               std::int64_t state_cap) {
    std::vector<PlainState> out;
    out.push_back({});
    PlainState current;
    std::int64_t count = 1;
    std::function<void(std::uint64_t)> grow = [&](std::uint64_t present) {
        if (static_cast<int>(current.size()) == max_len) return;
        for (int t = 0; t < g.num_types(); ++t) {
            if (g.adj(t) & present) continue;
            if (++count > state_cap) throw capability_error("plain enumeration exceeds the cap");
            current.push_back(t);
            out.push_back(current);
            grow(present | (1ull << t));
            current.pop_back();
        }
    };
    grow(0);
    std::stable_sort(out.begin(), out.end(),
                     [](const PlainState& a, const PlainState& b) { return a.size() < b.size(); });
    return out;
}

double log_plain_product_form(const CompatibilityGraph& g, const ModelParams& params,
                              const PlainState& state) {
    double log_v = 0.0;
    std::uint64_t covered = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        covered |= g.adj(state[i]);
        double den = params.intensity * g.mass(covered) + static_cast<double>(i + 1) * params.mu;
        log_v += std::log(params.intensity * g.weight(state[i])) - std::log(den);
    }
    return log_v;
}

namespace {

// Sharp per-level mass bound: after the first particle, each extension
// contributes at most max-free-mass / (b + i mu), where the free mass is
// maximized over valid occupied type sets.
double plain_tail_bound(const CompatibilityGraph& g, const ModelParams& params, int level) {
    const int n = g.num_types();
    double lambda_total = params.intensity * g.weight_total();
    double b = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) b = std::min(b, params.intensity * g.mass(g.adj(t)));
    double lambda_free = 0.0;
    if (n <= 20) {
        for (std::uint64_t set = 1; set < (1ull << n); ++set) {
            bool valid = true;
            std::uint64_t covered = 0;
            for (int t = 0; t < n && valid; ++t)
                if ((set >> t) & 1u) {
                    if (g.adj(t) & set) valid = false;
                    covered |= g.adj(t);
                }
            if (!valid) continue;
            double free = 0.0;
            for (int t = 0; t < n; ++t)
                if (!((covered >> t) & 1u)) free += params.intensity * g.weight(t);
            lambda_free = std::max(lambda_free, free);
        }
    } else {
        lambda_free = lambda_total;
    }

    auto level_mass = [&](int m) {
        double v = lambda_total / (b + params.mu);
        for (int i = 2; i <= m; ++i) v *= lambda_free / (b + i * params.mu);
        return v;
    };
    double tail = 0.0;
    int m = level;
    double t = level_mass(level);
    while (true) {
        ++m;
        t *= lambda_free / (b + m * params.mu);
        tail += t;
        double q = lambda_free / (b + (m + 1) * params.mu);
        if (q < 1.0) {
            tail += t * q / (1.0 - q);
            break;
        }
    }
    return tail;
}

} // namespace

StationarySolve solve_stationary_truncated(const CompatibilityGraph& g,
                                           const ModelParams& params, int max_len,
                                           int buffer_levels) {
    require_params(params);
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    const int solve_len = max_len + std::max(0, buffer_levels);
    auto states = enumerate_plain_states(g, solve_len);
    const std::int64_t m = static_cast<std::int64_t>(states.size());

    std::map<PlainState, std::int64_t> index;
    for (std::int64_t i = 0; i < m; ++i) index.emplace(states[static_cast<std::size_t>(i)], i);

    // Column-major Q^T with the last balance equation replaced by sum(pi)=1.
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> diag(static_cast<std::size_t>(m), 0.0);
    auto add_rate = [&](std::int64_t from, std::int64_t to, double rate) {
        diag[static_cast<std::size_t>(from)] -= rate;
        if (from != to && to >= 0)
            trips.emplace_back(static_cast<int>(to), static_cast<int>(from), rate);
    };

    for (std::int64_t si = 0; si < m; ++si) {
        const PlainState& s = states[static_cast<std::size_t>(si)];
        std::uint64_t present = 0;
        for (int t : s) present |= 1ull << t;
        // Departures: item i leaves at rate mu + lambda_bar(W_i).
        std::uint64_t covered = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::uint64_t w_bits = g.adj(s[i]) & ~covered;
            covered |= g.adj(s[i]);
            PlainState target = s;
            target.erase(target.begin() + static_cast<std::ptrdiff_t>(i));
            double rate = params.mu + params.intensity * g.mass(w_bits);
            add_rate(si, index.at(target), rate);
        }
        // Acceptances; transitions past the solve boundary are censored.
        if (static_cast<int>(s.size()) < solve_len) {
            for (int t = 0; t < g.num_types(); ++t) {
                if (g.adj(t) & present) continue;
                PlainState target = s;
                target.push_back(t);
                add_rate(si, index.at(target), params.intensity * g.weight(t));
            }
        }
    }
    for (std::int64_t i = 0; i < m; ++i)
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[static_cast<std::size_t>(i)]);

    Eigen::SparseMatrix<double> a(static_cast<int>(m), static_cast<int>(m));
    a.setFromTriplets(trips.begin(), trips.end());
    // Replace the last row with the normalization.
    for (std::int64_t col = 0; col < m; ++col) a.coeffRef(static_cast<int>(m - 1), static_cast<int>(col)) = 1.0;
    a.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.analyzePattern(a);
    solver.factorize(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("stationary solve failed (disconnected truncation?)");
    Eigen::VectorXd pi = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !pi.allFinite())
        throw std::runtime_error("stationary solve produced a singular system");

    // Product form normalized over the same solved set.
    double pf_total = 0.0;
    std::vector<double> pf(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        pf[static_cast<std::size_t>(i)] =
            std::exp(log_plain_product_form(g, params, states[static_cast<std::size_t>(i)]));
        pf_total += pf[static_cast<std::size_t>(i)];
    }

    StationarySolve out;
    out.solved_states = m;
    double tail = plain_tail_bound(g, params, solve_len);
    double boundary_flux = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const PlainState& s = states[static_cast<std::size_t>(i)];
        if (static_cast<int>(s.size()) != solve_len) continue;
        std::uint64_t present = 0;
        for (int t : s) present |= 1ull << t;
        double free = 0.0;
        for (int t = 0; t < g.num_types(); ++t)
            if (!(g.adj(t) & present)) free += params.intensity * g.weight(t);
        boundary_flux += pf[static_cast<std::size_t>(i)] / pf_total * free;
    }
    out.truncation_bound = tail / pf_total + boundary_flux / params.mu;

    for (std::int64_t i = 0; i < m; ++i) {
        const PlainState& s = states[static_cast<std::size_t>(i)];
        if (static_cast<int>(s.size()) > max_len) continue;
        out.states.push_back(s);
        out.probability.push_back(pi(i));
        out.product_form.push_back(pf[static_cast<std::size_t>(i)] / pf_total);
        out.max_abs_diff = std::max(out.max_abs_diff,
                                    std::fabs(pi(i) - pf[static_cast<std::size_t>(i)] / pf_total));
    }
    return out;
}

} // namespace fifm
