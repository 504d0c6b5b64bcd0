#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fifm/core.hpp"

namespace fifm {

/// Bipartite compatibility graph with per-type arrival masses. Types are
/// indexed globally, customers first.
struct CompatibilityGraph {
    std::vector<std::string> customers;
    std::vector<std::string> servers;
    std::vector<double> weights;            // per global type index
    std::vector<std::uint64_t> adjacency;   // bitset of compatible types

    int num_types() const { return static_cast<int>(weights.size()); }
    bool is_customer(int t) const { return t < static_cast<int>(customers.size()); }
    double weight(int t) const { return weights[static_cast<std::size_t>(t)]; }
    std::uint64_t adj(int t) const { return adjacency[static_cast<std::size_t>(t)]; }
    double weight_total() const;
    double mass(std::uint64_t bits) const;
    const std::string& name(int t) const {
        return is_customer(t) ? customers[static_cast<std::size_t>(t)]
                              : servers[static_cast<std::size_t>(t - customers.size())];
    }

    static CompatibilityGraph make(std::vector<std::string> customers,
                                   std::vector<std::string> servers,
                                   const std::vector<std::pair<int, int>>& edges,
                                   std::vector<double> weights);
    static CompatibilityGraph from_json(const std::string& text);

    /// The same graph as a finite type space, so the generic simulator,
    /// sampler and density code run on it.
    Space to_space(double radius = 1.0) const;
};

struct DiscItem {
    int type = 0;
    Mark mark = Mark::Unmatched;
    bool operator==(const DiscItem&) const = default;
    bool operator<(const DiscItem& o) const {
        return type != o.type ? type < o.type : mark < o.mark;
    }
};

/// Detailed state: types with unmatched/matched marks, in arrival order.
using DiscState = std::vector<DiscItem>;

std::string disc_state_to_string(const CompatibilityGraph& g, const DiscState& s);

bool is_valid_backward_state(const CompatibilityGraph& g, const DiscState& s);
bool is_valid_forward_state(const CompatibilityGraph& g, const DiscState& s);

/// All valid backward detailed states with at most max_len items,
/// enumeration order deterministic (length, then lexicographic growth).
std::vector<DiscState> enumerate_valid_states(const CompatibilityGraph& g, int max_len,
                                              std::int64_t state_cap = 2'000'000);

enum class TransKind : std::uint8_t {
    Renege,
    MatchExchange,
    Accept,
    PopMatched,
    FcfsInsert,   // reversed match: the head finds a first-compatible slot
    NoMatchInsert // reversed renege: the head is filed at position tau
};

struct RatedTransition {
    DiscState target;
    double rate = 0.0;
    TransKind kind = TransKind::Renege;
};

/// Backward detailed process: reneging, match-and-exchange, acceptance;
/// leading matched items are pruned from every target.
std::vector<RatedTransition> backward_transitions(const CompatibilityGraph& g,
                                                  const ModelParams& params,
                                                  const DiscState& state);

/// rho(n) = intensity * weight_total + n * mu.
double disc_rho(const CompatibilityGraph& g, const ModelParams& params, int n);

/// P(tau = k) and P(tau > k) for the forward process's insertion depth.
double forward_tau_pmf(const CompatibilityGraph& g, const ModelParams& params,
                       const DiscState& state, int k);
double forward_tau_tail(const CompatibilityGraph& g, const ModelParams& params,
                        const DiscState& state, int k);

struct ForwardTransitions {
    std::vector<RatedTransition> transitions;
    double tail_rate = 0.0; // outflow to targets beyond the length cap
};

/// Forward detailed process: pops a matched head, or files an unmatched
/// head at a random depth with i.i.d. fill-ins integrated out analytically.
/// Enumerates exact rates to every target of length <= target_len_cap.
ForwardTransitions forward_transitions(const CompatibilityGraph& g, const ModelParams& params,
                                       const DiscState& state, int target_len_cap);

/// Reverse the order and flip the marks.
DiscState reverse_map(const DiscState& state);

/// log of the unnormalized detailed product form
/// prod_i lambda(c_i) / rho(Q_u^i).
double log_detailed_product_form(const CompatibilityGraph& g, const ModelParams& params,
                                 const DiscState& state);

struct BalanceReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::int64_t transitions_checked = 0;
    std::string witness; // worst transition, for failure reports

    /// Density evaluated with mu shifted by this amount; a nonzero value is
    /// a deliberate negative control and should break the balance.
    double density_mu_perturbation = 0.0;
};

/// Checks pi(j) q(j,k) = pi(k) q'(phi(k), phi(j)) over every backward
/// transition between enumerated states.
BalanceReport check_local_balance(const CompatibilityGraph& g, const ModelParams& params,
                                  int max_len, double density_mu_perturbation = 0.0,
                                  double tolerance = 1e-10);

/// Plain (order-only, no marks) chain of the matching process itself.
using PlainState = std::vector<int>;

std::vector<PlainState> enumerate_plain_states(const CompatibilityGraph& g, int max_len,
                                               std::int64_t state_cap = 2'000'000);

double log_plain_product_form(const CompatibilityGraph& g, const ModelParams& params,
                              const PlainState& state);

struct StationarySolve {
    std::vector<PlainState> states;     // reported states, length <= max_len
    std::vector<double> probability;    // solved stationary mass
    std::vector<double> product_form;   // normalized product form on the same states
    double truncation_bound = 0.0;      // tail mass + boundary-flux estimate
    std::int64_t solved_states = 0;     // including buffer levels
    double max_abs_diff = 0.0;
};

/// Solves pi Q = 0 on states of length <= max_len (+ internal buffer levels
/// so censoring distortion stays below the reported bound).
StationarySolve solve_stationary_truncated(const CompatibilityGraph& g,
                                           const ModelParams& params, int max_len,
                                           int buffer_levels = 2);

} // namespace fifm
