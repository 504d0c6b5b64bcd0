#include <doctest.h>

#include <cmath>
#include <map>

#include "fifm/analytics.hpp"
#include "fifm/bipartite.hpp"
#include "fifm/cftp.hpp"
#include "fifm/errors.hpp"
#include "fifm/parallel.hpp"

using namespace fifm;

namespace {

Particle event_at(double birth, double patience) {
    Particle p;
    p.pos = Point{0.5, 0, -1};
    p.color = Color::Red;
    p.birth = birth;
    p.patience = patience;
    p.id = static_cast<std::int64_t>(birth * 1000);
    return p;
}

} // namespace

TEST_CASE("regeneration time predicate") {
    CHECK(is_regeneration_time({}, 0.0));
    CHECK(!is_regeneration_time({event_at(-1.0, 2.0)}, 0.0));
    CHECK(is_regeneration_time({event_at(-3.0, 1.0)}, 0.0));
}

TEST_CASE("missed-event bound decays with depth") {
    Space space = make_interval(2.0);
    ModelParams params{1.0, 1.0};
    CHECK(missed_event_bound(space, params, 10.0) ==
          doctest::Approx(4.0 * std::exp(-10.0)));
    CHECK(missed_event_bound(space, params, 30.0) < 1e-10);
}

TEST_CASE("restart coherence: deeper regeneration starts agree") {
    ModelParams params{1.0, 1.0};
    for (const Space& space : {make_circle(3.0), make_interval(2.0)}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            BackwardDriving driving(space, params, seed, 0);
            auto regens = scan_regeneration_times(driving, 3);
            REQUIRE(regens.size() == 3);
            SimOptions opts;
            opts.log_level = LogLevel::None;
            std::vector<OrderedConfiguration> finals;
            for (std::int64_t t : regens) {
                auto events = driving.events_since(t);
                finals.push_back(simulate(space, params, {}, events, 0.0, opts).final_state);
            }
            for (std::size_t i = 1; i < finals.size(); ++i) {
                REQUIRE(finals[i].size() == finals[0].size());
                for (std::size_t k = 0; k < finals[0].size(); ++k) {
                    CHECK(finals[i][k].id == finals[0][k].id);
                    CHECK(finals[i][k].pos.x == finals[0][k].pos.x);
                    CHECK(finals[i][k].color == finals[0][k].color);
                }
            }
        }
    }
}

TEST_CASE("stationary samples are valid and deterministic in the seed") {
    Space space = make_circle(3.0);
    ModelParams params{1.0, 1.0};
    for (int i = 0; i < 200; ++i) {
        auto sample = sample_stationary_stream(space, params, 17, static_cast<std::uint64_t>(i));
        CHECK(is_valid_configuration(space, sample));
    }
    auto a = sample_stationary(space, params, 99);
    auto b = sample_stationary(space, params, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
}

TEST_CASE("large mu concentrates the stationary state on empty") {
    Space space = make_circle(3.0);
    ModelParams params{1.0, 50.0};
    const std::int64_t n = 4000;
    std::vector<char> empty(n, 0);
    parallel_for(n, [&](std::int64_t i) {
        empty[static_cast<std::size_t>(i)] =
            sample_stationary_stream(space, params, 23, static_cast<std::uint64_t>(i) + 1)
                .empty();
    });
    double frac = 0;
    for (char e : empty) frac += e;
    frac /= static_cast<double>(n);
    NormConstOptions nopts;
    nopts.mc_paths = 100000;
    auto norm = normalizing_constant(space, params, 6, nopts);
    double k = 1.0 / norm.k_inverse;
    double se = std::sqrt(k * (1 - k) / static_cast<double>(n)) + norm.mc_stderr;
    CHECK(std::fabs(frac - k) <= 4.0 * se);
    CHECK(k > 0.85);
}

TEST_CASE("stationary distribution on the single-edge graph matches the exact solve") {
    auto graph = CompatibilityGraph::make({"c"}, {"s"}, {{0, 0}}, {1.0, 1.0});
    Space space = graph.to_space();
    ModelParams params{1.0, 1.0};
    auto solve = solve_stationary_truncated(graph, params, 8);

    const std::int64_t n = 20000;
    std::vector<int> state_index(static_cast<std::size_t>(n), -1);
    std::map<PlainState, int> index;
    for (std::size_t i = 0; i < solve.states.size(); ++i)
        index[solve.states[i]] = static_cast<int>(i);
    parallel_for(n, [&](std::int64_t i) {
        auto cfg = sample_stationary_stream(space, params, 29,
                                            static_cast<std::uint64_t>(i) + 1);
        PlainState s;
        for (const auto& p : cfg) s.push_back(p.pos.type);
        auto it = index.find(s);
        state_index[static_cast<std::size_t>(i)] = it == index.end() ? -1 : it->second;
    });
    std::vector<double> freq(solve.states.size(), 0.0);
    for (int si : state_index)
        if (si >= 0) freq[static_cast<std::size_t>(si)] += 1.0;
    for (auto& f : freq) f /= static_cast<double>(n);
    for (std::size_t i = 0; i < solve.states.size(); ++i) {
        double p = solve.probability[i];
        double se = std::sqrt(std::max(p * (1 - p), 1e-9) / static_cast<double>(n));
        CHECK(std::fabs(freq[i] - p) <= 4.5 * se + 1e-6);
    }
}

TEST_CASE("regeneration probability estimate hits the closed form") {
    Space space = make_interval(1.0);
    ModelParams params{1.0, 2.0};
    auto [p, se] = estimate_regeneration_probability(space, params, 40000, 31);
    double exact = std::exp(-1.0); // arrival rate 2, mu 2
    CHECK(std::fabs(p - exact) <= 3.5 * se);
    CHECK_THROWS_AS(estimate_regeneration_probability(space, params, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("scan limit exhaustion raises a sampling error") {
    Space space = make_circle(30.0);
    ModelParams params{1.0, 0.2};
    CftpOptions opts;
    opts.scan_limit = 3;
    CHECK_THROWS_AS((void)sample_stationary(space, params, 1, opts), sampling_error);
}

TEST_CASE("mu must be positive for stationary sampling") {
    Space space = make_circle(3.0);
    CHECK_THROWS_AS((void)sample_stationary(space, {1.0, 0.0}, 1), std::invalid_argument);
}
