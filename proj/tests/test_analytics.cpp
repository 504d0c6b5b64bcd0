#include <doctest.h>

#include <cmath>

#include "fifm/analytics.hpp"
#include "fifm/bipartite.hpp"
#include "fifm/errors.hpp"
#include "fifm/fkg.hpp"
#include "fifm/rng.hpp"

using namespace fifm;

namespace {

MarkedPoint mp1(double x, Color c) { return {Point{x, 0, -1}, c}; }

Particle part(double x, Color c) {
    Particle p;
    p.pos = Point{x, 0, -1};
    p.color = c;
    p.patience = 1.0;
    return p;
}

Space single_edge_space() { return make_finite({"c", "s"}, {1.0, 1.0}, {{0, 1}}); }

} // namespace

TEST_CASE("rho substitutions") {
    CHECK(rho(2, make_interval(3.0), {1.0, 0.5}) == doctest::Approx(7.0));
    CHECK(rho(0, make_interval(3.0), {1.0, 0.5}) == doctest::Approx(6.0));
    Space f = make_finite({"c", "s"}, {1.5, 0.5}, {{0, 1}});
    CHECK(rho(3, f, {1.0, 1.0}) == doctest::Approx(5.0));
}

TEST_CASE("ordered product form") {
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    CHECK(pi_ordered(space, params, {}).log_value == doctest::Approx(0.0));
    CHECK(pi_ordered(space, params, {part(1.5, Color::Red)}).value() ==
          doctest::Approx(1.0 / 3.0));
    OrderedConfiguration invalid = {part(1.0, Color::Red), part(1.5, Color::Blue)};
    CHECK(pi_ordered(space, params, invalid).is_zero());
}

TEST_CASE("backward detailed product form") {
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    CHECK(pi_hat_detailed(space, params, {}).value() == doctest::Approx(1.0 / 6.0));
    DetailedState one = {{Point{1.5}, Color::Red, Mark::Unmatched}};
    CHECK(pi_hat_detailed(space, params, one).value() == doctest::Approx(1.0 / 42.0));
    DetailedState bad = {{Point{1.5}, Color::Red, Mark::Matched}};
    CHECK(pi_hat_detailed(space, params, bad).is_zero());
}

TEST_CASE("summing matched insertions recovers the ordered form") {
    // On the single-edge type space, integrate the detailed density over
    // every matched-insertion pattern around gamma = (c, c): a truncated
    // geometric sum that must equal pi_ordered(gamma) / rho(0).
    Space space = single_edge_space();
    ModelParams params{1.0, 1.0};
    OrderedConfiguration gamma = {{Point{0, 0, 0}, Color::Red, 0, 1, 1},
                                  {Point{0, 0, 0}, Color::Red, 0, 1, 2}};
    double target = pi_ordered(space, params, gamma).value() / rho(0, space, params);

    const double w_c = 1.0; // the only insertable type is c itself
    double sum = 0.0;
    const int cap = 60;
    for (int l1 = 0; l1 <= cap; ++l1) {
        for (int l2 = 0; l2 <= cap - l1; ++l2) {
            DetailedState state;
            state.push_back({Point{0, 0, 0}, Color::Red, Mark::Unmatched});
            for (int i = 0; i < l1; ++i)
                state.push_back({Point{0, 0, 0}, Color::Red, Mark::Matched});
            state.push_back({Point{0, 0, 0}, Color::Red, Mark::Unmatched});
            for (int i = 0; i < l2; ++i)
                state.push_back({Point{0, 0, 0}, Color::Red, Mark::Matched});
            sum += pi_hat_detailed(space, params, state).value() *
                   std::pow(w_c, l1 + l2);
        }
    }
    CHECK(sum == doctest::Approx(target).epsilon(1e-10));
}

TEST_CASE("janossy permutation sum") {
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    CHECK(log_janossy_tilde(space, params, std::vector<MarkedPoint>{}) ==
          doctest::Approx(0.0));
    std::vector<MarkedPoint> one = {mp1(1.5, Color::Red)};
    CHECK(std::exp(log_janossy_tilde(space, params, one)) == doctest::Approx(1.0 / 3.0));
    // Singleton consistency with the ordered form.
    CHECK(log_janossy_tilde(space, params, one) ==
          doctest::Approx(pi_ordered(space, params, {part(1.5, Color::Red)}).log_value));
}

TEST_CASE("janossy is symmetric and splits for separated same-color points") {
    Space space = make_interval(9.0);
    ModelParams params{1.0, 1.0};
    std::vector<MarkedPoint> pts = {mp1(1.0, Color::Red), mp1(7.5, Color::Red)};
    std::vector<MarkedPoint> rev = {pts[1], pts[0]};
    double v = log_janossy_tilde(space, params, pts);
    CHECK(v == doctest::Approx(log_janossy_tilde(space, params, rev)));
    // Disjoint neighborhoods: the sum factors into singleton values.
    double lone1 = log_janossy_tilde(space, params, std::vector<MarkedPoint>{pts[0]});
    double lone2 = log_janossy_tilde(space, params, std::vector<MarkedPoint>{pts[1]});
    CHECK(v == doctest::Approx(lone1 + lone2).epsilon(1e-12));
}

TEST_CASE("split identity on random valid configurations") {
    Space space = make_circle(5.0);
    ModelParams params{1.0, 1.3};
    for (int trial = 0; trial < 40; ++trial) {
        PointSet pts = random_configuration(space, 31, 0x7u, trial,
                                            {3.0, 6, true});
        double whole = log_janossy_tilde(space, params, pts);
        double red = log_janossy_tilde(space, params, color_part(pts, Color::Red));
        double blue = log_janossy_tilde(space, params, color_part(pts, Color::Blue));
        CHECK(whole == doctest::Approx(red + blue).epsilon(1e-10));
    }
}

TEST_CASE("permutation cap is enforced") {
    Space space = make_interval(20.0);
    ModelParams params{1.0, 1.0};
    std::vector<MarkedPoint> many;
    for (int i = 0; i < 10; ++i) many.push_back(mp1(0.5 + 2.0 * i, Color::Red));
    CHECK_THROWS_AS((void)log_janossy_tilde(space, params, many), capability_error);
}

TEST_CASE("boundary-conditioned density") {
    ModelParams params{1.0, 1.0};

    SUBCASE("free boundary equals the plain sum") {
        Space space = make_interval(3.0);
        std::vector<MarkedPoint> pts = {mp1(1.5, Color::Red), mp1(0.4, Color::Red)};
        CHECK(log_janossy_boundary(space, params, pts, Boundary::free()) ==
              doctest::Approx(log_janossy_tilde(space, params, pts)));
    }

    SUBCASE("red boundary leaves blue-particle factors unchanged") {
        Space space = make_interval(3.0);
        std::vector<MarkedPoint> blue = {mp1(1.5, Color::Blue)};
        CHECK(log_janossy_boundary(space, params, blue, Boundary::red()) ==
              doctest::Approx(log_janossy_tilde(space, params, blue)));
        // A red particle's ball is clipped on the blue mark side.
        std::vector<MarkedPoint> red = {mp1(1.5, Color::Red)};
        double clipped = log_janossy_boundary(space, params, red, Boundary::red());
        // Ball [0.5, 2.5] minus the collars [0,1] and [2,3] leaves [1,2].
        CHECK(std::exp(clipped) == doctest::Approx(1.0 / (1.0 + 1.0)));
    }

    SUBCASE("fully clipped interior point contributes 1/mu") {
        Space space = make_interval(1.5);
        ModelParams p2{1.0, 0.7};
        std::vector<MarkedPoint> red = {mp1(0.75, Color::Red)};
        CHECK(std::exp(log_janossy_boundary(space, p2, red, Boundary::red())) ==
              doctest::Approx(1.0 / 0.7));
    }

    SUBCASE("invalid boundaries are rejected") {
        Space space = make_interval(3.0);
        std::vector<MarkedPoint> pts = {mp1(1.5, Color::Red)};
        Boundary inside = Boundary::of_points({mp1(1.0, Color::Red)});
        CHECK_THROWS_AS((void)log_janossy_boundary(space, params, pts, inside),
                        std::invalid_argument);
        Boundary conflicted =
            Boundary::of_points({mp1(-0.2, Color::Red), mp1(-0.4, Color::Blue)});
        CHECK_THROWS_AS((void)log_janossy_boundary(space, params, pts, conflicted),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)log_janossy_boundary(make_circle(3.0), params, pts,
                                                   Boundary::red()),
                        std::invalid_argument);
    }
}

TEST_CASE("normalizing constant on the single-edge type space is exact") {
    Space space = single_edge_space();
    ModelParams params{1.0, 1.0};
    auto res = normalizing_constant(space, params, 30);
    // Valid sequences are monochromatic; level n carries mass 2/(n+1)!.
    for (int n = 1; n <= 10; ++n) {
        double exact = 2.0;
        for (int i = 1; i <= n; ++i) exact /= (1.0 + i);
        CHECK(res.terms[static_cast<std::size_t>(n)] ==
              doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(res.k_inverse == doctest::Approx(1.0 + 2.0 * (std::exp(1.0) - 2.0)).epsilon(1e-10));
    CHECK(res.mc_stderr == 0.0);
    CHECK(res.tail_bound < 1e-12);
}

TEST_CASE("normalizing constant tends to one as intensity vanishes") {
    Space space = make_interval(3.0);
    ModelParams params{1e-9, 1.0};
    NormConstOptions opts;
    opts.mc_paths = 10000;
    auto res = normalizing_constant(space, params, 5, opts);
    CHECK(res.k_inverse == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("1D Monte Carlo terms match hand-computed integrals") {
    ModelParams params{1.0, 1.0};
    NormConstOptions opts;
    opts.mc_paths = 400000;
    opts.seed = 5;

    SUBCASE("circle of circumference 3") {
        auto res = normalizing_constant(make_circle(3.0), params, 6, opts);
        // c1: every singleton ball has length 2, so c1 = 6/3 = 2.
        CHECK(std::fabs(res.terms[1] - 2.0) <= 4.0 * res.term_stderr[1]);
        // c2 split by color pattern: same-color pairs integrate
        // 2(ln(5/4) + 1/10) each, opposite-color pairs 1/6 each.
        double c2 = 2.0 * 2.0 * (std::log(1.25) + 0.1) + 2.0 / 6.0;
        CHECK(std::fabs(res.terms[2] - c2) <= 4.0 * res.term_stderr[2]);
        CHECK(res.term_stderr[2] < 0.01);
    }

    SUBCASE("interval of length 3") {
        auto res = normalizing_constant(make_interval(3.0), params, 6, opts);
        // c1 = 2 * (2 ln(3/2) + 1/3) from the clipped ball lengths.
        double c1 = 2.0 * (2.0 * std::log(1.5) + 1.0 / 3.0);
        CHECK(std::fabs(res.terms[1] - c1) <= 4.0 * res.term_stderr[1]);
    }
}

TEST_CASE("tail bound covers deeper truncations") {
    Space space = make_circle(3.0);
    ModelParams params{1.0, 1.0};
    NormConstOptions opts;
    opts.mc_paths = 200000;
    opts.seed = 9;
    auto shallow = normalizing_constant(space, params, 6, opts);
    auto deep = normalizing_constant(space, params, 12, opts);
    double added = deep.k_inverse - shallow.k_inverse;
    CHECK(added >= -4.0 * (shallow.mc_stderr + deep.mc_stderr));
    CHECK(added <= shallow.tail_bound + 4.0 * (shallow.mc_stderr + deep.mc_stderr));
    CHECK(deep.tail_bound < shallow.tail_bound);

    auto dist = deep.count_distribution();
    double total = 0.0;
    for (double p : dist) total += p;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("normalizing constant rejects unsupported inputs") {
    ModelParams params{1.0, 1.0};
    CHECK_THROWS_AS((void)normalizing_constant(make_torus(5.0), params, 4), capability_error);
    CHECK_THROWS_AS((void)normalizing_constant(make_interval(3.0), params, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)normalizing_constant(make_interval(3.0), {1.0, 0.0}, 4),
                    std::invalid_argument);
}
