#include <doctest.h>

#include <cmath>

#include "fifm/fkg.hpp"
#include "fifm/rng.hpp"

using namespace fifm;

namespace {

MarkedPoint mp1(double x, Color c) { return {Point{x, 0, -1}, c}; }

} // namespace

TEST_CASE("path identity base cases") {
    std::vector<double> a = {2.0};
    std::vector<double> b = {3.0};
    auto res = lemma_aux_check(a, b);
    CHECK(res.lhs == doctest::Approx(1.0 / 6.0));
    CHECK(res.rhs == doctest::Approx(1.0 / 6.0));
    CHECK(res.rel_err < 1e-14);

    std::vector<double> only_a = {1.5, 0.5, 2.0};
    auto m0 = lemma_aux_check(only_a, {});
    CHECK(m0.lhs == doctest::Approx(1.0 / (1.5 * 0.5 * 2.0)));
    CHECK(m0.rel_err < 1e-14);
}

TEST_CASE("path identity on random instances, against the DP route") {
    Rng rng(61, 0, 0);
    for (int trial = 0; trial < 100; ++trial) {
        int n = static_cast<int>(rng.index(5));
        int m = static_cast<int>(rng.index(5));
        std::vector<double> a, b;
        for (int i = 0; i < n; ++i) a.push_back(rng.uniform(0.05, 20.0));
        for (int j = 0; j < m; ++j) b.push_back(rng.uniform(0.05, 20.0));
        auto res = lemma_aux_check(a, b);
        CHECK(res.rel_err < 1e-12);
        CHECK(lemma_aux_dp(a, b) == doctest::Approx(res.lhs).epsilon(1e-12));
    }
    std::vector<double> a4 = {1, 2, 3, 4}, b4 = {0.5, 1.5, 2.5, 3.5};
    CHECK(lemma_aux_check(a4, b4).rel_err < 1e-12);
}

TEST_CASE("path identity rejects oversized and nonpositive inputs") {
    std::vector<double> big(9, 1.0), big2(8, 1.0);
    CHECK_THROWS_AS(lemma_aux_check(big, big), std::invalid_argument);
    CHECK_NOTHROW(lemma_aux_check(big, std::vector<double>(7, 1.0)));
    std::vector<double> neg = {-1.0}, none;
    CHECK_THROWS_AS(lemma_aux_check(neg, none), std::invalid_argument);
}

TEST_CASE("lattice pair join and meet") {
    PointSet xi = {mp1(1.0, Color::Red), mp1(2.0, Color::Blue), mp1(3.0, Color::Blue)};
    PointSet gamma = {mp1(1.5, Color::Red), mp1(2.0, Color::Blue)};
    auto pair = make_lattice_pair(xi, gamma);
    CHECK(pair.join == sorted_points({mp1(1.0, Color::Red), mp1(1.5, Color::Red),
                                      mp1(2.0, Color::Blue)}));
    CHECK(pair.meet == sorted_points({mp1(2.0, Color::Blue), mp1(3.0, Color::Blue)}));
}

TEST_CASE("weak lattice property") {
    Space space = make_interval(10.0);
    ModelParams params{1.0, 1.0};

    SUBCASE("separated sets give equality") {
        PointSet xi = {mp1(1.0, Color::Red)};
        PointSet gamma = {mp1(8.0, Color::Red)};
        auto rep = fkg_weak_check(space, params, xi, gamma);
        CHECK(rep.pass);
        CHECK(rep.equality_expected);
    }

    SUBCASE("overlapping same-color clusters give strict inequality") {
        PointSet xi = {mp1(3.0, Color::Red)};
        PointSet gamma = {mp1(3.5, Color::Red)};
        auto rep = fkg_weak_check(space, params, xi, gamma);
        CHECK(rep.pass);
        CHECK(!rep.equality_expected);
        CHECK(rep.slack > 1e-6);
    }

    SUBCASE("empty xi is trivially an equality") {
        auto rep = fkg_weak_check(space, params, {}, {mp1(2.0, Color::Blue)});
        CHECK(rep.pass);
        CHECK(rep.equality_expected);
    }

    SUBCASE("preconditions") {
        PointSet shared = {mp1(2.0, Color::Red)};
        CHECK_THROWS_AS(fkg_weak_check(space, params, shared, shared),
                        std::invalid_argument);
        PointSet red = {mp1(2.0, Color::Red)};
        PointSet blue_near = {mp1(2.4, Color::Blue)};
        CHECK_THROWS_AS(fkg_weak_check(space, params, red, blue_near),
                        std::invalid_argument);
    }
}

TEST_CASE("same-color and two-color lattice inequalities on random sets") {
    Space space = make_circle(4.0);
    ModelParams params{1.0, 1.0};
    Rng rng(67, 0, 0);
    for (int trial = 0; trial < 60; ++trial) {
        PointSet pool;
        int n = 2 + static_cast<int>(rng.index(3));
        for (int i = 0; i < n; ++i) pool.push_back(mp1(rng.uniform(0.0, 4.0), Color::Red));
        pool = sorted_points(std::move(pool));
        PointSet xi, gamma;
        for (const auto& p : pool) {
            if (rng.coin()) xi.push_back(p);
            if (rng.coin()) gamma.push_back(p);
        }
        auto same = fkg_same_type_check(space, params, xi, gamma);
        CHECK(same.pass);

        PointSet mixed = random_configuration(space, 67, 0x5u, trial, {3.0, 4, true});
        PointSet lx, lg;
        for (const auto& p : mixed) {
            if (rng.coin()) lx.push_back(p);
            if (rng.coin()) lg.push_back(p);
        }
        CHECK(fkg_lattice_check(space, params, make_lattice_pair(lx, lg)).pass);
        CHECK(product_split_check(space, params, mixed).pass);
    }
    // xi == gamma gives equality in the same-type form.
    PointSet xi = {mp1(0.5, Color::Blue), mp1(1.2, Color::Blue)};
    auto eq = fkg_same_type_check(space, params, xi, xi);
    CHECK(eq.pass);
    CHECK(eq.equality_expected);
    CHECK_THROWS_AS(fkg_same_type_check(space, params, {mp1(1.0, Color::Red)},
                                        {mp1(2.0, Color::Blue)}),
                    std::invalid_argument);
}

TEST_CASE("boundary order") {
    CHECK(boundary_geq(Boundary::red(), Boundary::free()));
    CHECK(boundary_geq(Boundary::free(), Boundary::blue()));
    CHECK(boundary_geq(Boundary::red(), Boundary::blue()));
    CHECK(!boundary_geq(Boundary::free(), Boundary::red()));
    Boundary more_red = Boundary::of_points({mp1(-0.5, Color::Red), mp1(-2.0, Color::Red)});
    Boundary less_red = Boundary::of_points({mp1(-0.5, Color::Red)});
    CHECK(boundary_geq(more_red, less_red));
    CHECK(!boundary_geq(less_red, more_red));
}

TEST_CASE("holley condition with free boundaries reduces to the lattice form") {
    Space space = make_interval(4.0);
    ModelParams params{1.0, 1.0};
    PointSet eta = {mp1(1.1, Color::Red), mp1(2.8, Color::Red)};
    PointSet gamma = {mp1(1.1, Color::Red), mp1(0.6, Color::Red)};
    auto holley = holley_condition_check(space, params, Boundary::free(), Boundary::free(),
                                         eta, gamma);
    auto lattice = fkg_lattice_check(space, params, make_lattice_pair(eta, gamma));
    CHECK(holley.pass);
    CHECK(holley.log_lhs == doctest::Approx(lattice.log_lhs));
    CHECK(holley.log_rhs == doctest::Approx(lattice.log_rhs));
}

TEST_CASE("holley condition: ordered boundaries pass, swapped ones can fail") {
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    Rng rng(71, 0, 0);
    for (int trial = 0; trial < 50; ++trial) {
        PointSet pool = random_configuration(space, 71, 0x6u, trial, {2.5, 3, true});
        PointSet eta, gamma;
        for (const auto& p : pool) {
            if (rng.coin()) eta.push_back(p);
            if (rng.coin()) gamma.push_back(p);
        }
        CHECK(holley_condition_check(space, params, Boundary::red(), Boundary::free(), eta,
                                     gamma)
                  .pass);
    }
    // Swapped roles violate the inequality for a red point near the edge.
    PointSet gamma = {mp1(0.5, Color::Red)};
    auto swapped = holley_inequality(space, params, Boundary::free(), Boundary::red(), {},
                                     gamma);
    CHECK(!swapped.pass);
    CHECK_THROWS_AS(holley_condition_check(space, params, Boundary::free(), Boundary::red(),
                                           {}, gamma),
                    std::invalid_argument);
}

TEST_CASE("vacuous holley cases pass") {
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    // A blue point near the edge is invalid under the red boundary.
    PointSet eta = {mp1(0.3, Color::Blue)};
    auto rep = holley_inequality(space, params, Boundary::red(), Boundary::free(), eta, {});
    CHECK(rep.pass);
}

TEST_CASE("variance of an increasing functional is nonnegative") {
    Space space = make_circle(2.0);
    ModelParams params{1.0, 1.0};
    IncreasingFunctional f{IncreasingFunctional::Kind::RedCountIn, 0.0, 2.0};
    auto [cov, se] = positive_association_estimate(space, params, f, f, 400, 73);
    CHECK(cov >= 0.0);
    CHECK(se >= 0.0);
}

TEST_CASE("functional dictionary evaluation") {
    Space space = make_circle(4.0);
    OrderedConfiguration config;
    Particle p;
    p.pos = Point{1.0, 0, -1};
    p.color = Color::Red;
    config.push_back(p);
    p.pos.x = 3.0;
    p.color = Color::Blue;
    config.push_back(p);
    IncreasingFunctional red_left{IncreasingFunctional::Kind::RedCountIn, 0.0, 2.0};
    IncreasingFunctional neg_blue{IncreasingFunctional::Kind::NegBlueCountIn, 0.0, 4.0};
    IncreasingFunctional near{IncreasingFunctional::Kind::RedNearPoint, 1.5, 1.0};
    CHECK(red_left.eval(space, config) == 1.0);
    CHECK(neg_blue.eval(space, config) == -1.0);
    CHECK(near.eval(space, config) == 1.0);
}
