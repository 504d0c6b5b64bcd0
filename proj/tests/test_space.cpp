#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fifm/rng.hpp"
#include "fifm/space.hpp"

using namespace fifm;

namespace {

MarkedPoint mp1(double x, Color c) { return {Point{x, 0, -1}, c}; }

Space finite_pair() {
    return make_finite({"c1", "s1"}, {1.0, 1.0}, {{0, 1}});
}

} // namespace

TEST_CASE("distance on each space kind") {
    CHECK(distance(make_interval(5.0), Point{1.0}, Point{3.5}) == doctest::Approx(2.5));
    CHECK(distance(make_circle(3.0), Point{0.2}, Point{2.9}) == doctest::Approx(0.3));
    Space f = finite_pair();
    CHECK(distance(f, Point{0, 0, 0}, Point{0, 0, 1}) == doctest::Approx(1.0));
    CHECK(distance(f, Point{0, 0, 0}, Point{0, 0, 0}) == 0.0);
    Space t = make_torus(10.0);
    CHECK(distance(t, Point{0.5, 0.5}, Point{9.5, 9.5}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("metric symmetry and triangle inequality on sampled triples") {
    Rng rng(11, 0, 0);
    for (const Space& space : {make_circle(7.0), make_torus(6.0)}) {
        double L = space.is_torus() ? 6.0 : 7.0;
        for (int i = 0; i < 300; ++i) {
            Point a{rng.uniform(0.0, L), space.is_torus() ? rng.uniform(0.0, L) : 0.0};
            Point b{rng.uniform(0.0, L), space.is_torus() ? rng.uniform(0.0, L) : 0.0};
            Point c{rng.uniform(0.0, L), space.is_torus() ? rng.uniform(0.0, L) : 0.0};
            CHECK(distance(space, a, b) == doctest::Approx(distance(space, b, a)));
            CHECK(distance(space, a, c) <= distance(space, a, b) + distance(space, b, c) + 1e-12);
        }
    }
}

TEST_CASE("point outside the domain is rejected") {
    CHECK_THROWS_AS(distance(make_interval(2.0), Point{3.0}, Point{1.0}), std::domain_error);
    CHECK_THROWS_AS((void)neighborhood_measure(make_interval(2.0),
                                               std::vector<MarkedPoint>{mp1(-0.5, Color::Red)}),
                    std::domain_error);
}

TEST_CASE("neighborhood measure on the interval") {
    Space space = make_interval(5.0);
    CHECK(neighborhood_measure(space, std::vector<MarkedPoint>{mp1(2.0, Color::Red)}) ==
          doctest::Approx(2.0));
    CHECK(neighborhood_measure(space, std::vector<MarkedPoint>{mp1(2.0, Color::Red),
                                                               mp1(2.5, Color::Red)}) ==
          doctest::Approx(2.5));
    CHECK(neighborhood_measure(space, std::vector<MarkedPoint>{mp1(2.0, Color::Red),
                                                               mp1(4.0, Color::Blue)}) ==
          doctest::Approx(4.0));
    CHECK(neighborhood_measure(space, std::vector<MarkedPoint>{}) == 0.0);
}

TEST_CASE("neighborhood measure on the finite pair graph") {
    Space f = finite_pair();
    std::vector<MarkedPoint> one = {{Point{0, 0, 0}, Color::Red}};
    CHECK(neighborhood_measure(f, one) == doctest::Approx(1.0)); // s1 compatible with c1
}

TEST_CASE("priority region measures") {
    Space space = make_interval(5.0);
    std::vector<MarkedPoint> empty;
    CHECK(priority_region_measure(space, empty, mp1(2.0, Color::Red)) == doctest::Approx(2.0));
    std::vector<MarkedPoint> same = {mp1(2.0, Color::Red)};
    CHECK(priority_region_measure(space, same, mp1(2.5, Color::Red)) == doctest::Approx(0.5));
    // Opposite-color prefix lives on the other mark side: W_x = N(x), the
    // full ball [1.5, 3.5] of length 2.
    std::vector<MarkedPoint> blue = {mp1(2.0, Color::Blue)};
    CHECK(priority_region_measure(space, blue, mp1(2.5, Color::Red)) == doctest::Approx(2.0));
}

TEST_CASE("priority regions partition the neighborhood") {
    Rng rng(13, 1, 0);
    Space space = make_circle(6.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MarkedPoint> pts;
        int n = 1 + static_cast<int>(rng.index(5));
        for (int i = 0; i < n; ++i)
            pts.push_back(mp1(rng.uniform(0.0, 6.0), rng.coin() ? Color::Red : Color::Blue));
        double sum_w = 0.0;
        for (int i = 0; i < n; ++i) {
            std::span<const MarkedPoint> prefix(pts.data(), static_cast<std::size_t>(i));
            sum_w += priority_region_measure(space, prefix, pts[static_cast<std::size_t>(i)]);
        }
        CHECK(sum_w == doctest::Approx(neighborhood_measure(space, pts)).epsilon(1e-10));
    }
}

TEST_CASE("neighborhood measure is monotone and subadditive") {
    Rng rng(17, 2, 0);
    Space space = make_interval(8.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MarkedPoint> a, b;
        for (int i = 0; i < 3; ++i) {
            a.push_back(mp1(rng.uniform(0.0, 8.0), rng.coin() ? Color::Red : Color::Blue));
            b.push_back(mp1(rng.uniform(0.0, 8.0), rng.coin() ? Color::Red : Color::Blue));
        }
        std::vector<MarkedPoint> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        double ma = neighborhood_measure(space, a);
        double mab = neighborhood_measure(space, ab);
        CHECK(mab >= ma - 1e-12);
        CHECK(mab <= ma + neighborhood_measure(space, b) + 1e-12);
    }
}

TEST_CASE("1D union measure agrees with Monte Carlo") {
    Rng rng(19, 3, 0);
    Space space = make_circle(9.0);
    std::vector<MarkedPoint> pts;
    for (int i = 0; i < 4; ++i)
        pts.push_back(mp1(rng.uniform(0.0, 9.0), i % 2 ? Color::Red : Color::Blue));
    double exact = neighborhood_measure(space, pts);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        Point p{rng.uniform(0.0, 9.0)};
        Color side = rng.coin() ? Color::Red : Color::Blue;
        bool covered = false;
        for (const auto& q : pts)
            if (opposite(q.color) == side && distance(space, p, q.pos) <= 1.0) covered = true;
        hits += covered;
    }
    double mc = 18.0 * static_cast<double>(hits) / n; // lambda_bar total = 2 * 9
    double se = 18.0 * std::sqrt(0.25 / n);
    CHECK(std::fabs(mc - exact) <= 3.0 * se);
}

TEST_CASE("torus quadrature converges within its error bound") {
    std::vector<MarkedPoint> pts = {{Point{1.0, 1.0}, Color::Red},
                                    {Point{2.2, 1.4}, Color::Red},
                                    {Point{3.0, 3.0}, Color::Blue}};
    Space coarse = make_torus(5.0, 1.0, 32);
    Space fine = make_torus(5.0, 1.0, 64);
    auto c = neighborhood_measure_with_error(coarse, pts);
    auto f = neighborhood_measure_with_error(fine, pts);
    CHECK(std::fabs(c.value - f.value) <= c.error_bound);
    CHECK(f.error_bound < c.error_bound);
}

TEST_CASE("space JSON round trip") {
    for (const char* text :
         {R"({"kind":"interval","length":5.0})", R"({"kind":"circle","length":3.0})",
          R"({"kind":"torus2d","side":20.0})",
          R"({"kind":"finite","types":["c1","s1","s2"],"edges":[[0,1],[0,2]],"weights":[1.0,2.0,0.5]})"}) {
        Space s = space_from_json(text);
        Space again = space_from_json(space_to_json(s));
        CHECK(total_measure(s) == doctest::Approx(total_measure(again)));
        CHECK(lambda_bar_total(s) == doctest::Approx(lambda_bar_total(again)));
    }
    CHECK_THROWS_AS(space_from_json("{\"kind\":\"pyramid\"}"), std::invalid_argument);
    CHECK_THROWS_AS(space_from_json("not json"), std::invalid_argument);
}

TEST_CASE("lambda_bar totals") {
    CHECK(lambda_bar_total(make_interval(5.0)) == doctest::Approx(10.0));
    CHECK(lambda_bar_total(make_torus(20.0)) == doctest::Approx(800.0));
    CHECK(lambda_bar_total(finite_pair()) == doctest::Approx(2.0));
}
