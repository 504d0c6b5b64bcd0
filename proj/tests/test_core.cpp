#include <doctest.h>

#include "fifm/core.hpp"
#include "fifm/rng.hpp"

using namespace fifm;

namespace {

Particle part(double x, Color c, std::int64_t id = 0) {
    Particle p;
    p.pos = Point{x, 0, -1};
    p.color = c;
    p.patience = 1.0;
    p.id = id;
    return p;
}

} // namespace

TEST_CASE("configuration validity") {
    Space space = make_interval(5.0);
    CHECK(!is_valid_configuration(space, {part(2.0, Color::Red), part(2.5, Color::Blue)}));
    CHECK(is_valid_configuration(space, {part(0.5, Color::Red), part(2.0, Color::Blue)}));
    CHECK(is_valid_configuration(space, {}));
    // Ties at exactly the interaction radius count as compatible.
    CHECK(!is_valid_configuration(space, {part(1.0, Color::Red), part(2.0, Color::Blue)}));
}

TEST_CASE("detailed state validity conditions") {
    Space space = make_interval(5.0);
    DetailedState ok = {{Point{2.0}, Color::Red, Mark::Unmatched}};
    CHECK(is_valid_detailed(space, ok));
    DetailedState leading_m = {{Point{2.0}, Color::Red, Mark::Matched}};
    CHECK(!is_valid_detailed(space, leading_m));
    DetailedState cond3 = {{Point{2.0}, Color::Red, Mark::Unmatched},
                           {Point{2.5}, Color::Blue, Mark::Matched}};
    CHECK(!is_valid_detailed(space, cond3));
    // Matched-before-unmatched in the same range is allowed.
    DetailedState mu_ok = {{Point{2.0}, Color::Red, Mark::Unmatched},
                           {Point{2.5}, Color::Red, Mark::Matched},
                           {Point{4.5}, Color::Blue, Mark::Unmatched}};
    CHECK(is_valid_detailed(space, mu_ok));
}

TEST_CASE("matching picks the earliest compatible particle") {
    Space space = make_interval(5.0);
    OrderedConfiguration two = {part(1.0, Color::Red, 1), part(1.6, Color::Red, 2)};
    auto out = fifm_match(space, two, {Point{1.2}, Color::Blue});
    REQUIRE(!out.accepted());
    CHECK(*out.matched_index == 0);

    OrderedConfiguration one = {part(1.0, Color::Red, 1)};
    CHECK(fifm_match(space, one, {Point{3.0}, Color::Blue}).accepted());

    OrderedConfiguration mixed = {part(1.0, Color::Blue, 1), part(1.6, Color::Red, 2)};
    auto res = fifm_match(space, mixed, {Point{1.2}, Color::Blue});
    REQUIRE(!res.accepted());
    CHECK(*res.matched_index == 1);

    // Exact-radius tie matches.
    auto tie = fifm_match(space, one, {Point{2.0}, Color::Blue});
    CHECK(!tie.accepted());
}

TEST_CASE("match outcome agrees with the priority-region characterization") {
    Space space = make_circle(8.0);
    Rng rng(23, 0, 0);
    for (int trial = 0; trial < 500; ++trial) {
        OrderedConfiguration config;
        for (int i = 0; i < 6; ++i) {
            Particle p = part(rng.uniform(0.0, 8.0), rng.coin() ? Color::Red : Color::Blue, i);
            OrderedConfiguration extended = config;
            extended.push_back(p);
            if (is_valid_configuration(space, extended)) config = extended;
        }
        MarkedPoint arrival{Point{rng.uniform(0.0, 8.0)},
                            rng.coin() ? Color::Red : Color::Blue};
        auto outcome = fifm_match(space, config, arrival);
        // Membership in W_{x_i} = N(x_i) \ N(prefix), straight from the
        // definitions.
        auto in_ball = [&](const Particle& q) {
            return q.color != arrival.color &&
                   distance(space, q.pos, arrival.pos) <= space.radius;
        };
        int w_index = -1;
        for (std::size_t i = 0; i < config.size(); ++i) {
            if (!in_ball(config[i])) continue;
            bool in_prefix_nbhd = false;
            for (std::size_t j = 0; j < i; ++j)
                if (in_ball(config[j])) in_prefix_nbhd = true;
            if (!in_prefix_nbhd) {
                w_index = static_cast<int>(i);
                break;
            }
        }
        if (outcome.accepted()) CHECK(w_index == -1);
        else CHECK(static_cast<int>(*outcome.matched_index) == w_index);
    }
}

TEST_CASE("configuration JSON round trip") {
    Space space = make_interval(5.0);
    OrderedConfiguration config = {part(1.0, Color::Red, -2), part(3.5, Color::Blue, 7)};
    auto text = configuration_to_json(space, config);
    auto back = configuration_from_json(space, text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].pos.x == doctest::Approx(1.0));
    CHECK(back[0].color == Color::Red);
    CHECK(back[0].id == -2);
    CHECK(back[1].id == 7);

    Space f = make_finite({"a", "b"}, {1.0, 1.0}, {{0, 1}});
    OrderedConfiguration fc = {{Point{0, 0, 1}, Color::Blue, 0.0, 2.0, 3}};
    auto ftext = configuration_to_json(f, fc);
    auto fback = configuration_from_json(f, ftext);
    CHECK(fback[0].pos.type == 1);
}
