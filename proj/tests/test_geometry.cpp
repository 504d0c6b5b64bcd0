#include <doctest.h>

#include "fifm/geometry.hpp"
#include "fifm/rng.hpp"

using namespace fifm;

TEST_CASE("interval set add merges overlaps") {
    IntervalSet s;
    s.add(1.0, 3.0);
    s.add(2.5, 4.0);
    s.add(6.0, 7.0);
    CHECK(s.measure() == doctest::Approx(4.0));
    CHECK(s.parts().size() == 2);
    CHECK(s.contains(3.5));
    CHECK(!s.contains(5.0));
}

TEST_CASE("complement partitions the base interval") {
    IntervalSet s;
    s.add(0.0, 1.0);
    s.add(2.0, 3.5);
    IntervalSet c = s.complement(5.0);
    CHECK(c.measure() == doctest::Approx(5.0 - s.measure()));
    CHECK(c.contains(1.5));
    CHECK(!c.contains(0.5));
}

TEST_CASE("subtract and intersect partition the minuend") {
    Rng rng(7, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
        IntervalSet a, b;
        for (int i = 0; i < 4; ++i) {
            double lo = rng.uniform(0.0, 9.0);
            a.add(lo, lo + rng.uniform(0.0, 2.0));
            lo = rng.uniform(0.0, 9.0);
            b.add(lo, lo + rng.uniform(0.0, 2.0));
        }
        double diff = a.subtract(b).measure();
        double inter = a.intersect(b).measure();
        CHECK(diff + inter == doctest::Approx(a.measure()).epsilon(1e-12));
    }
}

TEST_CASE("point_at inverts cumulative length") {
    IntervalSet s;
    s.add(0.0, 1.0);
    s.add(3.0, 5.0);
    CHECK(s.point_at(0.5) == doctest::Approx(0.5));
    CHECK(s.point_at(1.5) == doctest::Approx(3.5));
    CHECK(s.point_at(3.0) == doctest::Approx(5.0));
}

TEST_CASE("empty and degenerate intervals") {
    IntervalSet s;
    s.add(2.0, 2.0);
    CHECK(s.empty());
    CHECK(s.measure() == 0.0);
    CHECK(s.complement(1.0).measure() == doctest::Approx(1.0));
}
