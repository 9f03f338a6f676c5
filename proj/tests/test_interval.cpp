#include <doctest.h>

#include "hitstats/interval.hpp"

using namespace hitstats;

TEST_CASE("interval basics") {
    Interval iv = Interval::left_closed(0.25, 0.5);
    CHECK(iv.length() == 0.25);
    CHECK(iv.contains(0.25));
    CHECK(!iv.contains(0.5));
    CHECK(!iv.empty());

    CHECK(Interval::open(0.3, 0.3).empty());
    CHECK(!Interval::closed(0.3, 0.3).empty());
    CHECK_THROWS_AS(Interval(0.5, 0.4), std::invalid_argument);
}

TEST_CASE("interval intersection respects closure") {
    Interval a = Interval::closed(0.0, 0.5);
    Interval b = Interval::left_closed(0.5, 1.0);
    Interval c = a.intersect(b);
    CHECK(c.lo == 0.5);
    CHECK(c.hi == 0.5);
    CHECK(!c.empty());  // both sides closed at 0.5

    Interval d = Interval::left_closed(0.0, 0.5).intersect(b);
    CHECK(d.empty());
}

TEST_CASE("interval set normalization merges overlaps and sorts") {
    IntervalSet s(std::vector<Interval>{Interval::left_closed(0.5, 0.75),
                                        Interval::left_closed(0.0, 0.25),
                                        Interval::left_closed(0.25, 0.5)});
    CHECK(s.size() == 1);
    CHECK(s.total_length() == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(s.contains(0.25));
    CHECK(!s.contains(0.75));
}

TEST_CASE("open junction is not merged") {
    IntervalSet s(std::vector<Interval>{Interval::open(0.0, 0.5), Interval::open(0.5, 1.0)});
    CHECK(s.size() == 2);
    CHECK(!s.contains(0.5));
}

TEST_CASE("complement within the unit interval") {
    IntervalSet s(Interval::left_closed(0.25, 0.5));
    IntervalSet c = s.complement_in_unit();
    CHECK(c.size() == 2);
    CHECK(c.contains(0.1));
    CHECK(c.contains(0.75));
    CHECK(!c.contains(0.3));
    CHECK(c.total_length() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("subset queries with tolerance") {
    IntervalSet a(Interval::left_closed(0.1, 0.2));
    IntervalSet b(std::vector<Interval>{Interval::left_closed(0.05, 0.15),
                                        Interval::left_closed(0.15, 0.3)});
    CHECK(a.subset_of(b));
    CHECK(!b.subset_of(a));
    IntervalSet gap(std::vector<Interval>{Interval::left_closed(0.05, 0.14),
                                          Interval::left_closed(0.15, 0.3)});
    CHECK(!a.subset_of(gap));
    CHECK(a.subset_of(gap, 0.02));
}

TEST_CASE("intersection of sets") {
    IntervalSet a(std::vector<Interval>{Interval::left_closed(0.0, 0.3),
                                        Interval::left_closed(0.6, 1.0)});
    IntervalSet b(Interval::left_closed(0.2, 0.7));
    IntervalSet c = a.intersect(b);
    CHECK(c.size() == 2);
    CHECK(c.total_length() == doctest::Approx(0.2).epsilon(1e-12));
}
