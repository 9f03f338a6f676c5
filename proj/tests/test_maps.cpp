#include <doctest.h>

#include <cmath>

#include "hitstats/maps.hpp"
#include "hitstats/rng.hpp"

using namespace hitstats;

TEST_CASE("doubling map evaluation") {
    PiecewiseMap map = make_doubling();
    CHECK(map.eval(0.3) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(map.eval(0.75) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(map.eval(0.5) == 0.0);  // 0.5 belongs to the right cell
    CHECK(map.branches[0].derivative(0.2) == 2.0);
    CHECK(map.branches[1].derivative(0.9) == 2.0);
    CHECK(map.is_markov);
    CHECK(map.is_piecewise_onto);
    CHECK(map.is_uniformly_expanding);
    CHECK_THROWS_AS(map.eval(1.5), std::domain_error);
    CHECK_THROWS_AS(map.eval(-0.1), std::domain_error);
}

TEST_CASE("orbit of the doubling map") {
    PiecewiseMap map = make_doubling();
    auto orb = map.orbit(0.3, 2);
    REQUIRE(orb.size() == 3);
    CHECK(orb[0] == 0.3);
    CHECK(orb[1] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(orb[2] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(map.orbit(0.42, 0) == std::vector<double>{0.42});
}

TEST_CASE("ladder parameters: geometric-fast rule") {
    LadderParams params = LadderParams::geometric_fast(40);
    CHECK(params.lambdas.size() == 39);
    // interior cells plus tail fill exactly (1/2, 1)
    double sum = 0.0;
    for (double l : params.lambdas) sum += l;
    CHECK(sum < 0.5);
    CHECK(sum + params.tail == doctest::Approx(0.5).epsilon(1e-15));
    // decay rule holds from the first index
    auto onset = params.decay_onset();
    REQUIRE(onset.has_value());
    CHECK(*onset == 1);
    // hand-evaluated normalization: lambda_1 = 1/(2C), C = 1 + 2^-4 + 2^-9 + ...
    CHECK(params.cell_length(1) == doctest::Approx(0.469711198532691).epsilon(1e-12));
    CHECK(params.cell_length(2) == doctest::Approx(params.cell_length(1) / 16.0).epsilon(1e-14));
    for (int j = 1; j <= 40; ++j) CHECK(params.slope(j) > 1.0);
}

TEST_CASE("ladder validation rejects non-expanding configurations") {
    // lambda_1 > 1/2 would give slope below one
    CHECK_THROWS_AS(LadderParams::from_lambdas({0.51}, 2), std::invalid_argument);
    // slope s_1 = (1-2^-1)/0.499 > 1 passes
    auto params = LadderParams::from_lambdas({0.499}, 2);
    CHECK(params.slope(1) > 1.0);
    CHECK(params.tail == doctest::Approx(0.001).epsilon(1e-10));
}

TEST_CASE("ladder map branches") {
    LadderParams params = LadderParams::from_lambdas(
        {0.25, 0.125, 0.0625, 0.03125}, 5);
    PiecewiseMap map = make_ladder(params);
    REQUIRE(map.branches.size() == 6);

    // doubling branch
    CHECK(map.eval(0.25) == doctest::Approx(0.5).epsilon(1e-15));

    // branch on Z_1 = [0.5, 0.75) maps onto (1/2, 1): image of Z_1 is Y_0
    const Branch& z1 = map.branches[1];
    CHECK(z1.image.lo == 0.5);
    CHECK(z1.image.hi == 1.0);
    CHECK(!z1.increasing);
    CHECK(z1.forward(0.5) == doctest::Approx(1.0));
    CHECK(z1.forward(std::nextafter(0.75, 0.0)) == doctest::Approx(0.5).epsilon(1e-9));

    // with lambda_j = 2^{-(j+1)}: slope on Z_2 is (1-1/4)/(1/8) = 6,
    // decreasing from 1 to 1/4 across the cell
    const Branch& z2 = map.branches[2];
    CHECK(z2.slope == doctest::Approx(-6.0).epsilon(1e-14));
    CHECK(z2.forward(0.75) == doctest::Approx(1.0));
    CHECK(z2.forward(0.875) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("intermittent map formulas") {
    IntermittentParams params{0.5};
    PiecewiseMap map = make_intermittent(params);

    // direct formula at x = 1/4: x + sqrt(2) * x^{3/2}
    double expect = 0.25 + std::sqrt(2.0) * std::pow(0.25, 1.5);
    CHECK(map.eval(0.25) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(map.eval(0.25) == doctest::Approx(0.4267766953).epsilon(1e-9));

    // neutral fixed point: derivative tends to 1 from above
    CHECK(map.branches[0].derivative(1e-12) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(map.branches[0].derivative(1e-12) > 1.0);
    CHECK(map.eval(0.0) == 0.0);

    // left branch closes the gap at 1/2: T(1/2-) = 1
    double left_limit = map.branches[0].forward(0.5);
    CHECK(left_limit == doctest::Approx(1.0).epsilon(1e-15));
    // but 1/2 itself belongs to the affine branch
    CHECK(map.eval(0.5) == 0.0);
    CHECK(!map.is_uniformly_expanding);

    CHECK_THROWS_AS(make_intermittent(IntermittentParams{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_intermittent(IntermittentParams{1.0}), std::invalid_argument);
}

TEST_CASE("intermittent derivative is increasing and bounded below on [eps, 1/2]") {
    for (double p : {0.25, 0.5, 0.75}) {
        PiecewiseMap map = make_intermittent(IntermittentParams{p});
        const Branch& left = map.branches[0];
        double prev = 0.0;
        for (int i = 1; i <= 500; ++i) {
            double x = 0.5 * i / 500.0;
            double d = left.derivative(x);
            CHECK(d > prev);
            prev = d;
        }
        double eps = 0.01;
        double rho = left.derivative(eps);
        CHECK(rho > 1.0);
        for (int i = 0; i <= 100; ++i) {
            double x = eps + (0.5 - eps) * i / 100.0;
            CHECK(left.derivative(x) >= rho);
        }
    }
}

TEST_CASE("branch membership is unique and images contain forward values") {
    LadderParams lp = LadderParams::geometric_fast(12);
    std::vector<PiecewiseMap> maps;
    maps.push_back(make_doubling());
    maps.push_back(make_ladder(lp));
    maps.push_back(make_intermittent(IntermittentParams{0.5}));
    RngStream rng(2024, 0);
    for (const auto& map : maps) {
        for (int i = 0; i < 2000; ++i) {
            double x = rng.next_double();
            int hits = 0;
            for (const auto& b : map.branches) hits += b.domain.contains(x) ? 1 : 0;
            CHECK(hits == 1);
            int idx = map.branch_index(x);
            CHECK(map.branches[static_cast<std::size_t>(idx)].domain.contains(x));
            double y = map.step(x);
            const Interval& img = map.branches[static_cast<std::size_t>(idx)].image;
            CHECK(y >= img.lo - 1e-12);
            CHECK(y <= img.hi + 1e-12);
        }
    }
}

TEST_CASE("inverse composed with forward is the identity") {
    LadderParams lp = LadderParams::geometric_fast(12);
    std::vector<PiecewiseMap> maps;
    maps.push_back(make_doubling());
    maps.push_back(make_ladder(lp));
    maps.push_back(make_intermittent(IntermittentParams{0.25}));
    maps.push_back(make_intermittent(IntermittentParams{0.75}));
    RngStream rng(99, 0);
    for (const auto& map : maps) {
        for (const auto& b : map.branches) {
            if (!(b.domain.length() > 1e-8)) continue;  // skip sub-resolution cells
            for (int i = 0; i < 200; ++i) {
                double x = b.domain.lo + (b.domain.length()) * rng.next_double();
                double y = b.forward(x);
                if (y >= 1.0) continue;
                double back = b.inverse(y);
                CHECK(back == doctest::Approx(x).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("ladder cells cover the interval and images align with the refined partition") {
    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseMap map = make_ladder(params);
    // total length of the branch domains telescopes to 1
    double total = 0.5;
    for (double l : params.lambdas) total += l;
    total += params.tail;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    // every decreasing branch image is [2^-j, 1): a union of cells
    // Y_{j-1},...,Y_1 plus the cells Z_i above 1/2
    for (int j = 1; j <= params.truncation; ++j) {
        const Branch& b = map.branches[static_cast<std::size_t>(j)];
        CHECK(b.image.lo == std::ldexp(1.0, -j));
        CHECK(b.image.hi == 1.0);
    }
    CHECK(dyadic_cell(0).lo == 0.5);
    CHECK(dyadic_cell(0).hi == 1.0);
    CHECK(dyadic_cell(3).lo == 0.0625);
}
