#include <doctest.h>

#include <cmath>

#include "hitstats/inducing.hpp"
#include "hitstats/measures.hpp"
#include "hitstats/rng.hpp"

using namespace hitstats;

TEST_CASE("ladder exact measure matches the rational-arithmetic oracle") {
    // frozen from an exact Fraction evaluation of the same recursion
    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    REQUIRE(mu.cells.size() == 40);
    CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(mu.provenance.at("eta0").get<double>() ==
          doctest::Approx(1.9595529173457873).epsilon(1e-14));

    auto mass_of_Y = [&](int j) {
        for (const auto& c : mu.cells)
            if (c.support.lo == std::ldexp(1.0, -(j + 1))) return c.mass;
        return -1.0;
    };
    CHECK(mass_of_Y(0) == doctest::Approx(9.79776458672893646e-01).epsilon(1e-14));
    CHECK(mass_of_Y(1) == doctest::Approx(1.99591579572896312e-02).epsilon(1e-14));
    CHECK(mass_of_Y(2) == doctest::Approx(2.62482296847922896e-04).epsilon(1e-13));
    CHECK(mass_of_Y(3) == doctest::Approx(1.89393948874280181e-06).epsilon(1e-13));
    CHECK(mass_of_Y(6) == doctest::Approx(1.32022494833615434e-14).epsilon(1e-12));
    CHECK(mass_of_Y(10) == doctest::Approx(1.16241227410383815e-29).epsilon(1e-12));

    // density identity eta_j = 2^{j+1} mu(Y_j), and eta_0 = 2 mu(Y_0)
    for (int j = 0; j < 12; ++j) {
        double m = mass_of_Y(j);
        double d = mu.density_at(std::ldexp(1.0, -(j + 1)));
        CHECK(d == doctest::Approx(std::ldexp(m, j + 1)).epsilon(1e-13));
    }
    // the density vanishes toward the fixed point
    CHECK(mu.density_at(1e-13) < 1e-6);
    CHECK(mu.density_at(0.75) > 1.9);
}

TEST_CASE("ladder theta and target masses at depth") {
    LadderParams params = LadderParams::geometric_fast(40);
    CHECK(ladder_target_mass(params, 3) == doctest::Approx(1.90107296877178009e-06).epsilon(1e-13));
    CHECK(ladder_theta(params, 1) == doctest::Approx(0.98692694985806806).epsilon(1e-13));
    CHECK(ladder_theta(params, 3) == doctest::Approx(0.99624765585216490).epsilon(1e-13));
    CHECK(ladder_theta(params, 6) == doctest::Approx(0.99951410530675944).epsilon(1e-12));
    CHECK(ladder_theta(params, 10) == doctest::Approx(0.99996949173567318).epsilon(1e-12));

    // super-geometric decay consequence of the cell rule, here from the start
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    auto onset = params.decay_onset();
    REQUIRE(onset.has_value());
    for (int k = *onset; k < 12; ++k) {
        double num = ladder_target_mass(params, k + 1) - ladder_target_mass(params, k + 2);
        double den = ladder_target_mass(params, k) - ladder_target_mass(params, k + 1);
        CHECK(num <= std::ldexp(1.0, -(k + 1)) * den * (1 + 1e-12));
    }
}

TEST_CASE("doubling transfer matrix gives Lebesgue") {
    PiecewiseMap map = make_doubling();
    PiecewiseConstantMeasure mu = transfer_matrix_stationary(
        map, {Interval::left_closed(0.0, 0.5), Interval::left_closed(0.5, 1.0)});
    REQUIRE(mu.cells.size() == 2);
    CHECK(mu.cells[0].mass == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mu.cells[1].mass == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mu.density_at(0.2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu.density_at(0.8) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generic transfer stationary vector is a probability vector") {
    // shallow ladder where every cell is geometrically resolvable
    LadderParams params = LadderParams::from_lambdas({0.25, 0.125, 0.0625, 0.03125}, 5);
    PiecewiseMap map = make_ladder(params);
    std::vector<Interval> cells;
    for (int j = 4; j >= 1; --j) cells.push_back(dyadic_cell(j));
    double z = 0.5;
    for (int j = 1; j <= 5; ++j) {
        double z_next = (j == 5) ? 1.0 : z + params.cell_length(j);
        cells.push_back(Interval::left_closed(z, z_next));
        z = z_next;
    }
    PiecewiseConstantMeasure mu = transfer_matrix_stationary(map, cells);
    double total = 0.0;
    for (const auto& c : mu.cells) {
        CHECK(c.mass >= 0.0);
        total += c.mass;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // cross-route: the analytic recursion for the same parameters
    PiecewiseConstantMeasure exact = ladder_measure_exact(params);
    for (int j = 0; j <= 4; ++j) {
        Interval Yj = dyadic_cell(j);
        CHECK(mu.measure_of(Yj) == doctest::Approx(exact.measure_of(Yj)).epsilon(1e-11));
    }
}

TEST_CASE("ladder recursion agrees with the analytic cell chain at full depth") {
    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseConstantMeasure exact = ladder_measure_exact(params);
    PiecewiseConstantMeasure chain = chain_stationary_measure(ladder_cell_chain(params), 1e-14);

    // per-cell masses within 1e-12 (the acceptance bound)
    double eta0 = exact.provenance.at("eta0").get<double>();
    for (int j = 1; j <= 39; ++j) {
        int idx = ladder_chain_y_index(params, j);
        double ours = exact.measure_of(dyadic_cell(j));
        CHECK(std::abs(chain.cells.empty() ? -1.0 : 0.0) == 0.0);
        double theirs = -1.0;
        for (const auto& c : chain.cells)
            if (c.support.lo == dyadic_cell(j).lo && c.support.length() > 0) theirs = c.mass;
        (void)idx;
        CHECK(std::abs(ours - theirs) < 1e-12);
    }
    // Z-cell masses are eta0 * cell length
    double z_mass_expected = eta0 * params.cell_length(1);
    double z_mass = -1.0;
    for (const auto& c : chain.cells)
        if (c.support.lo == 0.5) z_mass = c.mass;
    CHECK(std::abs(z_mass - z_mass_expected) < 1e-12);
}

TEST_CASE("invariance of the exact measures under preimages") {
    RngStream rng(31, 7);

    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseMap ladder = make_ladder(params);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double a = rng.next_double(), b = rng.next_double();
        if (a > b) std::swap(a, b);
        IntervalSet A(Interval::left_closed(a, b));
        double direct = mu.measure_of(A);
        double pulled = mu.measure_of(preimage_set(ladder, A));
        worst = std::max(worst, std::abs(direct - pulled));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("ulam density of the doubling map is Lebesgue") {
    PiecewiseMap map = make_doubling();
    UlamDensity u = ulam_density(map, 512, 1e-13);
    CHECK(u.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.residual < 1e-10);
    for (double x : {0.01, 0.3, 0.5, 0.9})
        CHECK(u.density_at(x) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u.measure_of(Interval::left_closed(0.0, 0.25)) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("ulam density of the intermittent map") {
    PiecewiseMap map = make_intermittent(IntermittentParams{0.5});
    UlamDensity coarse = ulam_density(map, 4096, 1e-12);
    UlamDensity fine = ulam_density(map, 16384, 1e-12);

    CHECK(coarse.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(coarse.residual < 1e-10);

    // strictly positive away from the neutral point
    for (double x = 0.05; x < 1.0; x += 0.05) CHECK(coarse.density_at(x) > 0.0);

    // density grows toward 0 and the opening value h(1/2+) is resolution-stable
    CHECK(coarse.density_at(0.001) > coarse.density_at(0.3));
    double h_coarse = coarse.density_at(0.5);
    double h_fine = fine.density_at(0.5);
    CHECK(std::abs(h_coarse - h_fine) / h_fine < 0.02);

    // invariance defect shrinks under refinement on intervals away from 0
    PiecewiseMap m2 = map;
    auto defect = [&](const UlamDensity& u) {
        double total = 0.0;
        RngStream rng(3, 3);
        for (int i = 0; i < 20; ++i) {
            double a = rng.next_double(0.1, 1.0), b = rng.next_double(0.1, 1.0);
            if (a > b) std::swap(a, b);
            IntervalSet A(Interval::left_closed(a, b));
            total += std::abs(u.measure_of(preimage_set(m2, A)) - u.measure_of(A));
        }
        return total;
    };
    CHECK(defect(fine) < defect(coarse));
}

TEST_CASE("measure_of basics") {
    PiecewiseConstantMeasure leb;
    PiecewiseConstantMeasure::Cell cell;
    cell.support = Interval::left_closed(0.0, 1.0);
    cell.density = 1.0;
    cell.mass = 1.0;
    leb.cells.push_back(cell);

    CHECK(leb.measure_of(Interval::closed(0.0, 0.25)) == 0.25);
    IntervalSet two(std::vector<Interval>{Interval::left_closed(0.1, 0.2),
                                          Interval::left_closed(0.7, 0.9)});
    CHECK(leb.measure_of(two) ==
          doctest::Approx(leb.measure_of(two.components()[0]) +
                          leb.measure_of(two.components()[1])).epsilon(1e-15));

    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    CHECK(mu.measure_of(dyadic_cell(2)) ==
          doctest::Approx(2.62482296847922896e-04).epsilon(1e-13));
}

TEST_CASE("extremal index of the three families") {
    // doubling: exactly 1/2 at every depth
    PiecewiseMap doubling = make_doubling();
    PiecewiseConstantMeasure leb;
    PiecewiseConstantMeasure::Cell cell;
    cell.support = Interval::left_closed(0.0, 1.0);
    cell.density = 1.0;
    cell.mass = 1.0;
    leb.cells.push_back(cell);
    IntervalSet Y(Interval::left_closed(0.5, 1.0));
    for (int k : {4, 10, 14}) {
        double th = extremal_index(doubling, leb, Y,
                                   IntervalSet(Interval(0.0, std::ldexp(1.0, -k), true, false)));
        CHECK(th == 0.5);  // exact dyadic arithmetic
    }

    // ladder: geometric pullback agrees with the recursion at shallow depth
    LadderParams params = LadderParams::geometric_fast(40);
    PiecewiseMap ladder = make_ladder(params);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    for (int k : {1, 2, 3}) {
        double geo = extremal_index(ladder, mu, Y,
                                    IntervalSet(Interval(0.0, std::ldexp(1.0, -k), true, false)));
        CHECK(geo == doctest::Approx(ladder_theta(params, k)).epsilon(1e-6));
    }

    // intermittent: theta decays with the target
    PiecewiseMap inter = make_intermittent(IntermittentParams{0.5});
    UlamDensity u = ulam_density(inter, 4096, 1e-12);
    double t6 = extremal_index(inter, u, Y, IntervalSet(Interval::closed(0.0, std::ldexp(1.0, -6))));
    double t8 = extremal_index(inter, u, Y, IntervalSet(Interval::closed(0.0, std::ldexp(1.0, -8))));
    CHECK(t8 < t6);
    CHECK(t6 < 0.25);
}

TEST_CASE("measure serialization round trip") {
    LadderParams params = LadderParams::geometric_fast(12);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    PiecewiseConstantMeasure back = PiecewiseConstantMeasure::from_json(mu.to_json());
    CHECK(back.to_json() == mu.to_json());

    UlamDensity u = ulam_density(make_doubling(), 64, 1e-12);
    UlamDensity uback = UlamDensity::from_json(u.to_json());
    CHECK(uback.to_json() == u.to_json());
}

TEST_CASE("restricted sampling stays in the set and follows the density") {
    LadderParams params = LadderParams::geometric_fast(12);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    IntervalSet S(Interval::left_closed(0.125, 0.5));
    RestrictedSampler sampler(mu, S);
    CHECK(sampler.total_mass() == doctest::Approx(mu.measure_of(S)).epsilon(1e-12));

    RngStream rng(8, 8);
    std::int64_t in_upper = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = sampler.draw(rng.next_double(), rng.next_double());
        CHECK(S.contains(x));
        if (x >= 0.25) ++in_upper;
    }
    double expect = mu.measure_of(Interval::left_closed(0.25, 0.5)) / mu.measure_of(S);
    CHECK(static_cast<double>(in_upper) / n == doctest::Approx(expect).epsilon(0.03));
}
