#include <doctest.h>

#include <cmath>

#include "hitstats/markov.hpp"
#include "hitstats/measures.hpp"

using namespace hitstats;

TEST_CASE("ladder cell chain rows are stochastic") {
    LadderParams params = LadderParams::geometric_fast(40);
    CellChain chain = ladder_cell_chain(params);
    REQUIRE(chain.size() == 79);
    for (const auto& row : chain.rows) {
        double s = 0.0;
        for (double v : row) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // deterministic descent along the dyadic cells
    int y5 = ladder_chain_y_index(params, 5);
    int y4 = ladder_chain_y_index(params, 4);
    CHECK(chain.rows[static_cast<std::size_t>(y5)][static_cast<std::size_t>(y4)] == 1.0);
}

TEST_CASE("stationary distribution of a two-cell doubling chain") {
    CellChain chain;
    chain.labels = {"L", "R"};
    chain.lengths = {0.5, 0.5};
    chain.supports = {Interval::left_closed(0.0, 0.5), Interval::left_closed(0.5, 1.0)};
    chain.rows = {{0.5, 0.5}, {0.5, 0.5}};
    StationaryResult st = stationary_distribution(chain, 1e-14, 1000);
    CHECK(st.masses[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(st.masses[1] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(st.residual < 1e-14);
}

TEST_CASE("hitting distribution of the two-cell chain is geometric") {
    CellChain chain;
    chain.labels = {"L", "R"};
    chain.lengths = {0.5, 0.5};
    chain.supports = {Interval::left_closed(0.0, 0.5), Interval::left_closed(0.5, 1.0)};
    chain.rows = {{0.5, 0.5}, {0.5, 0.5}};
    CellHittingDistribution dist(chain, {0.5, 0.5}, {0});
    // from any start, each step enters the target cell with probability 1/2
    for (int n = 1; n <= 20; ++n)
        CHECK(dist.survival(n) == doctest::Approx(std::ldexp(1.0, -n)).epsilon(1e-12));
    CHECK(dist.survival(0) == 1.0);
    CHECK(dist.cdf(3) == doctest::Approx(1.0 - 0.125).epsilon(1e-12));
}

TEST_CASE("deep horizons remain meaningful in extended precision") {
    CellChain chain;
    chain.labels = {"A", "B"};
    chain.lengths = {0.5, 0.5};
    chain.supports = {Interval::left_closed(0.0, 0.5), Interval::left_closed(0.5, 1.0)};
    const double q = 1e-12;  // per-step entry probability
    chain.rows = {{1.0 - q, q}, {1.0 - q, q}};
    CellHittingDistribution dist(chain, {1.0, 0.0}, {1});
    // survival(n) = (1-q)^n; at n = 1e12 this is e^{-1} up to O(q)
    double s = dist.survival(1e12);
    CHECK(s == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
    double s2 = dist.survival(2e12);
    CHECK(s2 == doctest::Approx(std::exp(-2.0)).epsilon(1e-3));
}

TEST_CASE("ladder chain hitting law matches the standard exponential at depth") {
    LadderParams params = LadderParams::geometric_fast(40);
    CellChain chain = ladder_cell_chain(params);
    PiecewiseConstantMeasure mu = ladder_measure_exact(params);
    double eta0 = mu.provenance.at("eta0").get<double>();
    std::vector<double> initial(static_cast<std::size_t>(chain.size()), 0.0);
    for (int j = 1; j <= params.truncation - 1; ++j)
        initial[static_cast<std::size_t>(ladder_chain_y_index(params, j))] =
            mu.measure_of(dyadic_cell(j));
    for (int j = 1; j <= params.truncation; ++j)
        initial[static_cast<std::size_t>(ladder_chain_z_index(params, j))] =
            eta0 * params.cell_length(j);
    for (int k : {6, 10}) {
        std::vector<int> targets;
        for (int j = k; j <= params.truncation - 1; ++j)
            targets.push_back(ladder_chain_y_index(params, j));
        CellHittingDistribution dist(chain, initial, targets);
        double mu_E = ladder_target_mass(params, k);
        double sup = 0.0;
        for (int i = 1; i < 100; ++i) {
            double t = 0.08 * i;
            sup = std::max(sup, std::abs(dist.cdf(t / mu_E) - (1.0 - std::exp(-t))));
        }
        CHECK(sup < 0.01);
    }
}
