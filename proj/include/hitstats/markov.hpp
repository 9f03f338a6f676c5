#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hitstats/interval.hpp"
#include "hitstats/maps.hpp"

namespace hitstats {

/// Finite cell-transition chain P[a][b] = lambda(cell_a cap T^{-1} cell_b) /
/// lambda(cell_a) of a piecewise affine Markov map.  Cell geometry may fall
/// below double-precision breakpoint resolution; lengths and transition
/// weights are carried analytically.
struct CellChain {
    std::vector<std::string> labels;
    std::vector<double> lengths;
    std::vector<Interval> supports;       // may be degenerate for deep cells
    std::vector<std::vector<double>> rows;  // row-stochastic

    int size() const { return static_cast<int>(lengths.size()); }
};

/// Cells Y_{J-1},...,Y_1 then Z_1,...,Z_J of the ladder map's refined Markov
/// partition, with exact transition weights from the branch slopes.
CellChain ladder_cell_chain(const LadderParams& params);

int ladder_chain_y_index(const LadderParams& params, int j);  // j in [1, J-1]
int ladder_chain_z_index(const LadderParams& params, int j);  // j in [1, J]

struct StationaryResult {
    std::vector<double> masses;
    double residual = 0.0;
    std::int64_t iterations = 0;
};

/// Left stationary vector by power iteration; throws after the step budget.
StationaryResult stationary_distribution(const CellChain& chain, double tol,
                                         std::int64_t max_iters);

/// Exact distribution of the first entry time into the target cells, for the
/// symbolic chain started from `initial` (mass vector over all cells).
/// The survival function is iterated explicitly over a prefix window with
/// the per-step escape flux accumulated in log space, then continued
/// geometrically with the converged quasi-stationary escape rate.  Escape
/// rates are sums of nonnegative products, so horizons like 1e29 steps with
/// rates 1e-29 keep full relative precision.
class CellHittingDistribution {
public:
    CellHittingDistribution(const CellChain& chain, std::vector<double> initial,
                            const std::vector<int>& target_cells, int prefix_steps = 4000);

    double cdf(double n_steps) const;       // P(hit by step floor(n))
    double survival(double n_steps) const;  // P(no hit through step floor(n))
    /// Converged per-step escape rate of the conditioned chain.
    double escape_rate() const { return -std::expm1(log_rho_); }

private:
    std::vector<double> log_prefix_;  // log survival after n steps, n = 0..prefix
    double log_rho_ = 0.0;
};

}  // namespace hitstats
