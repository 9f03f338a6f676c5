#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hitstats/interval.hpp"
#include "hitstats/maps.hpp"
#include "hitstats/markov.hpp"

#include <json.hpp>

namespace hitstats {

/// Common query surface of the invariant measures used here.  All concrete
/// measures have piecewise constant densities, so restricted sampling can
/// enumerate constant-density pieces exactly.
class InvariantMeasure {
public:
    virtual ~InvariantMeasure() = default;
    virtual double total_mass() const = 0;
    virtual double measure_of(const IntervalSet& S) const = 0;
    /// Right-continuous density version.
    virtual double density_at(double x) const = 0;
    /// Constant-density pieces overlapping S, as (piece, mass) pairs.
    virtual std::vector<std::pair<Interval, double>> pieces_in(const IntervalSet& S) const = 0;

    double measure_of(const Interval& iv) const { return measure_of(IntervalSet(iv)); }
};

/// Invariant probability measure with density constant on each cell of a
/// finite partition.  Cell masses are stored alongside densities so that
/// queries stay exact when cell geometry approaches resolution limits.
class PiecewiseConstantMeasure final : public InvariantMeasure {
public:
    struct Cell {
        Interval support;
        double density = 0.0;
        double mass = 0.0;
    };

    std::vector<Cell> cells;  // sorted by support.lo, disjoint
    double tail_bound = 0.0;
    nlohmann::json provenance;

    double total_mass() const override;
    double measure_of(const IntervalSet& S) const override;
    double density_at(double x) const override;
    std::vector<std::pair<Interval, double>> pieces_in(const IntervalSet& S) const override;
    using InvariantMeasure::measure_of;

    nlohmann::json to_json() const;
    static PiecewiseConstantMeasure from_json(const nlohmann::json& j);
};

/// Stationary density of the transfer operator discretized on bins that are
/// geometrically refined toward 0, with an exact bin edge at every dyadic
/// point 2^-k down to the configured depth.
class UlamDensity final : public InvariantMeasure {
public:
    std::vector<double> edges;      // ascending, edges.front() == 0, back() == 1
    std::vector<double> masses;     // stationary bin masses, sum == 1
    std::vector<double> densities;  // mass / width
    double residual = 0.0;
    std::int64_t iterations = 0;
    int bins_per_octave = 0;
    int depth_octaves = 0;
    double tail_bound = 0.0;  // mass of the unresolved bin at 0
    nlohmann::json provenance;

    int bin_index(double x) const;
    double total_mass() const override;
    double measure_of(const IntervalSet& S) const override;
    double density_at(double x) const override;
    std::vector<std::pair<Interval, double>> pieces_in(const IntervalSet& S) const override;
    using InvariantMeasure::measure_of;

    nlohmann::json to_json() const;
    static UlamDensity from_json(const nlohmann::json& j);
};

/// Exact invariant measure of the truncated ladder map from the sigma
/// recursion: cell masses mu(Y_j) determined by the branch slopes, density
/// eta_j = 2^{j+1} mu(Y_j) on Y_j, eta_0 fixed by total probability one.
PiecewiseConstantMeasure ladder_measure_exact(const LadderParams& params);

/// mu(E_k) = sum_{j >= k} mu(Y_j) from the recursion, accurate at any depth.
double ladder_target_mass(const LadderParams& params, int k);

/// theta_k of the ladder target family E_k = [0, 2^-k): mu(Y_k) / mu(E_k).
double ladder_theta(const LadderParams& params, int k);

/// Stationary vector of the exact cell-transition matrix for a piecewise
/// affine Markov map, via power iteration on the given partition cells.
PiecewiseConstantMeasure transfer_matrix_stationary(const PiecewiseMap& map,
                                                    const std::vector<Interval>& cells,
                                                    double tol = 1e-13,
                                                    std::int64_t max_iters = 1000000);

/// Stationary measure of an analytically built cell chain.
PiecewiseConstantMeasure chain_stationary_measure(const CellChain& chain, double tol = 1e-13,
                                                  std::int64_t max_iters = 1000000);

UlamDensity ulam_density(const PiecewiseMap& map, int n_bins, double tol = 1e-12,
                         std::int64_t max_iters = 1000000);

/// Finite-k extremal index: mu(Y cap T^{-1}E) / mu(E).
double extremal_index(const PiecewiseMap& map, const InvariantMeasure& mu, const IntervalSet& Y,
                      const IntervalSet& E);

/// Draws from a measure restricted to a set by piece choice plus a uniform
/// offset; exact, no rejection.
class RestrictedSampler {
public:
    RestrictedSampler(const InvariantMeasure& mu, const IntervalSet& S);

    double total_mass() const { return cum_.empty() ? 0.0 : cum_.back(); }
    /// u_piece, u_pos are independent uniforms on [0,1).
    double draw(double u_piece, double u_pos) const;

private:
    std::vector<Interval> pieces_;
    std::vector<double> cum_;
};

}  // namespace hitstats
