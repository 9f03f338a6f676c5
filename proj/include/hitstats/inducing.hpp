#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hitstats/interval.hpp"
#include "hitstats/maps.hpp"

namespace hitstats {

/// Smallest n in [1,cap] with T^n x in E, or nullopt on overflow.
/// Visits at time zero never count: the first hitting time starts at n = 1.
std::optional<std::int64_t> hitting_time(const PiecewiseMap& map, double x,
                                         const IntervalSet& E, std::int64_t cap);

/// Branchwise preimage T^{-1}(A) as an interval set (numerical inversion on
/// nonlinear branches, endpoint tolerance ~1e-13).
IntervalSet preimage_set(const PiecewiseMap& map, const IntervalSet& A);

/// Y
///  cap T^{-1}(E): the pullback of a target E through one step, restricted to
/// the inducing base Y.
IntervalSet pullback_target(const PiecewiseMap& map, const IntervalSet& Y,
                            const IntervalSet& E);

/// Inverse orbit of the leftmost branch along the boundary chain:
/// c_0 = 1, c_1 = right edge of the first cell, c_{j+1} = left-inverse(c_j).
/// The cells V_j = (c_j, c_{j-1}) partition (0,1) by the first passage time
/// to the rightmost cell: V_1 is that cell, and the passage time is j-1 on
/// V_j for j >= 2.
std::vector<double> neutral_boundary_orbit(const PiecewiseMap& map, int K);

/// First-return system on a base set Y with enumerated return cylinders
/// W_j = Y cap {phi_Y = j}.
struct InducedSystem {
    const PiecewiseMap* base_map = nullptr;
    IntervalSet Y;
    std::vector<IntervalSet> return_cylinders;  // index j-1 holds W_j
    std::vector<double> cylinder_lengths;
    double tail_mass = 0.0;  // lambda(Y) minus enumerated cylinder lengths

    double lambda_Y() const { return Y.total_length(); }
};

/// Enumerate return cylinders of Y by pulling the passage cells V_j back
/// through the branches meeting Y.  Requires Y to stretch to the right
/// endpoint of the space and start at a branch boundary.
InducedSystem build_induced(const PiecewiseMap& map, const IntervalSet& Y, int J_ret);

/// One application of the first-return map T_Y, stepping the base map until
/// re-entry.  Returns the landing point and the number of base steps taken.
std::optional<std::pair<double, std::int64_t>> induced_step(const PiecewiseMap& map,
                                                            const IntervalSet& Y, double x,
                                                            std::int64_t budget);

/// Number of T_Y-steps until first entry of Eprime (subset of Y); the shared
/// cap bounds the total base-map iteration budget as well.
std::optional<std::int64_t> induced_hitting_time(const InducedSystem& sys, double x,
                                                 const IntervalSet& Eprime, std::int64_t cap);

enum class ReachStatus { StructuralPass, ProbabilisticPass, Counterexample };

struct ReachVerdict {
    ReachStatus status = ReachStatus::ProbabilisticPass;
    std::vector<double> counterexample_orbit;  // nonempty only on failure

    bool passed() const { return status != ReachStatus::Counterexample; }
};

/// Checks that orbits from Y cannot visit E before Eprime (visits at time
/// zero count).  Prefers exact sufficient conditions on the interval sets:
///   - Eprime == E subset of Y (first visits coincide), or
///   - E subset of Y^c, Y^c cap T^{-1}E subset of E, Eprime == Y cap T^{-1}E.
/// Otherwise falls back to Monte Carlo falsification over n_probes orbits.
ReachVerdict check_reach_only_via(const PiecewiseMap& map, const IntervalSet& Y,
                                  const IntervalSet& E, const IntervalSet& Eprime,
                                  int n_probes = 2000, std::int64_t horizon = 20000,
                                  std::uint64_t seed = 1);

}  // namespace hitstats
