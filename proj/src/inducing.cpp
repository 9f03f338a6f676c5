#include "hitstats/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hitstats/rng.hpp"

namespace hitstats {

std::optional<std::int64_t> hitting_time(const PiecewiseMap& map, double x,
                                         const IntervalSet& E, std::int64_t cap) {
    if (E.empty()) throw std::invalid_argument("hitting_time: empty target");
    if (cap < 1) throw std::invalid_argument("hitting_time: cap must be >= 1");
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("hitting_time: x outside [0,1)");
    for (std::int64_t n = 1; n <= cap; ++n) {
        x = map.step(x);
        if (E.contains(x)) return n;
    }
    return std::nullopt;
}

IntervalSet preimage_set(const PiecewiseMap& map, const IntervalSet& A) {
    std::vector<Interval> parts;
    for (const auto& branch : map.branches) {
        if (branch.domain.empty()) continue;
        for (const auto& comp : A.components()) {
            // clip the target to the closure of the branch image
            double ylo = std::max(comp.lo, branch.image.lo);
            double yhi = std::min(comp.hi, branch.image.hi);
            if (ylo > yhi) continue;
            double a = branch.inverse(ylo);
            double b = branch.inverse(yhi);
            if (!branch.increasing) std::swap(a, b);
            a = std::max(a, branch.domain.lo);
            b = std::min(b, branch.domain.hi);
            if (a < b) parts.push_back(Interval::left_closed(a, b));
        }
    }
    return IntervalSet(std::move(parts));
}

IntervalSet pullback_target(const PiecewiseMap& map, const IntervalSet& Y,
                            const IntervalSet& E) {
    if (Y.empty() || E.empty())
        throw std::invalid_argument("pullback_target: empty input set");
    return Y.intersect(preimage_set(map, E));
}

std::vector<double> neutral_boundary_orbit(const PiecewiseMap& map, int K) {
    if (K < 0) throw std::invalid_argument("neutral_boundary_orbit: K < 0");
    const Branch& left = map.branches.front();
    if (!left.increasing || left.domain.lo != 0.0)
        throw std::invalid_argument("neutral_boundary_orbit: map must have an increasing left branch fixing 0");
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(K) + 1);
    c.push_back(1.0);
    if (K >= 1) c.push_back(left.domain.hi);
    for (int j = 2; j <= K; ++j) c.push_back(left.inverse(c.back()));
    return c;
}

InducedSystem build_induced(const PiecewiseMap& map, const IntervalSet& Y, int J_ret) {
    if (Y.empty() || !(Y.total_length() > 0.0))
        throw std::invalid_argument("build_induced: Y must have positive length");
    if (Y.size() != 1)
        throw std::invalid_argument("build_induced: Y must be a single interval");
    const Interval yiv = Y.components().front();
    if (std::abs(yiv.hi - 1.0) > 1e-12)
        throw std::invalid_argument("build_induced: Y must extend to the right endpoint");
    bool aligned = false;
    for (double z : map.breakpoints())
        if (std::abs(z - yiv.lo) <= 1e-12) aligned = true;
    if (!aligned)
        throw std::invalid_argument("build_induced: Y must start at a branch boundary");

    InducedSystem sys;
    sys.base_map = &map;
    sys.Y = Y;

    // passage cells V_j of the complement, from the left-branch boundary chain
    std::vector<double> c = neutral_boundary_orbit(map, J_ret);
    double enumerated = 0.0;
    for (int j = 1; j <= J_ret && j < static_cast<int>(c.size()); ++j) {
        IntervalSet Vj(Interval::left_closed(c[static_cast<std::size_t>(j)],
                                             c[static_cast<std::size_t>(j - 1)]));
        IntervalSet Wj = (j == 1) ? pullback_target(map, Y, Y)
                                  : pullback_target(map, Y, Vj);
        sys.return_cylinders.push_back(Wj);
        sys.cylinder_lengths.push_back(Wj.total_length());
        enumerated += Wj.total_length();
    }
    sys.tail_mass = std::max(Y.total_length() - enumerated, 0.0);
    return sys;
}

std::optional<std::pair<double, std::int64_t>> induced_step(const PiecewiseMap& map,
                                                            const IntervalSet& Y, double x,
                                                            std::int64_t budget) {
    for (std::int64_t n = 1; n <= budget; ++n) {
        x = map.step(x);
        if (Y.contains(x)) return std::make_pair(x, n);
    }
    return std::nullopt;
}

std::optional<std::int64_t> induced_hitting_time(const InducedSystem& sys, double x,
                                                 const IntervalSet& Eprime, std::int64_t cap) {
    if (!sys.Y.contains(x)) throw std::domain_error("induced_hitting_time: x outside Y");
    std::int64_t base_budget = cap;
    for (std::int64_t j = 1; j <= cap; ++j) {
        auto step = induced_step(*sys.base_map, sys.Y, x, base_budget);
        if (!step) return std::nullopt;
        x = step->first;
        base_budget -= step->second;
        if (Eprime.contains(x)) return j;
        if (base_budget <= 0) return std::nullopt;
    }
    return std::nullopt;
}

namespace {

bool structural_reach_ok(const PiecewiseMap& map, const IntervalSet& Y,
                         const IntervalSet& E, const IntervalSet& Eprime) {
    const double tol = 1e-12;
    // first visits coincide when Eprime == E inside Y
    if (Eprime.approx_equal(E, tol) && E.subset_of(Y, tol)) return true;
    // one-step funnel: E outside Y, preimage of E outside Y stays in E,
    // and Eprime is exactly the pullback through Y
    IntervalSet Yc = Y.complement_in_unit();
    if (!E.subset_of(Yc, tol)) return false;
    IntervalSet pre = preimage_set(map, E);
    if (!Yc.intersect(pre).subset_of(E, tol)) return false;
    return Eprime.approx_equal(Y.intersect(pre), tol);
}

}  // namespace

ReachVerdict check_reach_only_via(const PiecewiseMap& map, const IntervalSet& Y,
                                  const IntervalSet& E, const IntervalSet& Eprime,
                                  int n_probes, std::int64_t horizon, std::uint64_t seed) {
    ReachVerdict verdict;
    if (structural_reach_ok(map, Y, E, Eprime)) {
        verdict.status = ReachStatus::StructuralPass;
        return verdict;
    }
    // Monte Carlo falsification: look for an orbit from Y that enters E
    // without having touched Eprime at any time in {0,...,n}
    double ylo = Y.lower_bound_point();
    double yhi = Y.upper_bound_point();
    for (int probe = 0; probe < n_probes; ++probe) {
        RngStream rng(seed, static_cast<std::uint64_t>(probe));
        double x = 0.0;
        do {
            x = rng.next_double(ylo, yhi);
        } while (!Y.contains(x));
        std::vector<double> orbit = {x};
        bool seen_eprime = Eprime.contains(x);
        if (E.contains(x) && !seen_eprime) {
            verdict.status = ReachStatus::Counterexample;
            verdict.counterexample_orbit = orbit;
            return verdict;
        }
        for (std::int64_t n = 1; n <= horizon; ++n) {
            double next = map.step(x);
            if (next == x) break;  // orbit landed on a fixed point, no information
            x = next;
            orbit.push_back(x);
            seen_eprime = seen_eprime || Eprime.contains(x);
            if (E.contains(x)) {
                if (!seen_eprime) {
                    verdict.status = ReachStatus::Counterexample;
                    verdict.counterexample_orbit = orbit;
                    return verdict;
                }
                break;  // reached E legitimately; next probe
            }
        }
    }
    verdict.status = ReachStatus::ProbabilisticPass;
    return verdict;
}

}  // namespace hitstats
