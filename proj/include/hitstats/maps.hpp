#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitstats/interval.hpp"

namespace hitstats {

enum class BranchForm { Affine, NeutralPower };

/// One monotone branch of a piecewise map.
/// Affine:       T(x) = base + slope*(x - anchor)
/// NeutralPower: T(x) = x + coef*x^(1+expo)   (increasing, fixes 0)
/// The anchored affine form keeps steep branches accurate: x - anchor is
/// exact for nearby points where slope*x + offset would cancel badly.
struct Branch {
    Interval domain;
    Interval image;
    bool increasing = true;
    BranchForm form = BranchForm::Affine;
    double slope = 0.0;
    double anchor = 0.0;
    double base = 0.0;
    double coef = 0.0;
    double expo = 0.0;

    double forward(double x) const;
    double derivative(double x) const;
    /// Inverse on the image interval; numerical bisection for NeutralPower.
    double inverse(double y) const;
};

/// Parameters of the piecewise affine ladder family: one doubling branch on
/// [0,1/2) and decreasing affine branches on cells of lengths lambda_1,
/// lambda_2, ... accumulating at 1.  The truncated map's last cell absorbs
/// the tail mass, which is carried analytically so that slopes and cell
/// measures stay accurate far beyond double-precision breakpoint resolution.
struct LadderParams {
    std::vector<double> lambdas;  // lambda_1 .. lambda_{J-1}
    double tail = 0.0;            // sum_{j>=J} lambda_j, absorbed by cell Z_J
    int truncation = 40;          // J
    std::string rule = "explicit";

    /// lambda_{i+1} = 2^{-(i+3)} lambda_i for i >= 1, normalized so the
    /// interior cells fill (1/2, 1).
    static LadderParams geometric_fast(int truncation = 40);
    static LadderParams from_lambdas(std::vector<double> lams, int truncation);

    void validate() const;

    int cell_count() const { return truncation; }
    /// Effective length of cell Z_j, j in [1, J]; Z_J includes the tail.
    double cell_length(int j) const;
    /// Slope magnitude s_j = (1 - 2^-j) / cell_length(j).
    double slope(int j) const;
    /// First index from which lambda_{i+1} <= 2^{-(i+3)} lambda_i holds onward.
    std::optional<int> decay_onset() const;
};

struct IntermittentParams {
    double p = 0.5;
    void validate() const;
};

/// Piecewise monotone interval map on [0,1) given by an ordered branch list.
/// Immutable after construction; all operations are pure.
class PiecewiseMap {
public:
    std::string family;
    std::vector<Branch> branches;
    bool is_markov = false;
    bool is_piecewise_onto = false;
    bool is_uniformly_expanding = false;
    double expansion_bound = 0.0;
    std::optional<LadderParams> ladder;
    std::optional<IntermittentParams> intermittent;

    int branch_index(double x) const {
        // right-continuity convention: x belongs to the cell that contains it
        // as a left-closed endpoint
        int lo = 0, hi = static_cast<int>(breakpoints_.size()) - 1;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            if (x < breakpoints_[mid]) hi = mid; else lo = mid;
        }
        return lo;
    }

    /// One iteration without domain checks; assumes x in [0,1).
    double step(double x) const {
        double y = branches[branch_index(x)].forward(x);
        if (y >= 1.0) y = kOneBelow;  // decreasing cells attain 1 at their left edge
        return y;
    }

    double eval(double x) const {
        if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("eval: x outside [0,1)");
        return step(x);
    }

    std::vector<double> orbit(double x0, std::int64_t n) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }

    void finalize();  // recompute breakpoints from branch domains

private:
    static constexpr double kOneBelow = 0x1.fffffffffffffp-1;
    std::vector<double> breakpoints_;
};

PiecewiseMap make_doubling();
PiecewiseMap make_ladder(const LadderParams& params);
PiecewiseMap make_intermittent(const IntermittentParams& params);

/// Dyadic cell [2^{-(i+1)}, 2^{-i}), i >= 0: the level sets of the first
/// passage to [1/2,1) under the doubling branch.
Interval dyadic_cell(int i);

}  // namespace hitstats
