#include "hitstats/maps.hpp"

#include <cmath>
#include <limits>

namespace hitstats {

double Branch::forward(double x) const {
    switch (form) {
        case BranchForm::Affine:
            return base + slope * (x - anchor);
        case BranchForm::NeutralPower:
            return x + coef * std::pow(x, 1.0 + expo);
    }
    return 0.0;
}

double Branch::derivative(double x) const {
    switch (form) {
        case BranchForm::Affine:
            return slope;
        case BranchForm::NeutralPower:
            return 1.0 + coef * (1.0 + expo) * std::pow(x, expo);
    }
    return 0.0;
}

double Branch::inverse(double y) const {
    if (form == BranchForm::Affine) return anchor + (y - base) / slope;
    // monotone increasing on [domain.lo, domain.hi]; T(x) >= x brackets the root
    double lo = 0.0;
    double hi = std::min(y, domain.hi);
    if (hi <= 0.0) return 0.0;
    if (forward(hi) <= y) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (forward(mid) < y) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

void PiecewiseMap::finalize() {
    breakpoints_.clear();
    breakpoints_.reserve(branches.size() + 1);
    for (const auto& b : branches) breakpoints_.push_back(b.domain.lo);
    breakpoints_.push_back(branches.back().domain.hi);
}

std::vector<double> PiecewiseMap::orbit(double x0, std::int64_t n) const {
    if (n < 0) throw std::invalid_argument("orbit: n < 0");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    double x = x0;
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("orbit: x0 outside [0,1)");
    out.push_back(x);
    for (std::int64_t i = 0; i < n; ++i) {
        x = step(x);
        out.push_back(x);
    }
    return out;
}

LadderParams LadderParams::geometric_fast(int truncation) {
    if (truncation < 2 || truncation > 42)
        throw std::invalid_argument("ladder: truncation must be in [2,42] for this rule");
    // unnormalized weights u_1 = 1, u_{i+1} = 2^{-(i+3)} u_i
    std::vector<double> u;
    u.push_back(1.0);
    for (int i = 1; u.back() > 0.0 && i < 64; ++i)
        u.push_back(u.back() * std::ldexp(1.0, -(i + 3)));
    double norm = 0.0;
    for (auto it = u.rbegin(); it != u.rend(); ++it) norm += *it;

    LadderParams params;
    params.rule = "geometric-fast";
    params.truncation = truncation;
    for (int j = 1; j < truncation; ++j)
        params.lambdas.push_back(0.5 * u[static_cast<std::size_t>(j - 1)] / norm);
    double tail = 0.0;  // smallest terms first
    for (int j = static_cast<int>(u.size()); j >= truncation; --j)
        tail += 0.5 * u[static_cast<std::size_t>(j - 1)] / norm;
    params.tail = tail;
    params.validate();
    return params;
}

LadderParams LadderParams::from_lambdas(std::vector<double> lams, int truncation) {
    if (truncation < 2) throw std::invalid_argument("ladder: truncation must be >= 2");
    if (static_cast<int>(lams.size()) < truncation - 1)
        throw std::invalid_argument("ladder: need at least truncation-1 lambdas");
    LadderParams params;
    params.rule = "explicit";
    params.truncation = truncation;
    // compensated partial sum so the absorbed tail is not polluted by roundoff
    double sum = 0.0, comp = 0.0;
    for (int j = 0; j < truncation - 1; ++j) {
        params.lambdas.push_back(lams[static_cast<std::size_t>(j)]);
        double y = lams[static_cast<std::size_t>(j)] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    params.tail = std::max(0.5 - sum, 0.0);
    params.validate();
    return params;
}

void LadderParams::validate() const {
    if (truncation < 2) throw std::invalid_argument("ladder: truncation must be >= 2");
    if (static_cast<int>(lambdas.size()) != truncation - 1)
        throw std::invalid_argument("ladder: lambdas size must equal truncation-1");
    double partial = 0.0;
    for (double l : lambdas) {
        if (!(l > 0.0)) throw std::invalid_argument("ladder: lambdas must be positive");
        partial += l;
    }
    if (!(partial < 0.5)) throw std::invalid_argument("ladder: interior cells exceed total length 1/2");
    if (!(tail >= 0.0)) throw std::invalid_argument("ladder: negative tail mass");
    for (int j = 1; j <= truncation; ++j)
        if (!(slope(j) > 1.0))
            throw std::invalid_argument("ladder: slope s_" + std::to_string(j) +
                                        " <= 1, map not uniformly expanding");
}

double LadderParams::cell_length(int j) const {
    if (j < 1 || j > truncation) throw std::out_of_range("ladder: cell index");
    if (j < truncation) return lambdas[static_cast<std::size_t>(j - 1)];
    return tail;
}

double LadderParams::slope(int j) const {
    double len = cell_length(j);
    if (!(len > 0.0)) return std::numeric_limits<double>::infinity();
    return (1.0 - std::ldexp(1.0, -j)) / len;
}

std::optional<int> LadderParams::decay_onset() const {
    int onset = -1;
    for (int i = 1; i + 1 <= truncation - 1; ++i) {
        double bound = std::ldexp(1.0, -(i + 3)) * cell_length(i);
        if (cell_length(i + 1) <= bound) {
            if (onset < 0) onset = i;
        } else {
            onset = -1;
        }
    }
    if (onset < 0) return std::nullopt;
    return onset;
}

PiecewiseMap make_doubling() {
    PiecewiseMap map;
    map.family = "doubling";
    Branch left;
    left.domain = Interval::left_closed(0.0, 0.5);
    left.image = Interval::left_closed(0.0, 1.0);
    left.slope = 2.0;
    Branch right = left;
    right.domain = Interval::left_closed(0.5, 1.0);
    right.anchor = 0.5;
    right.base = 0.0;
    map.branches = {left, right};
    map.is_markov = map.is_piecewise_onto = map.is_uniformly_expanding = true;
    map.expansion_bound = 2.0;
    map.finalize();
    return map;
}

PiecewiseMap make_ladder(const LadderParams& params) {
    params.validate();
    PiecewiseMap map;
    map.family = "ladder";
    map.ladder = params;

    Branch doubling;
    doubling.domain = Interval::left_closed(0.0, 0.5);
    doubling.image = Interval::left_closed(0.0, 1.0);
    doubling.slope = 2.0;
    map.branches.push_back(doubling);

    double z = 0.5;
    double smin = 2.0;
    for (int j = 1; j <= params.truncation; ++j) {
        double z_next = (j == params.truncation) ? 1.0 : z + params.cell_length(j);
        Branch b;
        b.domain = Interval::left_closed(z, std::max(z_next, z));
        b.image = Interval::left_closed(std::ldexp(1.0, -j), 1.0);
        b.increasing = false;
        b.slope = -params.slope(j);
        b.anchor = z;
        b.base = 1.0;  // T(z_j) = 1, decreasing to 2^-j at the right edge
        map.branches.push_back(b);
        smin = std::min(smin, params.slope(j));
        z = std::max(z_next, z);
    }
    map.is_markov = true;  // for the refined partition {Y_i, Z_j}
    map.is_piecewise_onto = false;
    map.is_uniformly_expanding = true;
    map.expansion_bound = smin;
    map.finalize();
    return map;
}

void IntermittentParams::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("intermittent: p must be in (0,1)");
}

PiecewiseMap make_intermittent(const IntermittentParams& params) {
    params.validate();
    PiecewiseMap map;
    map.family = "intermittent";
    map.intermittent = params;
    Branch left;
    left.domain = Interval::left_closed(0.0, 0.5);
    left.image = Interval::left_closed(0.0, 1.0);
    left.form = BranchForm::NeutralPower;
    left.coef = std::pow(2.0, params.p);
    left.expo = params.p;
    Branch right;
    right.domain = Interval::left_closed(0.5, 1.0);
    right.image = Interval::left_closed(0.0, 1.0);
    right.slope = 2.0;
    right.anchor = 0.5;
    map.branches = {left, right};
    map.is_markov = map.is_piecewise_onto = true;
    map.is_uniformly_expanding = false;  // neutral fixed point at 0
    map.expansion_bound = 1.0;
    map.finalize();
    return map;
}

Interval dyadic_cell(int i) {
    if (i < 0) throw std::out_of_range("dyadic_cell: negative index");
    return Interval::left_closed(std::ldexp(1.0, -(i + 1)), std::ldexp(1.0, -i));
}

}  // namespace hitstats
