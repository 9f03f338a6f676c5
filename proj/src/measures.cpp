#include "hitstats/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hitstats/inducing.hpp"

namespace hitstats {

using nlohmann::json;

double PiecewiseConstantMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& c : cells) s += c.mass;
    return s;
}

double PiecewiseConstantMeasure::measure_of(const IntervalSet& S) const {
    double total = 0.0;
    for (const auto& cell : cells) {
        for (const auto& comp : S.components()) {
            if (comp.hi <= cell.support.lo || comp.lo >= cell.support.hi) continue;
            if (comp.lo <= cell.support.lo && comp.hi >= cell.support.hi) {
                total += cell.mass;  // whole cell: use the stored mass
            } else {
                total += cell.density * cell.support.overlap_length(comp);
            }
        }
    }
    return total;
}

double PiecewiseConstantMeasure::density_at(double x) const {
    for (const auto& cell : cells) {
        if (x >= cell.support.lo && x < cell.support.hi) return cell.density;
    }
    return 0.0;
}

std::vector<std::pair<Interval, double>> PiecewiseConstantMeasure::pieces_in(
    const IntervalSet& S) const {
    std::vector<std::pair<Interval, double>> out;
    for (const auto& cell : cells)
        for (const auto& comp : S.components()) {
            Interval ov = cell.support.intersect(comp);
            if (ov.empty() || !(ov.length() > 0.0)) continue;
            double mass = (ov.length() == cell.support.length())
                              ? cell.mass
                              : cell.density * ov.length();
            out.emplace_back(ov, mass);
        }
    return out;
}

json PiecewiseConstantMeasure::to_json() const {
    json cells_json = json::array();
    for (const auto& c : cells)
        cells_json.push_back({{"lo", c.support.lo},
                              {"hi", c.support.hi},
                              {"density", c.density},
                              {"mass", c.mass}});
    return json{{"type", "piecewise-constant"},
                {"cells", cells_json},
                {"tail_bound", tail_bound},
                {"provenance", provenance}};
}

PiecewiseConstantMeasure PiecewiseConstantMeasure::from_json(const json& j) {
    PiecewiseConstantMeasure m;
    for (const auto& c : j.at("cells")) {
        Cell cell;
        cell.support = Interval::left_closed(c.at("lo").get<double>(), c.at("hi").get<double>());
        cell.density = c.at("density").get<double>();
        cell.mass = c.at("mass").get<double>();
        m.cells.push_back(cell);
    }
    m.tail_bound = j.at("tail_bound").get<double>();
    if (j.contains("provenance")) m.provenance = j.at("provenance");
    return m;
}

int UlamDensity::bin_index(double x) const {
    if (x < edges.front() || x >= edges.back()) return -1;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<int>(it - edges.begin()) - 1;
}

double UlamDensity::total_mass() const {
    double s = 0.0;
    for (double m : masses) s += m;
    return s;
}

double UlamDensity::density_at(double x) const {
    int b = bin_index(x);
    return b < 0 ? 0.0 : densities[static_cast<std::size_t>(b)];
}

double UlamDensity::measure_of(const IntervalSet& S) const {
    double total = 0.0;
    for (const auto& comp : S.components()) {
        if (!(comp.length() > 0.0)) continue;
        auto lo_it = std::upper_bound(edges.begin(), edges.end(), comp.lo);
        std::size_t b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(lo_it - edges.begin() - 1, 0));
        for (; b + 1 < edges.size() && edges[b] < comp.hi; ++b) {
            double lo = std::max(edges[b], comp.lo);
            double hi = std::min(edges[b + 1], comp.hi);
            if (hi <= lo) continue;
            double width = edges[b + 1] - edges[b];
            if (lo == edges[b] && hi == edges[b + 1]) total += masses[b];
            else total += masses[b] * ((hi - lo) / width);
        }
    }
    return total;
}

std::vector<std::pair<Interval, double>> UlamDensity::pieces_in(const IntervalSet& S) const {
    std::vector<std::pair<Interval, double>> out;
    for (const auto& comp : S.components()) {
        if (!(comp.length() > 0.0)) continue;
        auto lo_it = std::upper_bound(edges.begin(), edges.end(), comp.lo);
        std::size_t b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(lo_it - edges.begin() - 1, 0));
        for (; b + 1 < edges.size() && edges[b] < comp.hi; ++b) {
            double lo = std::max(edges[b], comp.lo);
            double hi = std::min(edges[b + 1], comp.hi);
            if (hi <= lo) continue;
            double width = edges[b + 1] - edges[b];
            out.emplace_back(Interval::left_closed(lo, hi), masses[b] * ((hi - lo) / width));
        }
    }
    return out;
}

json UlamDensity::to_json() const {
    return json{{"type", "ulam"},
                {"edges", edges},
                {"masses", masses},
                {"residual", residual},
                {"iterations", iterations},
                {"bins_per_octave", bins_per_octave},
                {"depth_octaves", depth_octaves},
                {"tail_bound", tail_bound},
                {"provenance", provenance}};
}

UlamDensity UlamDensity::from_json(const json& j) {
    UlamDensity u;
    u.edges = j.at("edges").get<std::vector<double>>();
    u.masses = j.at("masses").get<std::vector<double>>();
    u.residual = j.at("residual").get<double>();
    u.iterations = j.at("iterations").get<std::int64_t>();
    u.bins_per_octave = j.at("bins_per_octave").get<int>();
    u.depth_octaves = j.at("depth_octaves").get<int>();
    u.tail_bound = j.at("tail_bound").get<double>();
    if (j.contains("provenance")) u.provenance = j.at("provenance");
    u.densities.resize(u.masses.size());
    for (std::size_t i = 0; i < u.masses.size(); ++i)
        u.densities[i] = u.masses[i] / (u.edges[i + 1] - u.edges[i]);
    return u;
}

namespace {

struct LadderRecursion {
    std::vector<long double> muY;  // mu(Y_j), j = 0..J-1
    long double eta0 = 0.0L;
};

LadderRecursion ladder_recursion(const LadderParams& params) {
    const int J = params.truncation;
    // 1/s_i including the absorbed tail cell, then suffix sums from the deep
    // end so small terms are not swallowed by large ones
    std::vector<long double> sinv(static_cast<std::size_t>(J + 1), 0.0L);
    for (int i = 1; i <= J; ++i)
        sinv[static_cast<std::size_t>(i)] =
            static_cast<long double>(params.cell_length(i)) / (1.0L - std::ldexp(1.0L, -i));
    std::vector<long double> suffix(static_cast<std::size_t>(J + 2), 0.0L);
    for (int i = J; i >= 1; --i)
        suffix[static_cast<std::size_t>(i)] = suffix[static_cast<std::size_t>(i + 1)] +
                                              sinv[static_cast<std::size_t>(i)];

    std::vector<long double> sigma(static_cast<std::size_t>(J), 0.0L);
    for (int m = 0; m < J; ++m)
        sigma[static_cast<std::size_t>(m)] =
            std::ldexp(1.0L, -(m + 1)) * suffix[static_cast<std::size_t>(m + 1)];

    LadderRecursion rec;
    rec.muY.assign(static_cast<std::size_t>(J), 0.0L);
    long double acc = 0.0L;
    for (int j = J - 1; j >= 0; --j) {
        acc += sigma[static_cast<std::size_t>(j)];
        rec.muY[static_cast<std::size_t>(j)] = acc;
    }
    long double norm = 0.0L;
    for (int i = J - 1; i >= 0; --i)
        norm += static_cast<long double>(i + 1) * sigma[static_cast<std::size_t>(i)];
    if (!(norm > 0.0L) || !std::isfinite(static_cast<double>(norm)))
        throw std::runtime_error("ladder measure: recursion did not converge");
    rec.eta0 = 1.0L / norm;
    for (auto& v : rec.muY) v *= rec.eta0;
    // self-consistency: the density on Y_0 must match the recursion head
    long double head = rec.muY[0] - rec.eta0 * 0.5L;
    if (std::fabs(head) > 1e-15L)
        throw std::runtime_error("ladder measure: recursion inconsistent at Y_0");
    return rec;
}

}  // namespace

PiecewiseConstantMeasure ladder_measure_exact(const LadderParams& params) {
    params.validate();
    LadderRecursion rec = ladder_recursion(params);
    const int J = params.truncation;

    PiecewiseConstantMeasure m;
    for (int j = J - 1; j >= 0; --j) {
        PiecewiseConstantMeasure::Cell cell;
        cell.support = dyadic_cell(j);
        cell.mass = static_cast<double>(rec.muY[static_cast<std::size_t>(j)]);
        cell.density = static_cast<double>(rec.muY[static_cast<std::size_t>(j)] *
                                           std::ldexp(1.0L, j + 1));
        m.cells.push_back(cell);
    }
    // mass rearranged by absorbing the lambda tail into the last cell
    m.tail_bound = static_cast<double>(rec.eta0) * params.tail;
    m.provenance = json{{"family", "ladder"},
                        {"method", "exact"},
                        {"rule", params.rule},
                        {"truncation", params.truncation},
                        {"eta0", static_cast<double>(rec.eta0)},
                        {"lambda_tail", params.tail}};
    return m;
}

double ladder_target_mass(const LadderParams& params, int k) {
    if (k < 0) throw std::out_of_range("ladder_target_mass: k < 0");
    LadderRecursion rec = ladder_recursion(params);
    if (k >= params.truncation) return 0.0;
    long double acc = 0.0L;
    for (int j = params.truncation - 1; j >= k; --j)
        acc += rec.muY[static_cast<std::size_t>(j)];
    return static_cast<double>(acc);
}

double ladder_theta(const LadderParams& params, int k) {
    if (k < 1) throw std::out_of_range("ladder_theta: k < 1");
    LadderRecursion rec = ladder_recursion(params);
    if (k >= params.truncation) return 1.0;
    long double ek = 0.0L;
    for (int j = params.truncation - 1; j >= k; --j) ek += rec.muY[static_cast<std::size_t>(j)];
    if (!(ek > 0.0L)) return 1.0;
    return static_cast<double>(rec.muY[static_cast<std::size_t>(k)] / ek);
}

PiecewiseConstantMeasure chain_stationary_measure(const CellChain& chain, double tol,
                                                  std::int64_t max_iters) {
    StationaryResult st = stationary_distribution(chain, tol, max_iters);
    PiecewiseConstantMeasure m;
    for (int i = 0; i < chain.size(); ++i) {
        PiecewiseConstantMeasure::Cell cell;
        cell.support = chain.supports[static_cast<std::size_t>(i)];
        cell.mass = st.masses[static_cast<std::size_t>(i)];
        double len = chain.lengths[static_cast<std::size_t>(i)];
        cell.density = len > 0.0 ? cell.mass / len : 0.0;
        m.cells.push_back(cell);
    }
    std::sort(m.cells.begin(), m.cells.end(),
              [](const auto& a, const auto& b) { return a.support.lo < b.support.lo; });
    m.provenance = json{{"method", "transfer"},
                        {"residual", st.residual},
                        {"iterations", st.iterations}};
    return m;
}

PiecewiseConstantMeasure transfer_matrix_stationary(const PiecewiseMap& map,
                                                    const std::vector<Interval>& cells,
                                                    double tol, std::int64_t max_iters) {
    const int n = static_cast<int>(cells.size());
    if (n == 0) throw std::invalid_argument("transfer_matrix_stationary: no cells");
    CellChain chain;
    chain.supports = cells;
    chain.labels.resize(static_cast<std::size_t>(n));
    chain.lengths.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        chain.labels[static_cast<std::size_t>(i)] = "cell" + std::to_string(i);
        chain.lengths[static_cast<std::size_t>(i)] = cells[static_cast<std::size_t>(i)].length();
        if (!(chain.lengths[static_cast<std::size_t>(i)] > 0.0))
            throw std::invalid_argument("transfer_matrix_stationary: degenerate cell");
    }
    chain.rows.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int b = 0; b < n; ++b) {
        IntervalSet pre = preimage_set(map, IntervalSet(cells[static_cast<std::size_t>(b)]));
        for (int a = 0; a < n; ++a) {
            double ov = 0.0;
            for (const auto& part : pre.components())
                ov += part.overlap_length(cells[static_cast<std::size_t>(a)]);
            chain.rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                ov / chain.lengths[static_cast<std::size_t>(a)];
        }
    }
    // rows must be stochastic when the cells partition the space
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (double v : chain.rows[static_cast<std::size_t>(a)]) s += v;
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("transfer_matrix_stationary: cells do not partition the space");
        for (double& v : chain.rows[static_cast<std::size_t>(a)]) v /= s;
    }
    PiecewiseConstantMeasure m = chain_stationary_measure(chain, tol, max_iters);
    m.provenance["method"] = "transfer";
    m.provenance["family"] = map.family;
    return m;
}

UlamDensity ulam_density(const PiecewiseMap& map, int n_bins, double tol,
                         std::int64_t max_iters) {
    if (n_bins < 16) throw std::invalid_argument("ulam_density: n_bins must be >= 16");

    // Geometric bins 2^{-j/m} down to 2^{-B}.  Depth B is tied to the neutral
    // exponent so that the unresolved mass below 2^-B, of order (2^-B)^(1-p),
    // stays around 1e-4; it is reported as tail_bound.
    int depth = 40;
    if (map.intermittent) {
        depth = static_cast<int>(std::ceil(12.0 / (1.0 - map.intermittent->p)));
        depth = std::clamp(depth, 16, 60);
    }
    int per_octave = std::max(2, static_cast<int>(std::lround(static_cast<double>(n_bins) / depth)));

    UlamDensity u;
    u.bins_per_octave = per_octave;
    u.depth_octaves = depth;
    u.edges.push_back(0.0);
    for (int j = depth * per_octave; j >= 0; --j) {
        double e = (j % per_octave == 0) ? std::ldexp(1.0, -(j / per_octave))
                                         : std::exp2(-static_cast<double>(j) / per_octave);
        u.edges.push_back(e);
    }
    const int nb = static_cast<int>(u.edges.size()) - 1;

    // column-major sparse transfer matrix: for each target bin, the source
    // bins whose image covers it, weighted by source overlap fraction
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        Interval target(u.edges[static_cast<std::size_t>(b)], u.edges[static_cast<std::size_t>(b) + 1]);
        for (const auto& branch : map.branches) {
            if (branch.domain.empty()) continue;
            double ylo = std::max(target.lo, branch.image.lo);
            double yhi = std::min(target.hi, branch.image.hi);
            if (ylo >= yhi) continue;
            double a = branch.inverse(ylo);
            double bb = branch.inverse(yhi);
            if (!branch.increasing) std::swap(a, bb);
            a = std::max(a, branch.domain.lo);
            bb = std::min(bb, branch.domain.hi);
            if (a >= bb) continue;
            auto it = std::upper_bound(u.edges.begin(), u.edges.end(), a);
            std::size_t src = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - u.edges.begin() - 1, 0));
            for (; src < static_cast<std::size_t>(nb) && u.edges[src] < bb; ++src) {
                double lo = std::max(u.edges[src], a);
                double hi = std::min(u.edges[src + 1], bb);
                if (hi <= lo) continue;
                double width = u.edges[src + 1] - u.edges[src];
                cols[static_cast<std::size_t>(b)].emplace_back(static_cast<int>(src),
                                                               (hi - lo) / width);
            }
        }
    }

    // Stationarity by Gauss-Seidel sweeps in increasing bin order.  The
    // neutral region moves mass strictly upward, so the sweep resolves that
    // near-triangular block exactly and the iteration count is governed by
    // the expanding part alone, independent of the depth.  (Plain power
    // iteration would need ~2^(B*p) steps to fill the deep bins.)
    std::vector<double> self_loop(static_cast<std::size_t>(nb), 0.0);
    for (int b = 0; b < nb; ++b)
        for (const auto& [src, w] : cols[static_cast<std::size_t>(b)])
            if (src == b) self_loop[static_cast<std::size_t>(b)] += w;

    std::vector<double> pi(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i)
        pi[static_cast<std::size_t>(i)] = u.edges[static_cast<std::size_t>(i) + 1] -
                                          u.edges[static_cast<std::size_t>(i)];
    double residual = 0.0;
    std::int64_t it = 0;
    for (it = 1; it <= max_iters; ++it) {
        for (int b = 0; b < nb; ++b) {
            double acc = 0.0;
            for (const auto& [src, w] : cols[static_cast<std::size_t>(b)])
                if (src != b) acc += pi[static_cast<std::size_t>(src)] * w;
            double keep = 1.0 - self_loop[static_cast<std::size_t>(b)];
            pi[static_cast<std::size_t>(b)] = keep > 0.0 ? acc / keep : acc;
        }
        double total = 0.0;
        for (double v : pi) total += v;
        for (double& v : pi) v /= total;
        residual = 0.0;
        for (int b = 0; b < nb; ++b) {
            double acc = 0.0;
            for (const auto& [src, w] : cols[static_cast<std::size_t>(b)])
                acc += pi[static_cast<std::size_t>(src)] * w;
            residual += std::abs(acc - pi[static_cast<std::size_t>(b)]);
        }
        if (residual < tol) break;
    }
    if (residual >= tol)
        throw std::runtime_error("ulam_density: no convergence within step budget (residual " +
                                 std::to_string(residual) + ")");

    u.masses = pi;
    u.residual = residual;
    u.iterations = it;
    u.tail_bound = pi[0];  // unresolved mass in the bin touching 0
    u.densities.resize(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i)
        u.densities[static_cast<std::size_t>(i)] =
            pi[static_cast<std::size_t>(i)] /
            (u.edges[static_cast<std::size_t>(i) + 1] - u.edges[static_cast<std::size_t>(i)]);
    u.provenance = json{{"family", map.family},
                        {"method", "ulam"},
                        {"n_bins", n_bins}};
    if (map.intermittent) u.provenance["p"] = map.intermittent->p;
    return u;
}

double extremal_index(const PiecewiseMap& map, const InvariantMeasure& mu, const IntervalSet& Y,
                      const IntervalSet& E) {
    double me = mu.measure_of(E);
    if (!(me > 0.0)) throw std::invalid_argument("extremal_index: target has zero measure");
    return mu.measure_of(pullback_target(map, Y, E)) / me;
}

RestrictedSampler::RestrictedSampler(const InvariantMeasure& mu, const IntervalSet& S) {
    auto pieces = mu.pieces_in(S);
    double acc = 0.0;
    for (const auto& [piece, mass] : pieces) {
        if (!(mass > 0.0)) continue;
        pieces_.push_back(piece);
        acc += mass;
        cum_.push_back(acc);
    }
    if (pieces_.empty())
        throw std::invalid_argument("RestrictedSampler: set has zero measure");
}

double RestrictedSampler::draw(double u_piece, double u_pos) const {
    double target = u_piece * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t idx = std::min(static_cast<std::size_t>(it - cum_.begin()), pieces_.size() - 1);
    const Interval& piece = pieces_[idx];
    double x = piece.lo + u_pos * piece.length();
    if (x >= piece.hi) x = std::nextafter(piece.hi, piece.lo);
    return x;
}

}  // namespace hitstats
