#include "hitstats/markov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hitstats {

int ladder_chain_y_index(const LadderParams& params, int j) {
    if (j < 1 || j > params.truncation - 1) throw std::out_of_range("ladder chain: Y index");
    return params.truncation - 1 - j;  // Y_{J-1} first
}

int ladder_chain_z_index(const LadderParams& params, int j) {
    if (j < 1 || j > params.truncation) throw std::out_of_range("ladder chain: Z index");
    return params.truncation - 2 + j;
}

CellChain ladder_cell_chain(const LadderParams& params) {
    params.validate();
    const int J = params.truncation;
    const int n = 2 * J - 1;
    CellChain chain;
    chain.labels.resize(static_cast<std::size_t>(n));
    chain.lengths.resize(static_cast<std::size_t>(n));
    chain.supports.resize(static_cast<std::size_t>(n));
    chain.rows.assign(static_cast<std::size_t>(n),
                      std::vector<double>(static_cast<std::size_t>(n), 0.0));

    for (int j = 1; j <= J - 1; ++j) {
        int idx = ladder_chain_y_index(params, j);
        chain.labels[static_cast<std::size_t>(idx)] = "Y" + std::to_string(j);
        chain.lengths[static_cast<std::size_t>(idx)] = std::ldexp(1.0, -(j + 1));
        chain.supports[static_cast<std::size_t>(idx)] = dyadic_cell(j);
    }
    double z = 0.5;
    for (int j = 1; j <= J; ++j) {
        int idx = ladder_chain_z_index(params, j);
        chain.labels[static_cast<std::size_t>(idx)] = "Z" + std::to_string(j);
        chain.lengths[static_cast<std::size_t>(idx)] = params.cell_length(j);
        double z_next = (j == J) ? 1.0 : std::max(z + params.cell_length(j), z);
        chain.supports[static_cast<std::size_t>(idx)] = Interval::left_closed(z, z_next);
        z = z_next;
    }

    // doubling branch: Y_j -> Y_{j-1} for j >= 2; Y_1 -> Z_i proportional to cell length
    for (int j = 2; j <= J - 1; ++j)
        chain.rows[static_cast<std::size_t>(ladder_chain_y_index(params, j))]
                  [static_cast<std::size_t>(ladder_chain_y_index(params, j - 1))] = 1.0;
    {
        int y1 = ladder_chain_y_index(params, 1);
        for (int i = 1; i <= J; ++i)
            chain.rows[static_cast<std::size_t>(y1)]
                      [static_cast<std::size_t>(ladder_chain_z_index(params, i))] =
                2.0 * params.cell_length(i);
    }
    // decreasing branch on Z_j spreads uniformly over its image [2^-j, 1)
    for (int j = 1; j <= J; ++j) {
        int row = ladder_chain_z_index(params, j);
        double image_len = 1.0 - std::ldexp(1.0, -j);
        for (int i = 1; i <= j - 1 && i <= J - 1; ++i)
            chain.rows[static_cast<std::size_t>(row)]
                      [static_cast<std::size_t>(ladder_chain_y_index(params, i))] =
                std::ldexp(1.0, -(i + 1)) / image_len;
        for (int i = 1; i <= J; ++i)
            chain.rows[static_cast<std::size_t>(row)]
                      [static_cast<std::size_t>(ladder_chain_z_index(params, i))] =
                params.cell_length(i) / image_len;
    }
    return chain;
}

StationaryResult stationary_distribution(const CellChain& chain, double tol,
                                         std::int64_t max_iters) {
    const int n = chain.size();
    std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    StationaryResult result;
    for (std::int64_t it = 1; it <= max_iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int a = 0; a < n; ++a) {
            double w = pi[static_cast<std::size_t>(a)];
            if (w == 0.0) continue;
            const auto& row = chain.rows[static_cast<std::size_t>(a)];
            for (int b = 0; b < n; ++b) next[static_cast<std::size_t>(b)] += w * row[static_cast<std::size_t>(b)];
        }
        double total = 0.0;
        for (double v : next) total += v;
        for (double& v : next) v /= total;
        double residual = 0.0;
        for (int i = 0; i < n; ++i)
            residual += std::abs(next[static_cast<std::size_t>(i)] - pi[static_cast<std::size_t>(i)]);
        pi.swap(next);
        if (residual < tol) {
            result.masses = pi;
            result.residual = residual;
            result.iterations = it;
            return result;
        }
    }
    throw std::runtime_error("stationary_distribution: no convergence within step budget");
}

CellHittingDistribution::CellHittingDistribution(const CellChain& chain,
                                                 std::vector<double> initial,
                                                 const std::vector<int>& target_cells,
                                                 int prefix_steps) {
    const int n = chain.size();
    if (static_cast<int>(initial.size()) != n)
        throw std::invalid_argument("CellHittingDistribution: initial size mismatch");
    if (prefix_steps < 16) throw std::invalid_argument("CellHittingDistribution: prefix too short");
    std::vector<bool> is_target(static_cast<std::size_t>(n), false);
    for (int t : target_cells) is_target.at(static_cast<std::size_t>(t)) = true;

    std::vector<double> v(initial.begin(), initial.end());
    double mass = 0.0;
    for (double w : v) mass += w;
    if (!(mass > 0.0)) throw std::invalid_argument("CellHittingDistribution: zero initial mass");
    for (auto& w : v) w /= mass;

    log_prefix_.reserve(static_cast<std::size_t>(prefix_steps) + 1);
    log_prefix_.push_back(0.0);
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    double log_s = 0.0;
    double last_flux = 0.0;
    for (int m = 1; m <= prefix_steps; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        double flux = 0.0;  // conditioned one-step probability of entering the target
        for (int a = 0; a < n; ++a) {
            double w = v[static_cast<std::size_t>(a)];
            if (w == 0.0) continue;
            const auto& row = chain.rows[static_cast<std::size_t>(a)];
            for (int b = 0; b < n; ++b) {
                double t = w * row[static_cast<std::size_t>(b)];
                if (is_target[static_cast<std::size_t>(b)]) flux += t;
                else next[static_cast<std::size_t>(b)] += t;
            }
        }
        last_flux = flux;
        log_s += std::log1p(-flux);
        log_prefix_.push_back(log_s);
        double keep = 1.0 - flux;
        if (keep <= 0.0) {  // everything absorbed; survival is zero from here on
            for (std::size_t i = log_prefix_.size(); i <= static_cast<std::size_t>(prefix_steps); ++i)
                log_prefix_.push_back(-std::numeric_limits<double>::infinity());
            log_rho_ = -std::numeric_limits<double>::infinity();
            v.swap(next);
            return;
        }
        for (int b = 0; b < n; ++b) next[static_cast<std::size_t>(b)] /= keep;
        v.swap(next);
    }
    // conditioned chain has converged; continue geometrically at this rate
    log_rho_ = std::log1p(-last_flux);
}

double CellHittingDistribution::survival(double n_steps) const {
    if (n_steps < 1.0) return 1.0;
    double n = std::floor(n_steps);
    double prefix_max = static_cast<double>(log_prefix_.size() - 1);
    if (n <= prefix_max) return std::exp(log_prefix_[static_cast<std::size_t>(n)]);
    return std::exp(log_prefix_.back() + (n - prefix_max) * log_rho_);
}

double CellHittingDistribution::cdf(double n_steps) const { return 1.0 - survival(n_steps); }

}  // namespace hitstats
