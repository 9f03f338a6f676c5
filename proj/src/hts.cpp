#include "hitstats/hts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace hitstats {

LimitLaw LimitLaw::scaled_exponential(double theta) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("scaled_exponential: theta must be in (0,1]");
    return {LawKind::ScaledExponential, theta};
}

LimitLaw LimitLaw::return_mixture(double theta) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("return_mixture: theta must be in (0,1]");
    return {LawKind::ReturnMixture, theta};
}

double LimitLaw::cdf(double t) const {
    if (t < 0.0) return 0.0;
    switch (kind) {
        case LawKind::StandardExponential:
            return 1.0 - std::exp(-t);
        case LawKind::ScaledExponential:
            return 1.0 - std::exp(-theta * t);
        case LawKind::ReturnMixture:
            return (1.0 - theta) + theta * (1.0 - std::exp(-theta * t));
        case LawKind::DivergeToInfinity:
            return 0.0;
    }
    return 0.0;
}

std::string LimitLaw::name() const {
    switch (kind) {
        case LawKind::StandardExponential: return "standard-exponential";
        case LawKind::ScaledExponential: return "scaled-exponential(" + std::to_string(theta) + ")";
        case LawKind::ReturnMixture: return "return-mixture(" + std::to_string(theta) + ")";
        case LawKind::DivergeToInfinity: return "diverge-to-infinity";
    }
    return "?";
}

EmpiricalCDF EmpiricalCDF::from_times(const std::vector<std::int64_t>& raw, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("EmpiricalCDF: gamma must be positive");
    EmpiricalCDF e;
    e.n_ = static_cast<std::int64_t>(raw.size());
    e.values_.reserve(raw.size());
    for (std::int64_t t : raw) {
        if (t < 0) ++e.overflow_;
        else e.values_.push_back(gamma * static_cast<double>(t));
    }
    std::sort(e.values_.begin(), e.values_.end());
    return e;
}

double EmpiricalCDF::value(double t) const {
    if (n_ == 0) return 0.0;
    auto it = std::upper_bound(values_.begin(), values_.end(), t);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(n_);
}

double EmpiricalCDF::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
    if (values_.empty()) return std::numeric_limits<double>::infinity();
    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n_)));
    if (idx > 0) --idx;
    if (idx >= values_.size()) return std::numeric_limits<double>::infinity();
    return values_[idx];
}

double EmpiricalCDF::mean_finite() const {
    if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
}

double EmpiricalCDF::stderr_finite() const {
    if (values_.size() < 2) return std::numeric_limits<double>::infinity();
    double m = mean_finite();
    double ss = 0.0;
    for (double v : values_) ss += (v - m) * (v - m);
    double var = ss / static_cast<double>(values_.size() - 1);
    return std::sqrt(var / static_cast<double>(values_.size()));
}

double ks_distance(const EmpiricalCDF& ecdf, const LimitLaw& law) {
    const auto& vals = ecdf.sorted_values();
    const double n = static_cast<double>(ecdf.sample_count());
    if (n == 0.0) return 1.0;
    const bool restricted = law.kind == LawKind::ReturnMixture;
    const double cutoff = restricted ? law.atom_window : -std::numeric_limits<double>::infinity();

    double d = 0.0;
    if (restricted) d = std::abs(ecdf.value(cutoff) - law.cdf(cutoff));
    std::size_t i = 0;
    while (i < vals.size()) {
        std::size_t j = i;
        while (j + 1 < vals.size() && vals[j + 1] == vals[i]) ++j;
        double v = vals[i];
        if (v >= cutoff) {
            double f = law.cdf(v);
            double hi = static_cast<double>(j + 1) / n;
            d = std::max(d, std::abs(f - hi));
            if (v > cutoff) {
                double lo = static_cast<double>(i) / n;
                d = std::max(d, std::abs(f - lo));
            }
        }
        i = j + 1;
    }
    // mass escaping to +infinity vs CDF limit 1
    d = std::max(d, 1.0 - static_cast<double>(vals.size()) / n);
    return d;
}

double atom_gap(const EmpiricalCDF& ecdf, const LimitLaw& law) {
    if (law.kind != LawKind::ReturnMixture)
        throw std::invalid_argument("atom_gap: law has no atom");
    return std::abs(ecdf.value(law.atom_window) - (1.0 - law.theta));
}

double two_sample_ks(const EmpiricalCDF& a, const EmpiricalCDF& b) {
    const auto& va = a.sorted_values();
    const auto& vb = b.sorted_values();
    const double na = static_cast<double>(a.sample_count());
    const double nb = static_cast<double>(b.sample_count());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < va.size() || j < vb.size()) {
        double t = (j >= vb.size() || (i < va.size() && va[i] <= vb[j])) ? va[i] : vb[j];
        while (i < va.size() && va[i] <= t) ++i;
        while (j < vb.size() && vb[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    d = std::max(d, std::abs(static_cast<double>(va.size()) / na -
                             static_cast<double>(vb.size()) / nb));
    return d;
}

InitialLaw InitialLaw::uniform(const Interval& support) {
    return uniform_on(IntervalSet(support));
}

InitialLaw InitialLaw::uniform_on(const IntervalSet& support) {
    if (support.empty() || !(support.total_length() > 0.0))
        throw std::invalid_argument("InitialLaw: support must have positive length");
    InitialLaw law;
    double acc = 0.0;
    for (const auto& piece : support.components()) {
        if (!(piece.length() > 0.0)) continue;
        law.pieces_.push_back(piece);
        acc += piece.length();
        law.cum_.push_back(acc);
    }
    law.tag_ = "uniform[" + std::to_string(support.lower_bound_point()) + "," +
               std::to_string(support.upper_bound_point()) + "]";
    return law;
}

InitialLaw InitialLaw::from_measure(const InvariantMeasure& mu, const IntervalSet& support) {
    InitialLaw law;
    law.sampler_ = std::make_shared<RestrictedSampler>(mu, support);
    law.tag_ = "measure-restricted[" + std::to_string(support.lower_bound_point()) + "," +
               std::to_string(support.upper_bound_point()) + "]";
    return law;
}

double InitialLaw::draw(RngStream& rng) const {
    if (sampler_) return sampler_->draw(rng.next_double(), rng.next_double());
    double target = rng.next_double() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t idx = std::min(static_cast<std::size_t>(it - cum_.begin()), pieces_.size() - 1);
    const Interval& piece = pieces_[idx];
    double x = piece.lo + rng.next_double() * piece.length();
    if (x >= piece.hi) x = std::nextafter(piece.hi, piece.lo);
    return x;
}

namespace {

// The doubling map shifts mantissa bits out: every double-precision orbit
// collapses to the fixed point 0 within 53 steps.  Continuum orbits are
// simulated instead as a sliding window over an endless stream of fresh
// fraction bits (the map is the Bernoulli shift), which also keeps runs
// reproducible per (seed, sample index).
class DyadicOrbit {
public:
    DyadicOrbit(double x0, RngStream& rng) : rng_(rng) {
        auto top = static_cast<std::uint64_t>(static_cast<long double>(x0) * 0x1.0p64L);
        int zeros = top == 0 ? 64 : std::countr_zero(top);
        std::uint64_t mask = zeros >= 64 ? ~0ULL : ((1ULL << zeros) - 1ULL);
        window_ = top | (rng_.next_u64() & mask);
    }

    double value() const {
        return static_cast<double>(window_ >> 11) * 0x1.0p-53;
    }

    void step() {
        if (nbits_ == 0) {
            buffer_ = rng_.next_u64();
            nbits_ = 64;
        }
        window_ = (window_ << 1) | (buffer_ >> 63);
        buffer_ <<= 1;
        --nbits_;
    }

private:
    std::uint64_t window_ = 0;
    std::uint64_t buffer_ = 0;
    int nbits_ = 0;
    RngStream& rng_;
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename PerSample>
std::vector<std::int64_t> run_samples(const SamplerOptions& opt, PerSample per_sample) {
    if (opt.n_samples < 1) throw std::invalid_argument("sampler: n_samples must be >= 1");
    std::vector<std::int64_t> out(static_cast<std::size_t>(opt.n_samples), -1);
    int threads = resolve_threads(opt.threads);
    if (threads == 1) {
        for (std::int64_t i = 0; i < opt.n_samples; ++i)
            out[static_cast<std::size_t>(i)] = per_sample(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::int64_t chunk = (opt.n_samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::int64_t i0 = t * chunk;
        std::int64_t i1 = std::min(opt.n_samples, i0 + chunk);
        if (i0 >= i1) break;
        pool.emplace_back([&, i0, i1]() {
            for (std::int64_t i = i0; i < i1; ++i)
                out[static_cast<std::size_t>(i)] = per_sample(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

std::int64_t hit_loop(const PiecewiseMap& map, const IntervalSet& E, double x,
                      std::int64_t cap) {
    // membership is checked after each step; points already inside E still
    // need n >= 1
    if (E.size() == 1) {
        const Interval target = E.components().front();
        for (std::int64_t n = 1; n <= cap; ++n) {
            x = map.step(x);
            if (target.contains(x)) return n;
        }
        return -1;
    }
    for (std::int64_t n = 1; n <= cap; ++n) {
        x = map.step(x);
        if (E.contains(x)) return n;
    }
    return -1;
}

std::int64_t hit_loop_dyadic(const IntervalSet& E, double x0, RngStream& rng, std::int64_t cap) {
    DyadicOrbit orbit(x0, rng);
    if (E.size() == 1) {
        const Interval target = E.components().front();
        for (std::int64_t n = 1; n <= cap; ++n) {
            orbit.step();
            if (target.contains(orbit.value())) return n;
        }
        return -1;
    }
    for (std::int64_t n = 1; n <= cap; ++n) {
        orbit.step();
        if (E.contains(orbit.value())) return n;
    }
    return -1;
}

}  // namespace

std::vector<std::int64_t> sample_hitting_times(const PiecewiseMap& map, const IntervalSet& E,
                                               const InitialLaw& law, const SamplerOptions& opt) {
    if (E.empty()) throw std::invalid_argument("sample_hitting_times: empty target");
    std::int64_t cap = opt.cap;
    if (cap <= 0) throw std::invalid_argument("sample_hitting_times: cap must be set");
    if (map.family == "doubling") {
        return run_samples(opt, [&](std::int64_t i) {
            RngStream rng(opt.seed, static_cast<std::uint64_t>(i));
            double x0 = law.draw(rng);
            return hit_loop_dyadic(E, x0, rng, cap);
        });
    }
    return run_samples(opt, [&](std::int64_t i) {
        RngStream rng(opt.seed, static_cast<std::uint64_t>(i));
        double x0 = law.draw(rng);
        return hit_loop(map, E, x0, cap);
    });
}

std::vector<std::int64_t> sample_induced_hitting_times(const InducedSystem& sys,
                                                       const IntervalSet& Eprime,
                                                       const SamplerOptions& opt) {
    std::int64_t cap = opt.cap;
    if (cap <= 0) throw std::invalid_argument("sample_induced_hitting_times: cap must be set");
    InitialLaw law = InitialLaw::uniform_on(sys.Y);
    const PiecewiseMap& map = *sys.base_map;
    const Interval yiv = sys.Y.components().front();
    if (map.family == "doubling") {
        return run_samples(opt, [&, yiv](std::int64_t i) -> std::int64_t {
            RngStream rng(opt.seed, static_cast<std::uint64_t>(i));
            DyadicOrbit orbit(law.draw(rng), rng);
            std::int64_t base_budget = cap;
            for (std::int64_t j = 1; j <= cap; ++j) {
                double x;
                do {
                    orbit.step();
                    if (--base_budget < 0) return -1;
                    x = orbit.value();
                } while (!yiv.contains(x));
                if (Eprime.contains(x)) return j;
            }
            return -1;
        });
    }
    return run_samples(opt, [&, yiv](std::int64_t i) -> std::int64_t {
        RngStream rng(opt.seed, static_cast<std::uint64_t>(i));
        double x = law.draw(rng);
        std::int64_t base_budget = cap;
        for (std::int64_t j = 1; j <= cap; ++j) {
            // realize one T_Y step by iterating the base map
            do {
                x = map.step(x);
                if (--base_budget < 0) return -1;
            } while (!yiv.contains(x));
            if (Eprime.contains(x)) return j;
        }
        return -1;
    });
}

std::vector<std::int64_t> sample_return_times_to(const PiecewiseMap& map, const IntervalSet& Y,
                                                 const InitialLaw& law, const SamplerOptions& opt) {
    return sample_hitting_times(map, Y, law, opt);
}

EmpiricalCDF sample_hitting_cdf(const PiecewiseMap& map, const IntervalSet& E, double gamma,
                                const InitialLaw& law, const SamplerOptions& opt) {
    return EmpiricalCDF::from_times(sample_hitting_times(map, E, law, opt), gamma);
}

EmpiricalCDF sample_induced_hitting_cdf(const InducedSystem& sys, const IntervalSet& Eprime,
                                        double gamma, const SamplerOptions& opt) {
    return EmpiricalCDF::from_times(sample_induced_hitting_times(sys, Eprime, opt), gamma);
}

EmpiricalCDF sample_return_cdf(const PiecewiseMap& map, const IntervalSet& E, double gamma,
                               const InvariantMeasure& mu, const SamplerOptions& opt) {
    InitialLaw law = InitialLaw::from_measure(mu, E);
    return EmpiricalCDF::from_times(sample_hitting_times(map, E, law, opt), gamma);
}

std::vector<HittingSample> sample_hitting_details(const PiecewiseMap& map, const IntervalSet& E,
                                                  double gamma, const InitialLaw& law,
                                                  const SamplerOptions& opt) {
    std::vector<HittingSample> out(static_cast<std::size_t>(opt.n_samples));
    for (std::int64_t i = 0; i < opt.n_samples; ++i) {
        RngStream rng(opt.seed, static_cast<std::uint64_t>(i));
        HittingSample& s = out[static_cast<std::size_t>(i)];
        s.x0 = law.draw(rng);
        auto hit = hitting_time(map, s.x0, E, opt.cap);
        s.raw_time = hit ? *hit : -1;
        s.normalization = gamma;
        s.initial_law = law.describe();
    }
    return out;
}

}  // namespace hitstats
