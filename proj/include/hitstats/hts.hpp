#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hitstats/inducing.hpp"
#include "hitstats/interval.hpp"
#include "hitstats/maps.hpp"
#include "hitstats/measures.hpp"
#include "hitstats/rng.hpp"

namespace hitstats {

enum class LawKind { StandardExponential, ScaledExponential, ReturnMixture, DivergeToInfinity };

/// Target distribution on [0, infinity] for normalized hitting times.
struct LimitLaw {
    LawKind kind = LawKind::StandardExponential;
    double theta = 1.0;
    /// KS comparisons against the mixture exclude [0, atom_window): its CDF
    /// is discontinuous at 0 and the atom is checked separately.
    double atom_window = 0.01;

    double cdf(double t) const;
    std::string name() const;

    static LimitLaw standard_exponential() { return {LawKind::StandardExponential, 1.0}; }
    static LimitLaw scaled_exponential(double theta);
    static LimitLaw return_mixture(double theta);
    static LimitLaw diverge() { return {LawKind::DivergeToInfinity, 1.0}; }
};

/// Empirical law of normalized times; overflowed samples live at +infinity
/// and count toward the denominator.
class EmpiricalCDF {
public:
    EmpiricalCDF() = default;
    /// raw times with -1 marking overflow, normalized by gamma
    static EmpiricalCDF from_times(const std::vector<std::int64_t>& raw, double gamma);

    double value(double t) const;  // F_n(t), right-continuous
    double quantile(double q) const;
    double mean_finite() const;
    double stderr_finite() const;

    std::int64_t sample_count() const { return n_; }
    std::int64_t overflow_count() const { return overflow_; }
    double overflow_rate() const { return n_ ? static_cast<double>(overflow_) / n_ : 0.0; }
    const std::vector<double>& sorted_values() const { return values_; }

private:
    std::vector<double> values_;  // finite normalized times, ascending
    std::int64_t n_ = 0;
    std::int64_t overflow_ = 0;
};

/// sup_t |F_n(t) - F(t)|, evaluated at both sides of every jump; for the
/// return mixture the sup runs over t >= atom_window only.
double ks_distance(const EmpiricalCDF& ecdf, const LimitLaw& law);

/// |F_n(atom_window) - (1 - theta)|: empirical mass of the near-zero window
/// against the atom of the mixture law.
double atom_gap(const EmpiricalCDF& ecdf, const LimitLaw& law);

double two_sample_ks(const EmpiricalCDF& a, const EmpiricalCDF& b);

/// Initial distribution of Monte Carlo draws; always absolutely continuous
/// with respect to Lebesgue measure.
class InitialLaw {
public:
    static InitialLaw uniform(const Interval& support);
    static InitialLaw uniform_on(const IntervalSet& support);
    static InitialLaw from_measure(const InvariantMeasure& mu, const IntervalSet& support);

    double draw(RngStream& rng) const;
    const std::string& describe() const { return tag_; }

private:
    std::vector<Interval> pieces_;
    std::vector<double> cum_;
    std::shared_ptr<RestrictedSampler> sampler_;
    std::string tag_;
};

struct HittingSample {
    double x0 = 0.0;
    std::int64_t raw_time = -1;  // -1 = overflow
    double normalization = 0.0;
    std::string initial_law;
};

struct SamplerOptions {
    std::int64_t n_samples = 100000;
    std::uint64_t seed = 1;
    std::int64_t cap = 0;  // 0: derive from cap_factor / mu(E)
    int threads = 0;       // 0: hardware parallelism
};

/// Raw hitting times of E for x0 ~ law; -1 marks overflow.  Deterministic
/// given (seed, sample index), independent of the thread count.
std::vector<std::int64_t> sample_hitting_times(const PiecewiseMap& map, const IntervalSet& E,
                                               const InitialLaw& law, const SamplerOptions& opt);

/// Induced hitting times of Eprime under the first-return map of sys.Y,
/// drawing x0 uniformly on Y.
std::vector<std::int64_t> sample_induced_hitting_times(const InducedSystem& sys,
                                                       const IntervalSet& Eprime,
                                                       const SamplerOptions& opt);

/// First-return times to Y by base-map steps, x0 ~ law (used for mean
/// return-time checks).
std::vector<std::int64_t> sample_return_times_to(const PiecewiseMap& map, const IntervalSet& Y,
                                                 const InitialLaw& law, const SamplerOptions& opt);

EmpiricalCDF sample_hitting_cdf(const PiecewiseMap& map, const IntervalSet& E, double gamma,
                                const InitialLaw& law, const SamplerOptions& opt);

EmpiricalCDF sample_induced_hitting_cdf(const InducedSystem& sys, const IntervalSet& Eprime,
                                        double gamma, const SamplerOptions& opt);

/// Return-time law: x0 drawn from mu restricted to E, times normalized.
EmpiricalCDF sample_return_cdf(const PiecewiseMap& map, const IntervalSet& E, double gamma,
                               const InvariantMeasure& mu, const SamplerOptions& opt);

/// Small-N variant keeping the full per-sample record.
std::vector<HittingSample> sample_hitting_details(const PiecewiseMap& map, const IntervalSet& E,
                                                  double gamma, const InitialLaw& law,
                                                  const SamplerOptions& opt);

}  // namespace hitstats
