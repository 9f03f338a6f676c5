#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hitstats/hts.hpp"
#include "hitstats/maps.hpp"
#include "hitstats/measures.hpp"

#include <json.hpp>

namespace hitstats {

/// Shrinking target family: dyadic intervals [0, 2^-k] indexed by k, or
/// explicit [0, eps] intervals.
struct TargetSchedule {
    enum class Kind { Dyadic, Epsilon };
    Kind kind = Kind::Dyadic;
    std::vector<double> values;  // k values or eps values
    bool closed_right = true;

    IntervalSet target(double v) const;
    nlohmann::json to_json() const;
    static TargetSchedule from_json(const nlohmann::json& j);
};

enum class Normalization { MuOfE, MuOfEprime, LambdaScaled };

struct MapSpec {
    std::string family;  // doubling | ladder | intermittent
    double p = 0.5;
    std::string lambda_rule = "geometric-fast";
    int truncation = 40;
    std::vector<double> lambdas;  // for rule == "explicit"

    PiecewiseMap build() const;
    nlohmann::json to_json() const;
    static MapSpec from_json(const nlohmann::json& j);
};

struct MeasureSpec {
    std::string method = "lebesgue";  // lebesgue | exact | transfer | ulam
    int bins = 8192;
    double tol = 1e-12;

    nlohmann::json to_json() const;
    static MeasureSpec from_json(const nlohmann::json& j);
};

struct InitialLawSpec {
    std::string kind = "uniform";  // uniform | stationary
    double lo = 0.0, hi = 1.0;

    InitialLaw build(const InvariantMeasure& mu) const;
    nlohmann::json to_json() const;
    static InitialLawSpec from_json(const nlohmann::json& j);
};

/// Optional gates; a check is enforced exactly when its field is present.
struct ScenarioChecks {
    std::optional<double> ks_primary;
    std::optional<double> robustness_ks;
    std::vector<double> robustness_at;  // default: every scheduled target
    std::optional<double> induced_ks;
    std::vector<double> induced_at;
    std::optional<double> theta_exact;
    std::optional<double> theta_min_last;
    std::vector<double> theta_table;       // analytic theta_k rows (ladder)
    std::optional<double> exact_cdf_ks;    // symbolic-chain CDF gate (ladder)
    std::vector<double> exact_cdf_at;
    std::optional<double> anti_law_min_ks;  // distance from the scaled law must exceed this
    std::optional<double> anti_law_theta;
    std::optional<double> mean_normalized_target;
    double mean_sigma_mult = 3.0;
    std::optional<double> return_atom_tol;  // return-time mixture gates
    std::optional<double> return_ks_tol;
    std::optional<double> return_target;    // k or eps for the return run
    std::optional<double> divergence_percentile;  // q of mu(E)*phi, strictly increasing
    std::optional<double> raw_percentile;         // q of raw phi, strictly increasing
    std::optional<double> return_time_one_min;    // final fraction of phi==1 returns
    std::optional<double> kac_sigma_mult;
    bool structural_reach = false;
    bool eprime_one_step = false;

    nlohmann::json to_json() const;
    static ScenarioChecks from_json(const nlohmann::json& j);
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    MapSpec map;
    Interval base_Y{0.5, 1.0};
    TargetSchedule targets;
    Normalization normalization = Normalization::MuOfE;
    LimitLaw expected_law = LimitLaw::standard_exponential();
    MeasureSpec measure;
    InitialLawSpec initial_law;
    InitialLawSpec robustness_law;
    std::int64_t n_samples = 100000;
    std::uint64_t seed = 7;
    double cap_factor = 100.0;
    int threads = 0;
    int induced_depth = 0;  // 0: family default

    nlohmann::json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& j);
    bool operator==(const ScenarioConfig& o) const { return to_json() == o.to_json(); }

    ScenarioChecks checks;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;

    nlohmann::json to_json() const;
};

struct ScenarioRow {
    double parameter = 0.0;  // k or eps
    double lambda_E = 0.0;
    double mu_E = 0.0;
    double mu_Eprime = 0.0;
    double theta = 0.0;
    double gamma = 0.0;
    std::int64_t cap = 0;
    double ks_primary = -1.0;
    double ks_robust = -1.0;
    double ks_induced_vs_base = -1.0;
    double ks_induced_law = -1.0;
    double overflow_rate = 0.0;
    double mean_normalized = 0.0;
    double p05_normalized = 0.0;
    double p05_raw = 0.0;
    double return_time_one_fraction = -1.0;

    nlohmann::json to_json() const;
};

struct ScenarioReport {
    std::string scenario;
    nlohmann::json config;
    std::vector<ScenarioRow> rows;
    std::vector<CheckResult> checks;
    bool all_pass = true;

    nlohmann::json to_json() const;
    std::string rows_csv() const;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// Measure construction honoring the optional cache directory (env
/// HITSTATS_CACHE_DIR); returns the measure and its cache key.
std::unique_ptr<InvariantMeasure> build_measure(const PiecewiseMap& map, const MeasureSpec& spec,
                                                std::string* cache_key = nullptr);

struct SuiteOptions {
    std::uint64_t seed = 7;
    bool quick = false;
    int threads = 0;
};

struct SuiteReport {
    std::vector<ScenarioReport> scenarios;
    std::vector<CheckResult> global_checks;
    bool all_pass = true;
    std::uint64_t seed = 0;
    bool quick = false;

    nlohmann::json to_json() const;
};

/// The three bundled scenario configurations (hyperbolic fixed point,
/// piecewise-affine ladder, neutral fixed points).
std::vector<ScenarioConfig> builtin_scenarios();

SuiteReport run_suite(const SuiteOptions& opt);

}  // namespace hitstats
