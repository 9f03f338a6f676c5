#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hitstats/hts.hpp"
#include "hitstats/measures.hpp"
#include "hitstats/scenario.hpp"

using namespace hitstats;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitGateFailure = 1;
constexpr int kExitUsage = 2;

struct MapOptions {
    std::string family;
    double p = 0.5;
    std::string lambda_rule = "geometric-fast";
    int truncation = 40;

    MapSpec spec() const {
        MapSpec m;
        m.family = family;
        m.p = p;
        m.lambda_rule = lambda_rule;
        m.truncation = truncation;
        return m;
    }
};

void add_map_options(CLI::App* cmd, MapOptions& opts) {
    cmd->add_option("family", opts.family, "map family: doubling | ladder | intermittent")
        ->required();
    cmd->add_option("--p", opts.p, "intermittency exponent in (0,1)");
    cmd->add_option("--lambda-rule", opts.lambda_rule, "ladder cell rule (geometric-fast)");
    cmd->add_option("--truncation", opts.truncation, "ladder partition truncation depth");
}

int run_orbit(const MapOptions& mopts, double x0, std::int64_t n) {
    PiecewiseMap map = mopts.spec().build();
    std::vector<double> orb = map.orbit(x0, n);
    std::cout.precision(17);
    for (std::size_t i = 0; i < orb.size(); ++i)
        std::cout << orb[i] << (i + 1 < orb.size() ? "," : "\n");
    return kExitPass;
}

int run_invariant(const MapOptions& mopts, const std::string& method, int bins, double tol,
                  const std::string& out_path) {
    PiecewiseMap map = mopts.spec().build();
    MeasureSpec spec;
    spec.method = method;
    spec.bins = bins;
    spec.tol = tol;
    auto mu = build_measure(map, spec);

    json out;
    if (const auto* ulam = dynamic_cast<const UlamDensity*>(mu.get())) {
        out = ulam->to_json();
        out["density_at_half"] = ulam->density_at(0.5);
    } else {
        out = dynamic_cast<const PiecewiseConstantMeasure&>(*mu).to_json();
        out["density_at_half"] = mu->density_at(0.5);
    }
    out["mass_of_Y"] = mu->measure_of(Interval::left_closed(0.5, 1.0));
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << out.dump(2) << "\n";
    }
    return kExitPass;
}

void write_scenario_outputs(const ScenarioReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string base = out_dir + "/" + report.scenario;
    std::ofstream(base + ".report.json") << report.to_json().dump(2) << "\n";
    std::ofstream(base + ".rows.csv") << report.rows_csv();
}

int run_hts(const std::string& config_path, const std::string& out_dir, int threads,
            std::int64_t seed_override) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config " << config_path << "\n";
        return kExitUsage;
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        std::cerr << "error: invalid JSON in " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<ScenarioConfig> configs;
    try {
        if (doc.contains("scenarios"))
            for (const auto& s : doc.at("scenarios")) configs.push_back(ScenarioConfig::from_json(s));
        else
            configs.push_back(ScenarioConfig::from_json(doc));
    } catch (const std::exception& e) {
        std::cerr << "error: invalid scenario config: " << e.what() << "\n";
        return kExitUsage;
    }

    bool all_pass = true;
    for (ScenarioConfig& cfg : configs) {
        if (threads > 0) cfg.threads = threads;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        ScenarioReport report = run_scenario(cfg);
        write_scenario_outputs(report, out_dir);
        all_pass = all_pass && report.all_pass;
        std::cout << (report.all_pass ? "[pass] " : "[FAIL] ") << report.scenario << "\n";
        for (const auto& c : report.checks)
            if (!c.passed)
                std::cout << "   failed check " << c.name << ": value " << c.value << " vs bound "
                          << c.bound << "\n";
    }
    return all_pass ? kExitPass : kExitGateFailure;
}

int run_suite_cmd(bool quick, std::int64_t seed, int threads, const std::string& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteOptions opt;
    opt.quick = quick;
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.threads = threads;
    SuiteReport suite = run_suite(opt);

    std::filesystem::create_directories(out_dir);
    for (const auto& rep : suite.scenarios) write_scenario_outputs(rep, out_dir);
    std::ofstream(out_dir + "/suite.report.json") << suite.to_json().dump(2) << "\n";

    for (const auto& rep : suite.scenarios) {
        std::cout << (rep.all_pass ? "[pass] " : "[FAIL] ") << rep.scenario << "\n";
        for (const auto& c : rep.checks)
            std::cout << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << " (value "
                      << c.value << ", bound " << c.bound << ")\n";
    }
    for (const auto& c : suite.global_checks)
        std::cout << (c.passed ? "[pass] " : "[FAIL] ") << c.name << " (value " << c.value
                  << ", bound " << c.bound << ")\n";
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "suite " << (suite.all_pass ? "passed" : "FAILED") << " in " << secs << "s\n";
    return suite.all_pass ? kExitPass : kExitGateFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval-map hitting-time statistics toolkit"};
    app.require_subcommand(1);

    MapOptions orbit_map;
    double x0 = 0.0;
    std::int64_t orbit_n = 10;
    CLI::App* orbit_cmd = app.add_subcommand("orbit", "print an orbit segment as CSV");
    add_map_options(orbit_cmd, orbit_map);
    orbit_cmd->add_option("--x0", x0, "initial point in [0,1)")->required();
    orbit_cmd->add_option("--n", orbit_n, "number of iterations");

    MapOptions inv_map;
    std::string method = "transfer";
    int bins = 8192;
    double tol = 1e-12;
    std::string inv_out;
    CLI::App* inv_cmd = app.add_subcommand("invariant", "compute an invariant measure");
    add_map_options(inv_cmd, inv_map);
    inv_cmd->add_option("--method", method, "lebesgue | exact | transfer | ulam");
    inv_cmd->add_option("--bins", bins, "ulam resolution");
    inv_cmd->add_option("--tol", tol, "stationarity residual tolerance");
    inv_cmd->add_option("--out", inv_out, "output JSON path (default stdout)");

    std::string config_path, hts_out = "hts-out";
    int threads = 0;
    std::int64_t seed_override = -1;
    CLI::App* hts_cmd = app.add_subcommand("hts", "run scenarios from a config file");
    hts_cmd->add_option("config", config_path, "scenario config JSON")->required();
    hts_cmd->add_option("--out-dir", hts_out, "report output directory");
    hts_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    hts_cmd->add_option("--seed", seed_override, "override the config seed");

    bool quick = false;
    std::int64_t suite_seed = 7;
    std::string suite_out = "suite-out";
    int suite_threads = 0;
    CLI::App* suite_cmd = app.add_subcommand("suite", "run the bundled verification suite");
    suite_cmd->add_flag("--quick", quick, "smaller samples, looser gates");
    suite_cmd->add_option("--seed", suite_seed, "master seed");
    suite_cmd->add_option("--threads", suite_threads, "worker threads (0 = hardware)");
    suite_cmd->add_option("--out-dir", suite_out, "report output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (orbit_cmd->parsed()) return run_orbit(orbit_map, x0, orbit_n);
        if (inv_cmd->parsed()) return run_invariant(inv_map, method, bins, tol, inv_out);
        if (hts_cmd->parsed()) return run_hts(config_path, hts_out, threads, seed_override);
        if (suite_cmd->parsed()) return run_suite_cmd(quick, suite_seed, suite_threads, suite_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
