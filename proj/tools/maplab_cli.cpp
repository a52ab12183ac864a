// Command-line front end: config ingestion, experiment subcommands, report
// emission. Exit codes: 0 success, 2 configuration error, 3 simulation error,
// 4 acceptance failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maplab/acceptance.hpp"
#include "maplab/entrance.hpp"
#include "maplab/fixtures.hpp"
#include "maplab/fluctuation.hpp"
#include "maplab/lamperti.hpp"
#include "maplab/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitAcceptance = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using maplab::json;

// Reject unknown keys so silent typos cannot skew an experiment.
void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

maplab::MapSpec fixture_by_name(const std::string& name) {
    using namespace maplab::fixtures;
    if (name == "deterministic_drift") return deterministic_drift();
    if (name == "exp_jump_drift") return exp_jump_drift();
    if (name == "brownian_two_state") return brownian_two_state();
    if (name == "exp_oscillating") return exp_oscillating();
    if (name == "pareto_oscillating") return pareto_oscillating();
    if (name == "exp_drift_down") return exp_drift_down();
    if (name == "pareto_heavy_oscillating") return pareto_heavy_oscillating();
    throw ConfigError("unknown fixture '" + name + "'");
}

struct Experiment {
    maplab::MapSpec spec = maplab::fixtures::deterministic_drift();
    double alpha = 1.0;
    std::uint64_t seed = 1;
    bool seed_from_config = false;
    std::string output_dir = "maplab_out";
    json params = json::object();  // subcommand-specific section
    std::string config_path = "<builtin>";
};

Experiment load_experiment(const std::string& config_path, const std::string& fixture,
                           const std::string& section) {
    Experiment ex;
    if (!fixture.empty() && !config_path.empty())
        throw ConfigError("give either --config or --fixture, not both");
    if (!fixture.empty()) {
        ex.spec = fixture_by_name(fixture);
        ex.config_path = "--fixture " + fixture;
        return ex;
    }
    if (config_path.empty()) throw ConfigError("either --config or --fixture is required");
    std::ifstream in(config_path);
    if (!in) throw ConfigError(config_path + ": cannot open");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(config_path + ": invalid JSON (" + e.what() + ")");
    }
    check_keys(j,
               {"model", "fixture", "alpha", "seed", "output_dir", "simulate", "check-condition",
                "overshoot", "fluctuation-verify", "entrance", "verify-all", "report"},
               config_path);
    try {
        if (j.contains("fixture"))
            ex.spec = fixture_by_name(j.at("fixture").get<std::string>());
        else if (j.contains("model"))
            ex.spec = maplab::map_spec_from_json(j.at("model"));
        else
            throw ConfigError(config_path + ": needs 'model' or 'fixture'");
        ex.alpha = j.value("alpha", 1.0);
        if (j.contains("seed")) {
            ex.seed = j.at("seed").get<std::uint64_t>();
            ex.seed_from_config = true;
        }
        ex.output_dir = j.value("output_dir", std::string("maplab_out"));
        if (j.contains(section)) ex.params = j.at(section);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(config_path + ": " + e.what());
    }
    ex.config_path = config_path;
    return ex;
}

// --seed flag wins over the config, which wins over MAPLAB_SEED.
void resolve_seed(Experiment& ex, const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) {
        ex.seed = *flag_seed;
        return;
    }
    if (ex.seed_from_config) return;
    if (const char* env = std::getenv("MAPLAB_SEED")) ex.seed = std::strtoull(env, nullptr, 10);
}

const char* cause_name(maplab::EventCause c) {
    switch (c) {
        case maplab::EventCause::start: return "start";
        case maplab::EventCause::switch_state: return "switch";
        case maplab::EventCause::local_jump: return "jump";
        case maplab::EventCause::horizon: return "horizon";
        case maplab::EventCause::killed: return "killed";
    }
    return "?";
}

int cmd_simulate(const Experiment& ex) {
    check_keys(ex.params, {"z", "horizon", "paths", "grid_points"},
               ex.config_path + ": simulate");
    double z = ex.params.value("z", 1.0);
    double horizon = ex.params.value("horizon", 1.0);
    std::size_t paths = ex.params.value("paths", std::size_t{1});
    std::size_t grid_points = ex.params.value("grid_points", std::size_t{100});
    if (grid_points < 2) throw ConfigError(ex.config_path + ": grid_points must be >= 2");
    std::filesystem::create_directories(ex.output_dir);
    maplab::ScalingIndex index(ex.alpha);
    for (std::size_t p = 0; p < paths; ++p) {
        maplab::RngStream rng(maplab::derive_seed(ex.seed, "cli-sim"), p);
        auto path = maplab::simulate_rssmp(ex.spec, index, z, horizon, rng);
        maplab::CsvWriter csv(ex.output_dir + "/path_" + std::to_string(p) + ".csv",
                              {"time", "state", "value", "cause"});
        for (std::size_t k = 0; k < grid_points; ++k) {
            double t = horizon * static_cast<double>(k) / static_cast<double>(grid_points - 1);
            double u = path.map_time(t);
            // locate the last event at or before the map time for the cause label
            const auto& ev = path.map_path.events;
            std::size_t e = 0;
            while (e + 1 < ev.size() && ev[e + 1].time <= u) ++e;
            csv.row({t, static_cast<double>(path.sign_at(t, ex.spec) > 0 ? 0 : 1),
                     path.value(t, ex.spec), static_cast<double>(ev[e].cause)});
        }
    }
    std::cout << "wrote " << paths << " path file(s) to " << ex.output_dir << "\n";
    return kExitOk;
}

int cmd_check_condition(const Experiment& ex) {
    check_keys(ex.params, {}, ex.config_path + ": check-condition");
    auto rep = maplab::check_condition(ex.spec);
    std::filesystem::create_directories(ex.output_dir);
    json out;
    out["holds"] = rep.holds;
    out["regime"] = maplab::to_string(maplab::classify_regime(ex.spec));
    out["detail"] = rep.detail;
    std::ofstream f(ex.output_dir + "/condition.json");
    f << out.dump(2) << "\n";
    std::cout << (rep.holds ? "holds" : "fails") << " / " << rep.detail << "\n";
    return kExitOk;
}

int cmd_overshoot(const Experiment& ex) {
    check_keys(ex.params, {"levels", "n"}, ex.config_path + ": overshoot");
    std::vector<double> levels = ex.params.value("levels", std::vector<double>{5.0, 10.0});
    std::size_t n = ex.params.value("n", std::size_t{10'000});
    auto study = maplab::estimate_stationary_overshoot(ex.spec, levels, n,
                                                       maplab::derive_seed(ex.seed, "cli-over"));
    std::filesystem::create_directories(ex.output_dir);
    maplab::CsvWriter csv(ex.output_dir + "/overshoot.csv",
                          {"level", "median", "ks_consecutive", "ks_between_inits"});
    for (std::size_t li = 0; li < levels.size(); ++li)
        csv.row({levels[li], study.medians[li],
                 li > 0 ? study.ks_consecutive[li - 1] : 0.0, study.ks_between_inits[li]});
    std::cout << "overshoot " << (study.tight ? "tight" : "escaping") << ", table in "
              << ex.output_dir << "/overshoot.csv\n";
    return kExitOk;
}

int cmd_fluctuation_verify(const Experiment& ex) {
    check_keys(ex.params, {"q", "zgrid", "n", "mrt_grid"},
               ex.config_path + ": fluctuation-verify");
    double q = ex.params.value("q", 0.5);
    std::vector<double> zgrid = ex.params.value("zgrid", std::vector<double>{0.0, 0.5, 1.0});
    std::size_t n = ex.params.value("n", std::size_t{30'000});
    std::filesystem::create_directories(ex.output_dir);

    auto whf = maplab::verify_wiener_hopf_splitting(ex.spec, q, zgrid, n,
                                                    maplab::derive_seed(ex.seed, "cli-whf"));
    maplab::CsvWriter wcsv(ex.output_dir + "/wiener_hopf.csv",
                           {"z", "i", "j", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "se", "pass"});
    for (const auto& e : whf.entries)
        wcsv.row({e.z, static_cast<double>(e.i), static_cast<double>(e.j), e.lhs.real(),
                  e.lhs.imag(), e.rhs.real(), e.rhs.imag(), e.se, e.pass ? 1.0 : 0.0});

    bool ok = whf.all_pass;
    // the renewal slope check builds on discrete ladder points, so it only
    // applies when the model cannot creep upward (no Gaussian part or
    // positive drift)
    if (!maplab::creeps_on_side(ex.spec, maplab::LadderSide::ascending)) {
        std::vector<double> grid = ex.params.value("mrt_grid", std::vector<double>{});
        if (grid.empty())
            for (double g = 5.0; g <= 50.0; g += 5.0) grid.push_back(g);
        auto mrt = maplab::check_markov_renewal(ex.spec, maplab::LadderSide::ascending, grid, 2000,
                                                maplab::derive_seed(ex.seed, "cli-mrt"));
        maplab::CsvWriter mcsv(ex.output_dir + "/markov_renewal.csv",
                               {"init", "ladder_state", "slope"});
        for (std::size_t i = 0; i < mrt.slope.size(); ++i)
            for (std::size_t j = 0; j < mrt.slope[i].size(); ++j)
                mcsv.row({static_cast<double>(i), static_cast<double>(j), mrt.slope[i][j]});
        ok = ok && mrt.max_relative_spread <= 0.05;
        std::cout << "wiener-hopf " << (whf.all_pass ? "pass" : "FAIL") << ", renewal spread "
                  << mrt.max_relative_spread << "; tables in " << ex.output_dir << "\n";
    } else {
        std::cout << "wiener-hopf " << (whf.all_pass ? "pass" : "FAIL")
                  << ", renewal check skipped (model creeps upward); tables in " << ex.output_dir
                  << "\n";
    }
    return ok ? kExitOk : kExitAcceptance;
}

int cmd_entrance(const Experiment& ex) {
    check_keys(ex.params, {"eps", "eps_schedule", "horizon", "n", "time_origin"},
               ex.config_path + ": entrance");
    double eps = ex.params.value("eps", 0.05);
    double horizon = ex.params.value("horizon", 1.0);
    std::size_t n = ex.params.value("n", std::size_t{2000});
    std::vector<double> schedule =
        ex.params.value("eps_schedule", std::vector<double>{0.1, 0.05, 0.025});
    std::string origin = ex.params.value("time_origin", std::string("zero"));
    maplab::EntranceConfig cfg;
    cfg.eps = eps;
    if (origin == "zero")
        cfg.policy = maplab::TimeOriginPolicy::zero_offset;
    else if (origin == "empirical")
        cfg.policy = maplab::TimeOriginPolicy::empirical_offset;
    else
        throw ConfigError(ex.config_path + ": time_origin must be 'zero' or 'empirical'");

    maplab::ScalingIndex index(ex.alpha);
    std::filesystem::create_directories(ex.output_dir);
    maplab::EntranceSampler sampler(ex.spec, index, cfg, n,
                                    maplab::derive_seed(ex.seed, "cli-entr"));
    maplab::SeedPlan plan{maplab::derive_seed(ex.seed, "cli-entr-ens"), n};
    auto vals = maplab::run_replicated(
        [&](maplab::RngStream& rng, std::size_t) {
            auto path = sampler.sample(horizon, rng);
            return path.value(horizon, ex.spec);
        },
        plan);
    maplab::CsvWriter csv(ex.output_dir + "/entrance_ensemble.csv", {"value"});
    for (double v : vals) csv.row({v});

    auto conv = maplab::convergence_report(ex.spec, index, schedule, n,
                                           maplab::derive_seed(ex.seed, "cli-conv"));
    json out;
    out["condition_holds"] = conv.condition_holds;
    out["exit_moments_pass"] = conv.exit_moments.pass;
    out["mu_stabilized"] = conv.mu_stability.stabilized;
    out["no_zero_visits"] = conv.no_zero_visits;
    out["post_exit_ks"] = conv.post_exit_ks;
    out["pass"] = conv.pass;
    std::ofstream f(ex.output_dir + "/convergence.json");
    f << out.dump(2) << "\n";
    std::cout << "entrance ensemble (" << vals.size() << " draws) and convergence report in "
              << ex.output_dir << "\n";
    return kExitOk;
}

int cmd_verify_all(const Experiment& ex) {
    auto results = maplab::acceptance::run_all(ex.seed, ex.output_dir);
    bool all = true;
    for (const auto& cr : results) {
        std::cout << "criterion " << cr.id << " [" << (cr.pass ? "PASS" : "FAIL") << "] "
                  << cr.name << " — " << cr.detail << "\n";
        all = all && cr.pass;
    }
    std::cout << (all ? "ACCEPTANCE: ALL PASS" : "ACCEPTANCE: FAILURES PRESENT") << "\n";
    return all ? kExitOk : kExitAcceptance;
}

int cmd_report(const Experiment& ex) {
    check_keys(ex.params, {}, ex.config_path + ": report");
    namespace fs = std::filesystem;
    fs::create_directories(ex.output_dir);
    // collect the CSV tables present and emit a gnuplot script next to them
    std::vector<std::string> tables;
    for (const auto& entry : fs::directory_iterator(ex.output_dir))
        if (entry.path().extension() == ".csv") tables.push_back(entry.path().filename());
    std::sort(tables.begin(), tables.end());
    std::ofstream gp(ex.output_dir + "/plots.gp");
    gp << "# gnuplot script, format version 1\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n";
    for (const auto& t : tables) {
        std::string png = t.substr(0, t.size() - 4) + ".png";
        gp << "set output '" << png << "'\nset terminal pngcairo\n"
           << "plot '" << t << "' using 1:2 with linespoints\n";
    }
    maplab::CsvWriter summary(ex.output_dir + "/report_summary.csv", {"tables"});
    summary.row({static_cast<double>(tables.size())});
    std::cout << "report: " << tables.size() << " table(s), plot script " << ex.output_dir
              << "/plots.gp\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification laboratory for modulated additive processes "
                 "and their self-similar transforms"};
    app.require_subcommand(1);

    std::string config_path, fixture, out_override;
    std::optional<std::uint64_t> flag_seed;
    app.add_option("--config", config_path, "JSON experiment configuration");
    app.add_option("--fixture", fixture, "built-in model fixture name");
    app.add_option("--seed", flag_seed, "master seed (wins over config and MAPLAB_SEED)");
    app.add_option("--out", out_override, "output directory (wins over config)");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Experiment&);
    };
    const std::vector<Sub> subs = {
        {"simulate", "sample paths to CSV", cmd_simulate},
        {"check-condition", "stationary-overshoot condition verdict", cmd_check_condition},
        {"overshoot", "stationary overshoot level table", cmd_overshoot},
        {"fluctuation-verify", "splitting and renewal check reports", cmd_fluctuation_verify},
        {"entrance", "entrance ensemble and convergence report", cmd_entrance},
        {"verify-all", "full acceptance suite", cmd_verify_all},
        {"report", "emit CSV summary and plot script", cmd_report},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        auto* picked = app.get_subcommands().front();
        Experiment ex;
        bool modelless = picked->get_name() == "verify-all" || picked->get_name() == "report";
        if (modelless && config_path.empty() && fixture.empty()) {
            // verify-all runs on the built-in fixtures and report only scans
            // the output directory; neither needs a model
            ex.config_path = "<builtin>";
        } else {
            ex = load_experiment(config_path, fixture, picked->get_name());
        }
        resolve_seed(ex, flag_seed);
        if (!out_override.empty()) ex.output_dir = out_override;
        for (const auto& s : subs)
            if (picked->get_name() == s.name) return s.run(ex);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    }
}
