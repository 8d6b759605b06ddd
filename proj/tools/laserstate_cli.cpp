// laserstate: run a scenario from a JSON config and write its records and summary.
//
//   laserstate run <config.json> [--output-dir DIR] [--seed N] [--threads N]
//   laserstate list
//
// Exit codes: 0 all claims pass, 1 a claim failed, 2 config or command-line
// parse error, 3 invalid parameter values or a failure while running.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "laserstate/config.hpp"

namespace fs = std::filesystem;
using namespace laserstate;

namespace {

constexpr int exit_pass = 0, exit_claim_failed = 1, exit_parse = 2, exit_invalid = 3;

struct RunOptions {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

fs::path resolve_output_dir(const RunOptions& opt, const config::RunConfig& rc) {
    if (!opt.output_dir.empty()) return opt.output_dir;
    if (rc.output_dir) return *rc.output_dir;
    if (const char* env = std::getenv("LASERSTATE_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

void write_outputs(const fs::path& dir, const std::string& stem, const scenarios::ScenarioResult& res,
                   const std::string& label) {
    fs::create_directories(dir);
    const fs::path csv = dir / (stem + ".csv"), summary = dir / (stem + ".summary.json");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw Error("cannot write " + csv.string());
        scenarios::write_csv(out, res);
    }
    auto j = scenarios::summary_json(res);
    if (!label.empty()) j["sweep_label"] = label;
    std::ofstream out(summary, std::ios::binary);
    if (!out) throw Error("cannot write " + summary.string());
    out << j.dump(2) << "\n";
}

int run_command(const RunOptions& opt) {
    config::RunConfig rc;
    try {
        rc = config::load(opt.config_path);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_parse;
    }
    try {
        config::validate(rc);
    } catch (const Error& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return exit_invalid;
    }
    const std::uint64_t seed = opt.seed ? *opt.seed : *rc.seed;
    const std::size_t threads = scenarios::resolve_threads(opt.threads ? *opt.threads : rc.threads.value_or(0));
    const fs::path dir = resolve_output_dir(opt, rc);
    const auto& info = config::scenario_info(rc.scenario);

    bool all_pass = true;
    try {
        for (const auto& v : rc.variants) {
            auto res = config::run(v.config, Rng(seed), threads);
            const std::string stem = config::output_stem(rc.scenario, seed, v.label);
            const std::string who = v.label.empty() ? info.name : std::string(info.name) + "[" + v.label + "]";
            for (const auto& c : res.claims) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << who << " " << c.name << ": " << c.detail << "\n";
                all_pass = all_pass && c.pass;
            }
            write_outputs(dir, stem, res, v.label);
            std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and " << (dir / (stem + ".summary.json")).string()
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    }
    return all_pass ? exit_pass : exit_claim_failed;
}

void list_command() {
    for (const auto& i : config::scenario_table()) std::cout << i.name << "  " << i.tag << "  " << i.claim << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laser phase-ensemble scenarios: run a config, write CSV records and a JSON summary"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config file");
    run->add_option("config", opt.config_path, "Path to the JSON config")->required();
    run->add_option("--output-dir", opt.output_dir, "Output directory (default: config output_dir, $LASERSTATE_OUTPUT_DIR, .)");
    run->add_option("--seed", opt.seed, "Seed overriding the config value");
    run->add_option("--threads", opt.threads, "Worker threads (0 = all hardware threads)");

    app.add_subcommand("list", "List the available scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_parse;
    }
    if (app.got_subcommand("list")) {
        list_command();
        return exit_pass;
    }
    return run_command(opt);
}
