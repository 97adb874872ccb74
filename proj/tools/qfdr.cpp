// qfdr - command-line runner for the work-statistics experiments.
//
//   qfdr <command> [--config file] [--set key=value ...] [--out dir] [--threads n] [--seed u64]
//
// Writes <out>/<command>.csv and <out>/<command>.json. Exit codes: 0 success,
// 2 invalid input, 3 numerical failure; failures print one JSON line on stderr.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfdr/experiments.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int fail(int code, const std::string& kind, const std::string& field, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["code"] = code;
    if (!field.empty()) j["field"] = field;
    j["message"] = message;
    std::cerr << j.dump() << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Work fluctuation-dissipation experiments for slowly driven open quantum systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = ".";
    std::vector<std::string> overrides;
    unsigned threads = 1;
    unsigned long long seed = 12345;
    app.add_option("--config", config_path, "flat key = value configuration file");
    app.add_option("--set", overrides, "override one configuration key (key=value), repeatable");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    app.add_option("--seed", seed, "seed for randomized experiments");

    const char* descriptions[][2] = {
        {"fdr-verify", "exact vs slow-driving dissipation and work variance over a tau list"},
        {"oscillator-metrics", "closed-form and truncated-Fock metrics of the driven oscillator"},
        {"geodesic", "optimal oscillator protocol for one alpha"},
        {"pareto", "variance-dissipation Pareto fronts over a beta list"},
        {"quench", "discrete quench chain against its continuum limit"},
        {"oracle-tpm", "two-point-measurement work distribution of a closed composite system"},
    };
    for (const auto& d : descriptions) app.add_subcommand(d[0], d[1]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitValidation, "validation", "", e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        qfdr::Config cfg = config_path.empty() ? qfdr::Config{} : qfdr::Config::load(config_path);
        for (const auto& o : overrides) cfg.override_with(o);
        qfdr::prepare_config(command, cfg);
        qfdr::set_thread_count(threads);

        const auto start = std::chrono::steady_clock::now();
        const qfdr::ResultTable table = qfdr::run_experiment(command, cfg, seed);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        qfdr::RunMetadata meta;
        meta.command = command;
        meta.canonical_config = cfg.canonical();
        meta.config_hash =
            qfdr::hex64(qfdr::fnv1a(command + "\n" + meta.canonical_config + "seed=" + std::to_string(seed) + "\n"));
        meta.wall_time_s = wall;
        meta.threads = qfdr::thread_count();
        meta.seed = seed;

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw qfdr::ValidationError("out", "cannot create " + out_dir + ": " + ec.message());
        const std::filesystem::path base = std::filesystem::path(out_dir) / command;
        qfdr::write_csv(base.string() + ".csv", table, meta);
        qfdr::write_json(base.string() + ".json", table, meta);
        std::cout << base.string() << ".csv (" << table.rows().size() << " rows, " << wall << " s)\n";
        return 0;
    } catch (const qfdr::ValidationError& e) {
        return fail(kExitValidation, "validation", e.field, e.what());
    } catch (const qfdr::DomainError& e) {
        return fail(kExitValidation, "domain", "", e.what());
    } catch (const qfdr::ContractViolation& e) {
        return fail(kExitValidation, "contract", "", e.what());
    } catch (const qfdr::DimensionMismatch& e) {
        return fail(kExitValidation, "dimension", "", e.what());
    } catch (const qfdr::SingularityError& e) {
        return fail(kExitNumerical, "singularity", "", e.what());
    } catch (const qfdr::ConvergenceError& e) {
        return fail(kExitNumerical, "convergence", "", e.what());
    } catch (const std::exception& e) {
        return fail(kExitNumerical, "numerical", "", e.what());
    }
}
