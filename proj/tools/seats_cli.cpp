// seats command-line front end: run / resume / report / archive / compare.
// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 replay refusal.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seats/compare.hpp"
#include "seats/report.hpp"
#include "seats/runner.hpp"

namespace {

void print_best(const seats::BestReport& r) {
    if (r.best_id) {
        std::cout << "N*: node " << *r.best_id << ", metric " << seats::format_double(*r.best_metric) << "\n";
        std::cout << "lineage:";
        for (seats::NodeId id : r.lineage) std::cout << " " << id;
        std::cout << "\n";
        std::cout << "code:\n" << r.best_code;
    } else {
        std::cout << "N*: none\n";
    }
    std::cout << "iterations: " << r.iterations_completed << ", LLM calls: " << r.calls.total() << " (generation "
              << r.calls.generation << ", review " << r.calls.review << ", reasoning " << r.calls.global_reasoning
              << ", prompt_update " << r.calls.prompt_update << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seats: metric-advantage tree search over generated candidate programs"};
    app.require_subcommand(1);

    std::string config_path, journal_path;
    bool as_json = false;

    auto* run_cmd = app.add_subcommand("run", "start a new run from a config file");
    run_cmd->add_option("--config", config_path, "config file (JSON)")->required();

    auto* resume_cmd = app.add_subcommand("resume", "continue an interrupted run from its journal");
    resume_cmd->add_option("--journal", journal_path, "journal file")->required();
    resume_cmd->add_option("--config", config_path, "optional config; its seed must match the recorded one");

    auto* report_cmd = app.add_subcommand("report", "summarize a run from its journal");
    report_cmd->add_option("--journal", journal_path, "journal file")->required();
    report_cmd->add_flag("--json", as_json, "machine-readable output");

    auto* archive_cmd = app.add_subcommand("archive", "dump archive occupancy and per-cell elites");
    archive_cmd->add_option("--journal", journal_path, "journal file")->required();

    std::string landscape = "double_well_1d";
    int runs = 30, budget = 150;
    std::int64_t seed = 1;
    std::string compare_workdir;
    auto* compare_cmd = app.add_subcommand("compare", "paired comparison of reward policies on a landscape");
    compare_cmd->add_option("--landscape", landscape, "one of: quadratic_1d, double_well_1d, plateau_step");
    compare_cmd->add_option("--runs", runs, "number of paired seeds");
    compare_cmd->add_option("--budget", budget, "iterations per run");
    compare_cmd->add_option("--seed", seed, "base seed");
    compare_cmd->add_option("--workdir", compare_workdir, "directory for the comparison runs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            seats::RunConfig cfg = seats::load_config_file(config_path);
            print_best(seats::run_new(cfg));
        } else if (resume_cmd->parsed()) {
            std::optional<seats::RunConfig> provided;
            if (!config_path.empty()) provided = seats::load_config_file(config_path);
            print_best(seats::resume_run(journal_path, std::nullopt, provided));
        } else if (report_cmd->parsed()) {
            seats::ReplayResult rr = seats::replay_journal(journal_path);
            seats::RunSummary s = seats::summarize(rr);
            if (as_json)
                std::cout << seats::summary_to_json(s).dump(2) << "\n";
            else
                std::cout << seats::render_summary_text(s);
        } else if (archive_cmd->parsed()) {
            seats::ReplayResult rr = seats::replay_journal(journal_path);
            std::cout << seats::render_archive_text(rr.state);
        } else if (compare_cmd->parsed()) {
            std::filesystem::path wd = compare_workdir.empty()
                                           ? std::filesystem::path("compare_" + landscape + "_s" + std::to_string(seed))
                                           : std::filesystem::path(compare_workdir);
            seats::CompareResult res = seats::compare_policies(landscape, runs, budget, seed, wd);
            std::cout << seats::render_compare_table(res);
        }
    } catch (const seats::ReplayError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const seats::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
