#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "seats/config.hpp"
#include "seats/journal.hpp"
#include "seats/landscape.hpp"
#include "seats/mock_generators.hpp"
#include "seats/orchestrator.hpp"
#include "seats/remote_generator.hpp"

namespace seats {

/// Wires the four generator roles for a config. Landscape and fixture
/// runs pair the candidate generator with the deterministic rule-based
/// reviewer and echo reasoner/updater; remote runs share one endpoint
/// client across all roles. `generation_calls_so_far` fast-forwards
/// sequence-keyed mocks on resume.
inline GeneratorSet make_generators(const RunConfig& cfg, int generation_calls_so_far,
                                    std::shared_ptr<LandscapeGenerator>* landscape_out = nullptr) {
    GeneratorSet g;
    if (cfg.generator.kind == "remote") {
        auto remote = std::make_shared<RemoteGenerator>(cfg.generator);
        g.generator = g.reviewer = g.reasoner = g.updater = remote;
        return g;
    }
    if (cfg.generator.kind == "landscape") {
        auto l = std::make_shared<LandscapeGenerator>(landscape_by_name(cfg.generator.landscape), cfg.generator,
                                                      cfg.seed, cfg.direction, generation_calls_so_far);
        g.generator = l;
        if (landscape_out) *landscape_out = l;
    } else { // fixtures
        g.generator = std::make_shared<FixtureGenerator>(cfg.generator.fixtures_dir, generation_calls_so_far);
    }
    g.reviewer = std::make_shared<RuleBasedReviewer>();
    g.reasoner = std::make_shared<EchoReasoner>();
    g.updater = std::make_shared<EchoUpdater>();
    return g;
}

inline std::string resolve_root_code(const RunConfig& cfg, const LandscapeGenerator* landscape) {
    if (!cfg.reference_code_path.empty()) return read_file(cfg.reference_code_path);
    if (landscape) return landscape->root_code();
    throw ConfigError("no reference code: set reference_code_path (or use the landscape generator)");
}

inline std::string resolve_base_prompt(const RunConfig& cfg, const LandscapeGenerator* landscape,
                                       const std::string& root_code) {
    if (!cfg.base_prompt_path.empty()) return read_file(cfg.base_prompt_path);
    if (!cfg.task.empty()) {
        Bindings b(cfg.task.begin(), cfg.task.end());
        b.emplace("reference_code", root_code);
        return render_template(load_template("base", cfg.templates.base), b).text;
    }
    if (landscape) return make_landscape_base_prompt(landscape->spec(), cfg.direction, root_code);
    throw ConfigError("no base prompt: set base_prompt_path or task bindings");
}

inline std::filesystem::path journal_path_for(const RunConfig& cfg) {
    return std::filesystem::path(cfg.run_dir) / "journal.jsonl";
}

/// Starts a fresh run in cfg.run_dir. `stop_after` caps the number of
/// iterations executed in this session without finishing the run (used
/// for controlled interruption; resume continues it).
inline BestReport run_new(const RunConfig& cfg, std::optional<int> stop_after = std::nullopt) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.run_dir);
    auto jpath = journal_path_for(cfg);
    std::error_code ec;
    if (std::filesystem::exists(jpath) && std::filesystem::file_size(jpath, ec) > 0)
        throw ConfigError("run_dir already contains a journal; use resume");

    write_file(std::filesystem::path(cfg.run_dir) / "config.json", config_to_json(cfg).dump(2) + "\n");

    std::shared_ptr<LandscapeGenerator> landscape;
    GeneratorSet gens = make_generators(cfg, 0, &landscape);
    std::string root_code = resolve_root_code(cfg, landscape.get());
    std::string base_prompt = resolve_base_prompt(cfg, landscape.get(), root_code);

    // the run directory is implied by the journal's own location; keeping
    // it out of the embedded config makes paired-run journals comparable
    json embedded = config_to_json(cfg);
    embedded["run_dir"] = "";
    auto writer = std::make_unique<JournalWriter>(jpath, 1, false);
    writer->append(0, "run_started", json{{"config", embedded}});

    Orchestrator orch(RunState(cfg), std::move(gens), std::move(writer), cfg.run_dir, std::move(base_prompt),
                      std::move(root_code));
    return orch.run(stop_after);
}

/// Continues an interrupted run from its journal. State is rebuilt by
/// replay under the recorded config; an optionally supplied config must
/// carry the recorded seed.
inline BestReport resume_run(const std::filesystem::path& journal_path,
                             std::optional<int> stop_after = std::nullopt,
                             const std::optional<RunConfig>& provided = std::nullopt) {
    ReplayResult rr = replay_journal(journal_path);
    const RunConfig& cfg = rr.state.config;
    if (provided && provided->seed != cfg.seed)
        throw ConfigError("resume: config seed " + std::to_string(provided->seed) +
                          " does not match recorded seed " + std::to_string(cfg.seed));

    std::filesystem::path run_dir = journal_path.parent_path();
    std::shared_ptr<LandscapeGenerator> landscape;
    GeneratorSet gens = make_generators(cfg, static_cast<int>(rr.state.calls.generation), &landscape);
    std::string root_code = rr.state.tree.empty() ? resolve_root_code(cfg, landscape.get())
                                                  : rr.state.tree.node(0).code;
    std::string base_prompt = resolve_base_prompt(cfg, landscape.get(), root_code);

    // restore the running-prompt version files for audit
    for (std::size_t v = 1; v < rr.state.running_bodies.size(); ++v) {
        auto p = run_dir / ("running_prompt.v" + std::to_string(v) + ".txt");
        if (!std::filesystem::exists(p)) write_file(p, rr.state.running_bodies[v]);
    }

    auto writer = std::make_unique<JournalWriter>(journal_path, rr.events.back().sequence + 1, true);
    Orchestrator orch(std::move(rr.state), std::move(gens), std::move(writer), run_dir, std::move(base_prompt),
                      std::move(root_code));
    return orch.run(stop_after);
}

} // namespace seats
