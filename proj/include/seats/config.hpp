#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seats/errors.hpp"
#include "seats/prompt.hpp"
#include "seats/sandbox.hpp"
#include "seats/schedule.hpp"
#include "seats/types.hpp"

namespace seats {

using json = nlohmann::json;

struct GeneratorSettings {
    std::string kind = "landscape"; // remote | landscape | fixtures
    // remote
    std::string endpoint_url;
    std::string endpoint_path = "/v1/chat/completions";
    std::string model;
    int max_attempts = 3;
    double initial_backoff_seconds = 2.0;
    // landscape
    std::string landscape = "quadratic_1d";
    double perturbation_sd = 0.8;
    double noise_sd = 0.0;
    int leak_every = 0; // every k-th candidate carries a leak marker (0 = never)
    int fail_every = 0; // every k-th candidate crashes at runtime (0 = never)
    // fixtures
    std::string fixtures_dir;
    // request defaults (all kinds)
    double temperature = 1.0;
    int max_output_chars = 200000;
};

struct TemplatePaths {
    std::string system;
    std::string base;
    std::string review;
    std::string update;
    std::string generation_context;
};

struct RunConfig {
    int budget_T = 500;
    ExplorationSchedule schedule; // default: fixed sqrt(2)
    int max_children = 5;
    int workers = 1;
    MetricDirection direction = MetricDirection::LowerBetter;
    int bins_per_dim = 7;
    int islands = 4;
    int migration_interval = 25;
    int archive_sample_k = 2;
    double timeout_seconds = 3600.0;
    std::int64_t seed = 0;
    TemplatePaths templates;
    GeneratorSettings generator;
    SandboxSettings sandbox;
    bool exclude_flagged_metrics = false;
    std::string reward_policy = "metric_advantage"; // or "fixed" (+1 on improvement, -1 otherwise)
    std::string run_dir = "seats_run";
    std::string base_prompt_path;    // pre-rendered task description; overrides `task`
    std::string reference_code_path; // root node's code; landscape runs default it
    std::map<std::string, std::string> task; // bindings for the base template
    int running_prompt_max_chars = 24000;
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace detail

inline json schedule_to_json(const ExplorationSchedule& s) {
    json j{{"kind", to_string(s.kind())}, {"c0", s.c0()}, {"c_min", s.c_min()}, {"alpha", s.alpha()},
           {"gamma", s.gamma()}};
    json bps = json::array();
    for (const auto& bp : s.breakpoints()) bps.push_back({{"iteration", bp.iteration}, {"value", bp.value}});
    j["breakpoints"] = bps;
    return j;
}

inline ExplorationSchedule schedule_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"kind", "c0", "c_min", "alpha", "gamma", "breakpoints"}, "schedule");
    std::string kind = "fixed";
    double c0 = std::sqrt(2.0), c_min = 0.0, alpha = 0.0, gamma = 1.0;
    std::vector<ExplorationSchedule::Breakpoint> bps;
    detail::read_field(j, "kind", kind);
    detail::read_field(j, "c0", c0);
    detail::read_field(j, "c_min", c_min);
    detail::read_field(j, "alpha", alpha);
    detail::read_field(j, "gamma", gamma);
    if (j.contains("breakpoints")) {
        for (const auto& b : j.at("breakpoints"))
            bps.push_back({b.at("iteration").get<int>(), b.at("value").get<double>()});
    }
    try {
        return ExplorationSchedule(schedule_kind_from_string(kind), c0, c_min, alpha, gamma, std::move(bps));
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["budget_T"] = c.budget_T;
    j["schedule"] = schedule_to_json(c.schedule);
    j["max_children"] = c.max_children;
    j["workers"] = c.workers;
    j["direction"] = to_string(c.direction);
    j["bins_per_dim"] = c.bins_per_dim;
    j["islands"] = c.islands;
    j["migration_interval"] = c.migration_interval;
    j["archive_sample_k"] = c.archive_sample_k;
    j["timeout_seconds"] = c.timeout_seconds;
    j["seed"] = c.seed;
    j["templates"] = {{"system", c.templates.system},
                      {"base", c.templates.base},
                      {"review", c.templates.review},
                      {"update", c.templates.update},
                      {"generation_context", c.templates.generation_context}};
    j["generator"] = {{"kind", c.generator.kind},
                      {"endpoint_url", c.generator.endpoint_url},
                      {"endpoint_path", c.generator.endpoint_path},
                      {"model", c.generator.model},
                      {"max_attempts", c.generator.max_attempts},
                      {"initial_backoff_seconds", c.generator.initial_backoff_seconds},
                      {"landscape", c.generator.landscape},
                      {"perturbation_sd", c.generator.perturbation_sd},
                      {"noise_sd", c.generator.noise_sd},
                      {"leak_every", c.generator.leak_every},
                      {"fail_every", c.generator.fail_every},
                      {"fixtures_dir", c.generator.fixtures_dir},
                      {"temperature", c.generator.temperature},
                      {"max_output_chars", c.generator.max_output_chars}};
    j["sandbox"] = {{"interpreter", c.sandbox.interpreter},
                    {"extension", c.sandbox.extension},
                    {"data_paths", c.sandbox.data_paths},
                    {"workdir", c.sandbox.workdir}};
    j["exclude_flagged_metrics"] = c.exclude_flagged_metrics;
    j["reward_policy"] = c.reward_policy;
    j["run_dir"] = c.run_dir;
    j["base_prompt_path"] = c.base_prompt_path;
    j["reference_code_path"] = c.reference_code_path;
    j["task"] = c.task;
    j["running_prompt_max_chars"] = c.running_prompt_max_chars;
    return j;
}

inline RunConfig config_from_json(const json& j) {
    detail::reject_unknown_keys(
        j,
        {"budget_T", "schedule", "max_children", "workers", "direction", "bins_per_dim", "islands",
         "migration_interval", "archive_sample_k", "timeout_seconds", "seed", "templates", "generator", "sandbox",
         "exclude_flagged_metrics", "reward_policy", "run_dir", "base_prompt_path", "reference_code_path", "task",
         "running_prompt_max_chars"},
        "config");
    RunConfig c;
    detail::read_field(j, "budget_T", c.budget_T);
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    detail::read_field(j, "max_children", c.max_children);
    detail::read_field(j, "workers", c.workers);
    if (j.contains("direction")) {
        try {
            c.direction = direction_from_string(j.at("direction").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    detail::read_field(j, "bins_per_dim", c.bins_per_dim);
    detail::read_field(j, "islands", c.islands);
    detail::read_field(j, "migration_interval", c.migration_interval);
    detail::read_field(j, "archive_sample_k", c.archive_sample_k);
    detail::read_field(j, "timeout_seconds", c.timeout_seconds);
    detail::read_field(j, "seed", c.seed);
    if (j.contains("templates")) {
        const json& t = j.at("templates");
        detail::reject_unknown_keys(t, {"system", "base", "review", "update", "generation_context"}, "templates");
        detail::read_field(t, "system", c.templates.system);
        detail::read_field(t, "base", c.templates.base);
        detail::read_field(t, "review", c.templates.review);
        detail::read_field(t, "update", c.templates.update);
        detail::read_field(t, "generation_context", c.templates.generation_context);
    }
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        detail::reject_unknown_keys(g,
                                    {"kind", "endpoint_url", "endpoint_path", "model", "max_attempts",
                                     "initial_backoff_seconds", "landscape", "perturbation_sd", "noise_sd",
                                     "leak_every", "fail_every", "fixtures_dir", "temperature", "max_output_chars"},
                                    "generator");
        detail::read_field(g, "kind", c.generator.kind);
        detail::read_field(g, "endpoint_url", c.generator.endpoint_url);
        detail::read_field(g, "endpoint_path", c.generator.endpoint_path);
        detail::read_field(g, "model", c.generator.model);
        detail::read_field(g, "max_attempts", c.generator.max_attempts);
        detail::read_field(g, "initial_backoff_seconds", c.generator.initial_backoff_seconds);
        detail::read_field(g, "landscape", c.generator.landscape);
        detail::read_field(g, "perturbation_sd", c.generator.perturbation_sd);
        detail::read_field(g, "noise_sd", c.generator.noise_sd);
        detail::read_field(g, "leak_every", c.generator.leak_every);
        detail::read_field(g, "fail_every", c.generator.fail_every);
        detail::read_field(g, "fixtures_dir", c.generator.fixtures_dir);
        detail::read_field(g, "temperature", c.generator.temperature);
        detail::read_field(g, "max_output_chars", c.generator.max_output_chars);
    }
    if (j.contains("sandbox")) {
        const json& s = j.at("sandbox");
        detail::reject_unknown_keys(s, {"interpreter", "extension", "data_paths", "workdir"}, "sandbox");
        detail::read_field(s, "interpreter", c.sandbox.interpreter);
        detail::read_field(s, "extension", c.sandbox.extension);
        detail::read_field(s, "data_paths", c.sandbox.data_paths);
        detail::read_field(s, "workdir", c.sandbox.workdir);
    }
    detail::read_field(j, "exclude_flagged_metrics", c.exclude_flagged_metrics);
    detail::read_field(j, "reward_policy", c.reward_policy);
    detail::read_field(j, "run_dir", c.run_dir);
    detail::read_field(j, "base_prompt_path", c.base_prompt_path);
    detail::read_field(j, "reference_code_path", c.reference_code_path);
    detail::read_field(j, "task", c.task);
    detail::read_field(j, "running_prompt_max_chars", c.running_prompt_max_chars);
    c.sandbox.timeout_seconds = c.timeout_seconds;
    return c;
}

inline void validate_config(const RunConfig& c) {
    auto positive = [](long long v, const char* name) {
        if (v < 1) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(c.budget_T, "budget_T");
    positive(c.max_children, "max_children");
    positive(c.workers, "workers");
    positive(c.bins_per_dim, "bins_per_dim");
    positive(c.islands, "islands");
    positive(c.migration_interval, "migration_interval");
    positive(c.archive_sample_k, "archive_sample_k");
    positive(c.running_prompt_max_chars, "running_prompt_max_chars");
    if (!(c.timeout_seconds > 0)) throw ConfigError("timeout_seconds must be positive");
    if (c.reward_policy != "metric_advantage" && c.reward_policy != "fixed")
        throw ConfigError("reward_policy must be 'metric_advantage' or 'fixed'");
    if (c.generator.kind != "remote" && c.generator.kind != "landscape" && c.generator.kind != "fixtures")
        throw ConfigError("generator.kind must be 'remote', 'landscape' or 'fixtures'");
    if (c.generator.kind == "remote" && c.generator.endpoint_url.empty())
        throw ConfigError("remote generator needs generator.endpoint_url");
    if (c.generator.kind == "fixtures" && c.generator.fixtures_dir.empty())
        throw ConfigError("fixtures generator needs generator.fixtures_dir");
    if (c.generator.max_attempts < 1) throw ConfigError("generator.max_attempts must be positive");
    if (c.sandbox.interpreter.empty()) throw ConfigError("sandbox.interpreter must not be empty");
    if (c.run_dir.empty()) throw ConfigError("run_dir must not be empty");
}

inline RunConfig load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot parse ") + path + ": " + e.what());
    }
    RunConfig c = config_from_json(j);
    validate_config(c);
    return c;
}

/// Loads a named template from its configured path, or the built-in
/// default when the path is empty.
inline PromptTemplate load_template(const std::string& name, const std::string& path) {
    PromptTemplate t = builtin_template(name);
    if (!path.empty()) t.body = read_file(path);
    return t;
}

} // namespace seats
