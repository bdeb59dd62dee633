#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seats/default_templates.hpp"
#include "seats/errors.hpp"
#include "seats/generation.hpp"
#include "seats/util.hpp"

namespace seats {

/// A prompt template with {{placeholder}} markers. Rendering fails
/// unless every required placeholder is bound.
struct PromptTemplate {
    std::string name; // system | base | review | update | generation_context
    std::string body;
    std::vector<std::string> required_placeholders;
};

struct RenderResult {
    std::string text;
    std::vector<std::string> unknown_placeholders; // left verbatim; caller reports them
};

using Bindings = std::map<std::string, std::string>;

inline bool is_placeholder_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

/// Substitutes every bound {{name}}; unknown placeholders stay verbatim
/// and are reported back. Missing required bindings are an error.
inline RenderResult render_template(const PromptTemplate& t, const Bindings& bindings) {
    for (const auto& req : t.required_placeholders) {
        if (!bindings.count(req)) throw TemplateError(req);
    }
    RenderResult out;
    out.text.reserve(t.body.size());
    std::size_t pos = 0;
    while (pos < t.body.size()) {
        auto open = t.body.find("{{", pos);
        if (open == std::string::npos) {
            out.text.append(t.body, pos, std::string::npos);
            break;
        }
        out.text.append(t.body, pos, open - pos);
        auto close = t.body.find("}}", open + 2);
        std::string name = close == std::string::npos ? "" : t.body.substr(open + 2, close - open - 2);
        bool well_formed = close != std::string::npos && !name.empty();
        for (char c : name)
            if (!is_placeholder_char(c)) well_formed = false;
        if (!well_formed) {
            out.text.append("{{");
            pos = open + 2;
            continue;
        }
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            out.text.append(t.body, open, close + 2 - open);
            out.unknown_placeholders.push_back(name);
        } else {
            out.text.append(it->second);
        }
        pos = close + 2;
    }
    return out;
}

inline PromptTemplate builtin_template(const std::string& name) {
    if (name == "system") return {name, std::string(default_templates::kSystem), {}};
    if (name == "base")
        return {name, std::string(default_templates::kBase),
                {"task_name", "dataset_description", "metric_name", "metric_definition", "direction_sentence",
                 "reference_code"}};
    if (name == "review") return {name, std::string(default_templates::kReview), {"code", "execution_output"}};
    if (name == "update") return {name, std::string(default_templates::kUpdate), {"current", "insight"}};
    if (name == "generation_context")
        return {name, std::string(default_templates::kGenerationContext),
                {"base", "running", "context", "global", "archive", "remaining", "total"}};
    throw ConfigError("unknown template name: " + name);
}

/// Versioned accumulated-insight text injected into every generation
/// prompt. The body is capped; version history is fully recoverable from
/// the journal.
struct RunningPrompt {
    int version = 0;
    std::string body;
    std::size_t max_chars = 24000;
};

/// Cuts `text` at the last "\n## " section boundary that keeps the
/// result under `cap`; falls back to a hard cut when there is none.
inline std::pair<std::string, bool> truncate_at_section_boundary(const std::string& text, std::size_t cap) {
    if (text.size() <= cap) return {text, false};
    auto boundary = text.rfind("\n## ", cap);
    if (boundary != std::string::npos && boundary > 0) return {text.substr(0, boundary), true};
    return {text.substr(0, cap), true};
}

/// Returns the body of a "## Header" section: everything between the
/// header line and the next "## " line (or end of text). Used by the
/// deterministic mock generators to read structured prompts.
inline std::optional<std::string> extract_prompt_section(const std::string& text, const std::string& header) {
    std::string needle = header + "\n";
    std::size_t pos;
    if (text.rfind(needle, 0) == 0) {
        pos = 0;
    } else {
        pos = text.find("\n" + needle);
        if (pos == std::string::npos) return std::nullopt;
        pos += 1;
    }
    std::size_t body_start = pos + needle.size();
    std::size_t end = text.find("\n## ", body_start);
    std::string body = end == std::string::npos ? text.substr(body_start) : text.substr(body_start, end - body_start);
    return body;
}

struct RunningPromptUpdate {
    bool ok = false;
    RunningPrompt updated;   // unchanged on failure
    bool truncated = false;
};

/// Sends the current running prompt plus a new insight through the
/// refinement generator and returns the next version, capped at
/// max_chars (truncated at a section boundary when over). Refinement is
/// best-effort: on updater failure the version is unchanged.
inline RunningPromptUpdate update_running_prompt(const RunningPrompt& current, const std::string& insight,
                                                 Generator& updater, const PromptTemplate& update_template,
                                                 const GenerationRequest& defaults) {
    if (trim(insight).empty()) throw InvariantViolation("update_running_prompt: insight must be nonempty");
    GenerationRequest req = defaults;
    req.system_prompt = "You maintain a running prompt of accumulated engineering insights.";
    req.user_prompt = render_template(update_template, {{"current", current.body.empty() ? "(none)" : current.body},
                                                        {"insight", insight}})
                          .text;
    std::string next_body;
    try {
        next_body = updater.complete(req);
    } catch (const GenerationError&) {
        return RunningPromptUpdate{false, current, false};
    }
    auto [capped, truncated] = truncate_at_section_boundary(next_body, current.max_chars);
    RunningPrompt next{current.version + 1, capped, current.max_chars};
    return RunningPromptUpdate{true, next, truncated};
}

/// Assembles the full generation prompt: base task description, running
/// prompt, parent context, global comparison, archive elites, and the
/// remaining-iterations note, in that order. Empty sections render as
/// "(none)" so the prompt shape is stable. Pure function of its inputs.
inline RenderResult assemble_prompt(const PromptTemplate& generation_context, const std::string& base,
                                    const std::string& running_body, const std::string& parent_context,
                                    const std::string& global_block, const std::string& archive_block,
                                    int remaining_iterations, int total_budget) {
    auto or_none = [](const std::string& s) { return s.empty() ? std::string("(none)") : s; };
    Bindings b{
        {"base", base},
        {"running", or_none(running_body)},
        {"context", or_none(parent_context)},
        {"global", or_none(global_block)},
        {"archive", or_none(archive_block)},
        {"remaining", std::to_string(remaining_iterations)},
        {"total", std::to_string(total_budget)},
    };
    return render_template(generation_context, b);
}

} // namespace seats
