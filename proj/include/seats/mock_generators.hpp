#pragma once

#include <string>
#include <vector>

#include "seats/generation.hpp"
#include "seats/prompt.hpp"
#include "seats/util.hpp"

// Deterministic generator stand-ins. They answer every call as a pure
// function of the request text, which keeps whole runs bit-reproducible
// without any LLM.

namespace seats {

/// Flags code by pattern: an explicit leak marker, or a rolling-window
/// computation without a temporal shift.
class RuleBasedReviewer : public Generator {
  public:
    std::string complete(const GenerationRequest& request) override {
        std::string code = extract_prompt_section(request.user_prompt, "## Generated Code").value_or(request.user_prompt);
        std::string finding;
        if (code.find("LEAK") != std::string::npos) {
            finding = "Explicit leak marker found: the code uses future information.";
        } else if (code.find("rolling(") != std::string::npos && code.find(".shift(") == std::string::npos) {
            finding = "Rolling window computed without a preceding temporal shift; future rows leak into features.";
        }
        if (finding.empty()) return "has_logical_error = False\n";
        std::string out;
        out += "FINDINGS:\n" + finding + "\n";
        out += "PROMPT_SUGGESTION: Apply .shift(1) before any rolling window computation to prevent data leakage.\n";
        out += "has_logical_error = True\n";
        return out;
    }
};

/// Echoes the three compared metrics back as the insight.
class EchoReasoner : public Generator {
  public:
    std::string complete(const GenerationRequest& request) override {
        std::vector<std::string> metrics;
        for (const auto& line : split_lines(request.user_prompt)) {
            std::string t = trim(line);
            if (t.starts_with("Metric: ")) metrics.push_back(t.substr(std::string("Metric: ").size()));
        }
        std::string out = "Comparison of metrics";
        if (metrics.size() >= 3)
            out += " best=" + metrics[0] + " worst=" + metrics[1] + " current=" + metrics[2];
        out += ". Emulate the structure of the best solution; avoid patterns unique to the worst.";
        return out;
    }
};

/// Appends the new suggestion as one bullet under an insights section.
class EchoUpdater : public Generator {
  public:
    std::string complete(const GenerationRequest& request) override {
        std::string current = trim(extract_prompt_section(request.user_prompt, "## Current Running Prompt").value_or(""));
        std::string insight = trim(extract_prompt_section(request.user_prompt, "## New Suggestion for Improvement").value_or(""));
        std::string one_line;
        for (char c : insight) one_line += (c == '\n' ? ' ' : c);
        if (current.empty() || current == "(none)") return "## Accumulated Insights\n- " + one_line + "\n";
        return current + "\n- " + one_line + "\n";
    }
};

/// Always fails; exercises error paths.
class FailingGenerator : public Generator {
  public:
    explicit FailingGenerator(std::string reason = "scripted failure") : reason_(std::move(reason)) {}
    std::string complete(const GenerationRequest&) override { throw GenerationError(reason_); }

  private:
    std::string reason_;
};

} // namespace seats
