#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seats/generation.hpp"
#include "seats/prompt.hpp"
#include "seats/types.hpp"
#include "seats/util.hpp"

namespace seats {

/// Outcome of the post-execution logical audit. The verdict is parsed
/// strictly from a line "has_logical_error = True" / "... = False";
/// anything else resolves conservatively to buggy.
struct ReviewVerdict {
    bool has_logical_error = true;
    std::string findings;
    std::string prompt_suggestion;
    std::string raw;
    bool verdict_parse_ok = false;
};

inline ReviewVerdict parse_review_verdict(const std::string& raw) {
    ReviewVerdict v;
    v.raw = raw;
    auto lines = split_lines(raw);
    std::optional<bool> verdict;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = trim(lines[i]);
        if (line == "has_logical_error = True") verdict = true;
        if (line == "has_logical_error = False") verdict = false;
        if (line.starts_with("PROMPT_SUGGESTION:"))
            v.prompt_suggestion = trim(line.substr(std::string("PROMPT_SUGGESTION:").size()));
        if (line == "FINDINGS:" || line.starts_with("FINDINGS:")) {
            std::string acc = trim(line.substr(std::string("FINDINGS:").size()));
            for (std::size_t j = i + 1; j < lines.size(); ++j) {
                std::string next = trim(lines[j]);
                if (next.starts_with("PROMPT_SUGGESTION:") || next.starts_with("has_logical_error")) break;
                if (!acc.empty()) acc += "\n";
                acc += lines[j];
            }
            v.findings = trim(acc);
        }
    }
    if (verdict) {
        v.has_logical_error = *verdict;
        v.verdict_parse_ok = true;
    } else {
        v.has_logical_error = true; // falsely rejecting is preferable to letting a flaw through
        v.verdict_parse_ok = false;
    }
    return v;
}

/// Reviews an ok-executed node: renders the review template with the
/// code and execution output, asks the reviewer, parses the verdict.
inline ReviewVerdict review(const std::string& code, const std::string& execution_output, Generator& reviewer,
                            const PromptTemplate& review_template, const GenerationRequest& defaults) {
    GenerationRequest req = defaults;
    req.system_prompt = "You are an expert ML engineer performing a code review.";
    req.user_prompt = render_template(review_template, {{"code", code}, {"execution_output", execution_output}}).text;
    std::string raw;
    try {
        raw = reviewer.complete(req);
    } catch (const GenerationError& e) {
        ReviewVerdict v;
        v.has_logical_error = true;
        v.verdict_parse_ok = false;
        v.raw = std::string("(reviewer failed: ") + e.what() + ")";
        return v;
    }
    return parse_review_verdict(raw);
}

/// (code, plan, metric) triple as used in the global comparison prompt.
struct SolutionTriple {
    NodeId id = 0;
    std::string code;
    std::string plan;
    double metric = 0.0;
};

struct GlobalComparison {
    SolutionTriple best;
    SolutionTriple worst;
    SolutionTriple current;
    std::string insight;
};

inline std::string make_comparison_prompt(const SolutionTriple& best, const SolutionTriple& worst,
                                          const SolutionTriple& current) {
    auto block = [](const char* label, const SolutionTriple& t) {
        std::string s;
        s += std::string("### ") + label + " (node " + std::to_string(t.id) + ")\n";
        s += "Metric: " + format_double(t.metric) + "\n";
        s += "Plan: " + t.plan + "\n";
        s += "Code:\n" + t.code + "\n";
        return s;
    };
    std::string p = "## Global Comparison\n";
    p += block("Global best", best);
    p += block("Global worst", worst);
    p += block("Current solution", current);
    p += "## Instructions\n";
    p += "Produce a structured summary identifying successful strategies to emulate, "
         "failure patterns to avoid, and specific code-level recommendations.\n";
    return p;
}

struct ReasoningOutcome {
    std::string insight;
    bool ok = true;
};

/// Compares the current node against the global best and worst and
/// returns the reasoner's summary. Failures degrade to an empty insight;
/// the loop proceeds.
inline ReasoningOutcome global_reasoning(const SolutionTriple& best, const SolutionTriple& worst,
                                         const SolutionTriple& current, Generator& reasoner,
                                         const GenerationRequest& defaults) {
    GenerationRequest req = defaults;
    req.system_prompt = "You compare machine learning solutions and extract transferable insights.";
    req.user_prompt = make_comparison_prompt(best, worst, current);
    try {
        return ReasoningOutcome{trim(reasoner.complete(req)), true};
    } catch (const GenerationError&) {
        return ReasoningOutcome{"", false};
    }
}

/// Tracks the global best (N*) and worst non-buggy solutions. Buggy
/// nodes never participate; ties keep the incumbent.
class ExtremesTracker {
  public:
    explicit ExtremesTracker(MetricDirection direction) : direction_(direction) {}

    std::optional<NodeId> best_id() const { return best_id_; }
    std::optional<NodeId> worst_id() const { return worst_id_; }
    double best_metric() const { return best_metric_; }
    double worst_metric() const { return worst_metric_; }
    int non_buggy_count() const { return non_buggy_count_; }

    /// Offers an evaluated node; returns true when either extreme moved.
    bool update(NodeId id, std::optional<double> metric, bool buggy) {
        if (buggy || !metric) return false;
        ++non_buggy_count_;
        bool changed = false;
        if (!best_id_ || improves(*metric, best_metric_, direction_)) {
            best_id_ = id;
            best_metric_ = *metric;
            changed = true;
        }
        if (!worst_id_ || improves(worst_metric_, *metric, direction_)) {
            worst_id_ = id;
            worst_metric_ = *metric;
            changed = true;
        }
        return changed;
    }

  private:
    MetricDirection direction_;
    std::optional<NodeId> best_id_;
    std::optional<NodeId> worst_id_;
    double best_metric_ = 0.0;
    double worst_metric_ = 0.0;
    int non_buggy_count_ = 0;
};

} // namespace seats
