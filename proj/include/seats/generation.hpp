#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "seats/errors.hpp"
#include "seats/types.hpp"
#include "seats/util.hpp"

namespace seats {

struct GenerationRequest {
    std::string system_prompt;
    std::string user_prompt;
    int node_id_hint = -1;
    double temperature = 1.0;
    int max_output_chars = 200000;
};

struct GenerationResponse {
    std::string plan;
    std::string code;
    BehaviorDescriptor descriptor;
    std::string raw; // unparsed payload, retained for audit
};

/// A chat-style completion backend. The same interface serves candidate
/// generation, code review, global reasoning, and prompt refinement;
/// implementations must be safe for concurrent use.
class Generator {
  public:
    virtual ~Generator() = default;
    /// Returns the raw completion text; throws GenerationError on failure.
    virtual std::string complete(const GenerationRequest& request) = 0;
};

namespace detail {

inline std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

// DESCRIPTOR: d1=<x> d2=<y> d3=<z>
inline std::optional<BehaviorDescriptor> parse_descriptor_line(const std::string& line) {
    std::string t = trim(line);
    if (!t.starts_with("DESCRIPTOR:")) return std::nullopt;
    t = trim(t.substr(std::string("DESCRIPTOR:").size()));
    double vals[3];
    const char* keys[3] = {"d1=", "d2=", "d3="};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        auto k = t.find(keys[i], pos);
        if (k == std::string::npos) return std::nullopt;
        std::size_t start = k + 3;
        std::size_t end = t.find_first_of(" \t", start);
        std::string num = t.substr(start, end == std::string::npos ? std::string::npos : end - start);
        auto v = parse_double(num);
        if (!v) return std::nullopt;
        vals[i] = *v;
        pos = start;
    }
    return BehaviorDescriptor(vals[0], vals[1], vals[2]);
}

} // namespace detail

/// Parses the structured generator response contract: a PLAN section, a
/// fenced code block, and a "DESCRIPTOR: d1=<x> d2=<y> d3=<z>" line
/// after the code. Throws GenerationError naming the missing part.
inline GenerationResponse parse_generation_response(const std::string& raw) {
    auto lines = split_lines(raw);

    int plan_line = -1, fence_open = -1, fence_close = -1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (plan_line < 0 && trim(lines[i]).starts_with("PLAN:")) plan_line = static_cast<int>(i);
        if (trim(lines[i]).starts_with("```")) {
            if (fence_open < 0) {
                fence_open = static_cast<int>(i);
            } else if (fence_close < 0) {
                fence_close = static_cast<int>(i);
            }
        }
    }
    if (plan_line < 0) throw GenerationError("response missing PLAN section");
    if (fence_open < 0) throw GenerationError("response missing fenced code block");
    if (fence_close < 0) throw GenerationError("response missing closing code fence");
    if (plan_line > fence_open) throw GenerationError("PLAN section must precede the code block");

    std::string plan;
    {
        std::string first = trim(lines[static_cast<std::size_t>(plan_line)]).substr(std::string("PLAN:").size());
        std::string acc = trim(first);
        for (int i = plan_line + 1; i < fence_open; ++i) {
            if (!acc.empty()) acc += "\n";
            acc += lines[static_cast<std::size_t>(i)];
        }
        plan = trim(acc);
    }

    std::string code;
    for (int i = fence_open + 1; i < fence_close; ++i) {
        code += lines[static_cast<std::size_t>(i)];
        code += "\n";
    }
    if (trim(code).empty()) throw GenerationError("response code block is empty");

    std::optional<BehaviorDescriptor> descriptor;
    for (std::size_t i = static_cast<std::size_t>(fence_close) + 1; i < lines.size(); ++i) {
        if (auto d = detail::parse_descriptor_line(lines[i])) descriptor = d;
    }
    if (!descriptor) throw GenerationError("response missing DESCRIPTOR line");

    GenerationResponse resp;
    resp.plan = std::move(plan);
    resp.code = std::move(code);
    resp.descriptor = *descriptor;
    resp.raw = raw;
    return resp;
}

/// One logical candidate generation: complete + parse.
inline GenerationResponse generate(Generator& gen, const GenerationRequest& request) {
    return parse_generation_response(gen.complete(request));
}

/// Deterministic mock that replays numbered response files
/// (response_000.txt, response_001.txt, ...) from a fixture directory.
class FixtureGenerator : public Generator {
  public:
    explicit FixtureGenerator(std::filesystem::path dir, int start_index = 0)
        : dir_(std::move(dir)), next_(start_index) {}

    std::string complete(const GenerationRequest&) override {
        int idx = next_.fetch_add(1);
        char name[32];
        std::snprintf(name, sizeof(name), "response_%03d.txt", idx);
        auto path = dir_ / name;
        if (!std::filesystem::exists(path)) throw GenerationError("fixture sequence exhausted at " + path.string());
        return read_file(path);
    }

    int calls_made() const { return next_.load(); }

  private:
    std::filesystem::path dir_;
    std::atomic<int> next_;
};

enum class CallCategory { Generation, Review, GlobalReasoning, PromptUpdate };

struct CallTotals {
    std::int64_t generation = 0;
    std::int64_t review = 0;
    std::int64_t global_reasoning = 0;
    std::int64_t prompt_update = 0;
    std::int64_t total() const { return generation + review + global_reasoning + prompt_update; }
};

/// Shared accounting of logical LLM calls (retries within one call count
/// once). Enforces the hard bound of 4 calls per budgeted iteration.
class CallLedger {
  public:
    explicit CallLedger(std::int64_t budget_T) : budget_(budget_T) {}

    void record(CallCategory c) {
        switch (c) {
            case CallCategory::Generation: generation_.fetch_add(1); break;
            case CallCategory::Review: review_.fetch_add(1); break;
            case CallCategory::GlobalReasoning: reasoning_.fetch_add(1); break;
            case CallCategory::PromptUpdate: update_.fetch_add(1); break;
        }
        if (totals().total() > 4 * budget_)
            throw LedgerViolation("LLM call count exceeds 4*T = " + std::to_string(4 * budget_));
    }

    CallTotals totals() const {
        return CallTotals{generation_.load(), review_.load(), reasoning_.load(), update_.load()};
    }

    void restore(const CallTotals& t) {
        generation_.store(t.generation);
        review_.store(t.review);
        reasoning_.store(t.global_reasoning);
        update_.store(t.prompt_update);
    }

    std::int64_t budget() const { return budget_; }

  private:
    std::int64_t budget_;
    std::atomic<std::int64_t> generation_{0};
    std::atomic<std::int64_t> review_{0};
    std::atomic<std::int64_t> reasoning_{0};
    std::atomic<std::int64_t> update_{0};
};

/// Per-category totals with the 4T bound asserted.
inline CallTotals count_calls(const CallLedger& ledger) {
    CallTotals t = ledger.totals();
    if (t.total() > 4 * ledger.budget())
        throw LedgerViolation("LLM call count exceeds 4*T = " + std::to_string(4 * ledger.budget()));
    return t;
}

} // namespace seats
