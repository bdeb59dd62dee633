#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace seats {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct TemplateError : std::runtime_error {
    explicit TemplateError(const std::string& placeholder)
        : std::runtime_error("missing required placeholder: " + placeholder), placeholder(placeholder) {}
    std::string placeholder;
};

struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg) : std::runtime_error("generation error: " + msg) {}
};

struct SandboxError : std::runtime_error {
    explicit SandboxError(const std::string& msg) : std::runtime_error("sandbox error: " + msg) {}
};

/// Candidate emitted both a metric line and a metrics file that disagree.
struct MetricConflictError : std::runtime_error {
    MetricConflictError(double line_value, double file_value)
        : std::runtime_error("metric parse conflict between stdout line and metrics.json"),
          line_value(line_value), file_value(file_value) {}
    double line_value;
    double file_value;
};

/// Journal replay refusal; `sequence` names the first offending event.
struct ReplayError : std::runtime_error {
    ReplayError(std::uint64_t sequence, const std::string& msg)
        : std::runtime_error("replay refused at sequence " + std::to_string(sequence) + ": " + msg),
          sequence(sequence) {}
    std::uint64_t sequence;
};

struct LedgerViolation : std::logic_error {
    explicit LedgerViolation(const std::string& msg) : std::logic_error("call ledger violation: " + msg) {}
};

struct InvariantViolation : std::logic_error {
    explicit InvariantViolation(const std::string& msg) : std::logic_error("invariant violation: " + msg) {}
};

} // namespace seats
