#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seats/util.hpp"

namespace seats {

using NodeId = int;

enum class MetricDirection { LowerBetter, HigherBetter };

inline std::string to_string(MetricDirection d) {
    return d == MetricDirection::LowerBetter ? "lower_better" : "higher_better";
}

inline MetricDirection direction_from_string(const std::string& s) {
    if (s == "lower_better") return MetricDirection::LowerBetter;
    if (s == "higher_better") return MetricDirection::HigherBetter;
    throw std::runtime_error("unknown metric direction: " + s);
}

/// True when `candidate` strictly improves on `incumbent` under `d`.
inline bool improves(double candidate, double incumbent, MetricDirection d) {
    return d == MetricDirection::LowerBetter ? candidate < incumbent : candidate > incumbent;
}

/// Phenotypic coordinates, each clamped to [0,1] at construction.
struct BehaviorDescriptor {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;

    BehaviorDescriptor() = default;
    BehaviorDescriptor(double a, double b, double c) : d1(clamp01(a)), d2(clamp01(b)), d3(clamp01(c)) {}

    bool operator==(const BehaviorDescriptor&) const = default;
};

/// One vertex of the solution tree. `code` is immutable after creation;
/// only visits, value, buggy and analysis mutate.
struct SolutionNode {
    NodeId id = 0;
    std::optional<NodeId> parent_id;
    std::string code;
    std::string plan;
    std::optional<double> metric;
    int visits = 0;
    double value = 0.0;
    bool buggy = false;
    std::string analysis;
    BehaviorDescriptor descriptor;
    int created_at_iteration = 0;

    // bookkeeping, not part of the solution state
    std::vector<NodeId> children;
    bool rewarded = false; // set once this node's own reward has been backpropagated
};

} // namespace seats
