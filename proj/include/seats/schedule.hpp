#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seats {

enum class ScheduleKind { Fixed, Linear, Exponential, Piecewise };

inline std::string to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Fixed: return "fixed";
        case ScheduleKind::Linear: return "linear";
        case ScheduleKind::Exponential: return "exponential";
        case ScheduleKind::Piecewise: return "piecewise";
    }
    return "fixed";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "fixed") return ScheduleKind::Fixed;
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "exponential") return ScheduleKind::Exponential;
    if (s == "piecewise") return ScheduleKind::Piecewise;
    throw std::runtime_error("unknown schedule kind: " + s);
}

/// Exploration-constant schedule over the iteration counter t (0-based).
/// Validated at construction; value(t) never drops below c_min.
class ExplorationSchedule {
  public:
    struct Breakpoint {
        int iteration = 0;
        double value = 0.0;
        bool operator==(const Breakpoint&) const = default;
    };

    static ExplorationSchedule fixed(double c0) { return ExplorationSchedule(ScheduleKind::Fixed, c0, 0.0, 0.0, 1.0, {}); }

    static ExplorationSchedule linear(double c0, double alpha, double c_min) {
        return ExplorationSchedule(ScheduleKind::Linear, c0, c_min, alpha, 1.0, {});
    }

    static ExplorationSchedule exponential(double c0, double gamma, double c_min) {
        return ExplorationSchedule(ScheduleKind::Exponential, c0, c_min, 0.0, gamma, {});
    }

    static ExplorationSchedule piecewise(double c0, std::vector<Breakpoint> breakpoints, double c_min = 0.0) {
        return ExplorationSchedule(ScheduleKind::Piecewise, c0, c_min, 0.0, 1.0, std::move(breakpoints));
    }

    ExplorationSchedule() : ExplorationSchedule(ScheduleKind::Fixed, std::sqrt(2.0), 0.0, 0.0, 1.0, {}) {}

    ExplorationSchedule(ScheduleKind kind, double c0, double c_min, double alpha, double gamma,
                        std::vector<Breakpoint> breakpoints)
        : kind_(kind), c0_(c0), c_min_(c_min), alpha_(alpha), gamma_(gamma), breakpoints_(std::move(breakpoints)) {
        if (!(c0_ > 0.0)) throw std::runtime_error("schedule: c0 must be positive");
        if (c_min_ < 0.0) throw std::runtime_error("schedule: c_min must be nonnegative");
        if (kind_ == ScheduleKind::Linear && alpha_ < 0.0)
            throw std::runtime_error("schedule: linear decay rate must be nonnegative");
        if (kind_ == ScheduleKind::Exponential && !(gamma_ > 0.0 && gamma_ <= 1.0))
            throw std::runtime_error("schedule: gamma must be in (0,1]");
        if (kind_ == ScheduleKind::Piecewise) {
            for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
                if (breakpoints_[i].value < c_min_)
                    throw std::runtime_error("schedule: piecewise value below c_min");
                if (i > 0 && breakpoints_[i].iteration <= breakpoints_[i - 1].iteration)
                    throw std::runtime_error("schedule: piecewise breakpoints must be strictly increasing");
            }
        }
    }

    double value(int t) const {
        switch (kind_) {
            case ScheduleKind::Fixed:
                return std::max(c0_, c_min_);
            case ScheduleKind::Linear:
                return std::max(c0_ - alpha_ * t, c_min_);
            case ScheduleKind::Exponential:
                return std::max(c0_ * std::pow(gamma_, t), c_min_);
            case ScheduleKind::Piecewise: {
                // latest breakpoint with iteration <= t; c0 before the first one
                double v = c0_;
                for (const auto& bp : breakpoints_) {
                    if (bp.iteration <= t) v = bp.value;
                    else break;
                }
                return std::max(v, c_min_);
            }
        }
        return c0_;
    }

    ScheduleKind kind() const { return kind_; }
    double c0() const { return c0_; }
    double c_min() const { return c_min_; }
    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

    bool operator==(const ExplorationSchedule&) const = default;

  private:
    ScheduleKind kind_;
    double c0_;
    double c_min_;
    double alpha_;
    double gamma_;
    std::vector<Breakpoint> breakpoints_;
};

} // namespace seats
