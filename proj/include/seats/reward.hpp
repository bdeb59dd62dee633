#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "seats/errors.hpp"
#include "seats/types.hpp"

namespace seats {

/// Append-only record of observed metrics; source of the mean and
/// population standard deviation used for advantage standardization.
class MetricHistory {
  public:
    explicit MetricHistory(MetricDirection direction, double epsilon = 1e-9)
        : direction_(direction), epsilon_(epsilon) {}

    MetricDirection direction() const { return direction_; }
    double epsilon() const { return epsilon_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

    void record(double m) {
        if (!std::isfinite(m)) throw InvariantViolation("metric history: non-finite metric");
        values_.push_back(m);
        stats_valid_ = false;
    }

    double mean() const {
        refresh();
        return mean_;
    }

    /// Population standard deviation (well-defined from n = 1).
    double stddev() const {
        refresh();
        return stddev_;
    }

    /// Standardized z-score of `m` against the recorded history. By the
    /// loop's phase ordering, `m` has already been recorded when this is
    /// called for a new node. Degenerate histories (fewer than two entries
    /// or stddev below epsilon) yield a neutral 0.
    double advantage(double m) const {
        if (!std::isfinite(m)) throw InvariantViolation("advantage: non-finite metric");
        if (values_.size() < 2) return 0.0;
        refresh();
        if (stddev_ < epsilon_) return 0.0;
        return direction_ == MetricDirection::LowerBetter ? (mean_ - m) / stddev_ : (m - mean_) / stddev_;
    }

  private:
    void refresh() const {
        if (stats_valid_) return;
        const std::size_t n = values_.size();
        if (n == 0) {
            mean_ = 0.0;
            stddev_ = 0.0;
        } else {
            double sum = 0.0;
            for (double v : values_) sum += v;
            mean_ = sum / static_cast<double>(n);
            double sq = 0.0;
            for (double v : values_) sq += (v - mean_) * (v - mean_);
            stddev_ = std::sqrt(sq / static_cast<double>(n));
        }
        stats_valid_ = true;
    }

    std::vector<double> values_;
    MetricDirection direction_;
    double epsilon_;
    mutable bool stats_valid_ = false;
    mutable double mean_ = 0.0;
    mutable double stddev_ = 0.0;
};

/// Review-gated reward: flagged or crashed nodes earn -1, clean nodes
/// earn their advantage.
inline double reward(double advantage, bool buggy) {
    if (!std::isfinite(advantage)) throw InvariantViolation("reward: non-finite advantage");
    return buggy ? -1.0 : advantage;
}

/// Everything the reward chain decided for one node, as journaled.
struct RewardRecord {
    NodeId node_id = 0;
    std::optional<double> metric;
    double advantage = 0.0;
    double reward = 0.0;
    bool buggy = false;
    int history_size_at_eval = 0;
};

} // namespace seats
