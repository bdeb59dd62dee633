#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "seats/errors.hpp"
#include "seats/types.hpp"

namespace seats {

using Cell = std::array<int, 3>;

/// Maps a descriptor to its grid cell. Components at exactly 1.0 fall
/// into the last bin.
inline Cell descriptor_to_cell(const BehaviorDescriptor& d, int bins_per_dim) {
    if (bins_per_dim < 1) throw InvariantViolation("archive: bins_per_dim must be positive");
    auto bin = [bins_per_dim](double x) {
        int b = static_cast<int>(std::floor(x * bins_per_dim));
        if (b >= bins_per_dim) b = bins_per_dim - 1;
        if (b < 0) b = 0;
        return b;
    };
    return {bin(d.d1), bin(d.d2), bin(d.d3)};
}

struct EliteRecord {
    NodeId node_id = 0;
    double metric = 0.0;
    BehaviorDescriptor descriptor;
};

/// One quality-diversity grid: at most one elite per cell, replaced only
/// on strict metric improvement (ties keep the incumbent, so replays are
/// stable).
class Archive {
  public:
    Archive(int bins_per_dim, MetricDirection direction) : bins_per_dim_(bins_per_dim), direction_(direction) {
        if (bins_per_dim_ < 1) throw InvariantViolation("archive: bins_per_dim must be positive");
    }

    int bins_per_dim() const { return bins_per_dim_; }
    MetricDirection direction() const { return direction_; }
    std::size_t occupied_cells() const { return cells_.size(); }
    const std::map<Cell, EliteRecord>& cells() const { return cells_; }

    std::optional<EliteRecord> elite_at(const Cell& cell) const {
        auto it = cells_.find(cell);
        if (it == cells_.end()) return std::nullopt;
        return it->second;
    }

    /// Offers a non-buggy node to the cell of its descriptor. Returns true
    /// when it became the cell's elite.
    bool try_insert(NodeId node_id, double metric, const BehaviorDescriptor& d) {
        if (!std::isfinite(metric)) throw InvariantViolation("archive: non-finite metric offered");
        Cell cell = descriptor_to_cell(d, bins_per_dim_);
        auto it = cells_.find(cell);
        if (it == cells_.end()) {
            cells_.emplace(cell, EliteRecord{node_id, metric, d});
            return true;
        }
        if (improves(metric, it->second.metric, direction_)) {
            it->second = EliteRecord{node_id, metric, d};
            return true;
        }
        return false;
    }

    /// Best elite across all occupied cells (ties resolved by cell order,
    /// which is deterministic).
    std::optional<EliteRecord> best_elite() const {
        std::optional<EliteRecord> best;
        for (const auto& [cell, elite] : cells_) {
            if (!best || improves(elite.metric, best->metric, direction_)) best = elite;
        }
        return best;
    }

    /// Uniform sample without replacement over occupied cells, excluding
    /// `exclude_cell`. Returns min(k, available) elites; deterministic for
    /// a given rng state.
    std::vector<EliteRecord> sample_elites(int k, std::mt19937_64& rng,
                                           std::optional<Cell> exclude_cell = std::nullopt) const {
        std::vector<const EliteRecord*> pool;
        pool.reserve(cells_.size());
        for (const auto& [cell, elite] : cells_) {
            if (exclude_cell && cell == *exclude_cell) continue;
            pool.push_back(&elite);
        }
        std::vector<EliteRecord> out;
        int want = std::min<int>(k, static_cast<int>(pool.size()));
        for (int i = 0; i < want; ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::size_t j = pick(rng);
            out.push_back(*pool[j]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
        }
        return out;
    }

  private:
    int bins_per_dim_;
    MetricDirection direction_;
    std::map<Cell, EliteRecord> cells_;
};

struct MigrationOffer {
    int from_island = 0;
    int to_island = 0;
    NodeId node_id = 0;
    double metric = 0.0;
    BehaviorDescriptor descriptor;
    bool accepted = false;
};

/// Ring of archives evolving in parallel; every `migration_interval`
/// iterations each island's best elite is offered to its successor.
class IslandSet {
  public:
    IslandSet(int islands, int bins_per_dim, MetricDirection direction, int migration_interval)
        : migration_interval_(migration_interval) {
        if (islands < 1) throw InvariantViolation("islands: need at least one island");
        if (migration_interval_ < 1) throw InvariantViolation("islands: migration_interval must be positive");
        for (int i = 0; i < islands; ++i) islands_.emplace_back(bins_per_dim, direction);
    }

    int count() const { return static_cast<int>(islands_.size()); }
    int migration_interval() const { return migration_interval_; }
    Archive& island(int i) { return islands_.at(static_cast<std::size_t>(i)); }
    const Archive& island(int i) const { return islands_.at(static_cast<std::size_t>(i)); }

    bool is_migration_iteration(int iteration) const {
        return iteration > 0 && iteration % migration_interval_ == 0;
    }

    /// Offers a snapshot of every island's best elite to its ring
    /// successor. Call only on migration iterations; no-op on a
    /// single-island set or when every island is empty.
    std::vector<MigrationOffer> migrate() {
        std::vector<MigrationOffer> offers;
        const int n = count();
        if (n < 2) return offers;
        std::vector<std::optional<EliteRecord>> bests;
        bests.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) bests.push_back(islands_[static_cast<std::size_t>(i)].best_elite());
        for (int i = 0; i < n; ++i) {
            if (!bests[static_cast<std::size_t>(i)]) continue;
            const EliteRecord& e = *bests[static_cast<std::size_t>(i)];
            int to = (i + 1) % n;
            bool accepted = islands_[static_cast<std::size_t>(to)].try_insert(e.node_id, e.metric, e.descriptor);
            offers.push_back(MigrationOffer{i, to, e.node_id, e.metric, e.descriptor, accepted});
        }
        return offers;
    }

  private:
    std::vector<Archive> islands_;
    int migration_interval_;
};

} // namespace seats
