#pragma once

#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "seats/runner.hpp"

namespace seats {

struct CompareRow {
    std::int64_t seed = 0;
    std::optional<double> advantage_best;
    std::optional<double> fixed_best;
};

struct CompareResult {
    std::string landscape;
    int budget = 0;
    std::vector<CompareRow> rows;
    int wins = 0; // metric-advantage strictly better
    int ties = 0;
    double win_rate = 0.0;     // ties count one half
    double leq_fraction = 0.0; // advantage <= fixed
};

inline RunConfig make_landscape_config(const std::string& landscape, int budget, std::int64_t seed,
                                       const std::string& reward_policy, const std::filesystem::path& run_dir) {
    RunConfig cfg;
    cfg.budget_T = budget;
    cfg.seed = seed;
    cfg.workers = 1;
    cfg.direction = MetricDirection::LowerBetter;
    cfg.timeout_seconds = 60.0;
    cfg.generator.kind = "landscape";
    cfg.generator.landscape = landscape;
    cfg.reward_policy = reward_policy;
    cfg.run_dir = run_dir.string();
    return cfg;
}

/// Paired-seed comparison of the metric-advantage reward against the
/// fixed +1/-1 baseline on one landscape. A missing best (all-buggy run)
/// counts as worst possible.
inline CompareResult compare_policies(const std::string& landscape, int runs, int budget, std::int64_t base_seed,
                                      const std::filesystem::path& workdir,
                                      const std::string& policy_a = "metric_advantage",
                                      const std::string& policy_b = "fixed") {
    CompareResult res;
    res.landscape = landscape;
    res.budget = budget;
    for (int i = 0; i < runs; ++i) {
        std::int64_t seed = base_seed + i;
        CompareRow row;
        row.seed = seed;
        BestReport a = run_new(make_landscape_config(landscape, budget, seed, policy_a,
                                                     workdir / ("seed" + std::to_string(seed) + "_a")));
        BestReport f = run_new(make_landscape_config(landscape, budget, seed, policy_b,
                                                     workdir / ("seed" + std::to_string(seed) + "_b")));
        row.advantage_best = a.best_metric;
        row.fixed_best = f.best_metric;
        res.rows.push_back(row);

        double inf = std::numeric_limits<double>::infinity();
        double am = a.best_metric.value_or(inf);
        double fm = f.best_metric.value_or(inf);
        if (am < fm) ++res.wins;
        if (am == fm) ++res.ties;
    }
    if (!res.rows.empty()) {
        res.win_rate = (res.wins + 0.5 * res.ties) / static_cast<double>(res.rows.size());
        res.leq_fraction = static_cast<double>(res.wins + res.ties) / static_cast<double>(res.rows.size());
    }
    return res;
}

/// Delimited table for the CLI.
inline std::string render_compare_table(const CompareResult& r) {
    std::ostringstream out;
    out << "seed\tadvantage_best\tfixed_best\twinner\n";
    for (const auto& row : r.rows) {
        double inf = std::numeric_limits<double>::infinity();
        double am = row.advantage_best.value_or(inf);
        double fm = row.fixed_best.value_or(inf);
        const char* winner = am < fm ? "advantage" : (fm < am ? "fixed" : "tie");
        out << row.seed << "\t" << (row.advantage_best ? format_double(*row.advantage_best) : "none") << "\t"
            << (row.fixed_best ? format_double(*row.fixed_best) : "none") << "\t" << winner << "\n";
    }
    out << "# landscape=" << r.landscape << " budget=" << r.budget << " runs=" << r.rows.size() << "\n";
    out << "# wins=" << r.wins << " ties=" << r.ties << " win_rate=" << format_double(r.win_rate)
        << " leq_fraction=" << format_double(r.leq_fraction) << "\n";
    return out.str();
}

} // namespace seats
