#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seats/journal.hpp"

namespace seats {

struct TrajectoryRow {
    int iteration = 0;
    std::optional<NodeId> node_id;
    std::optional<double> metric;
    std::optional<double> best_so_far; // over non-buggy nodes
};

struct RunSummary {
    RunConfig config;
    std::vector<TrajectoryRow> trajectory;
    std::vector<RewardRecord> records; // per-node M/A/R table, by node id
    int nodes_total = 0;
    int nodes_buggy = 0;
    int iterations_failed = 0;
    double buggy_rate = 0.0;
    std::vector<std::size_t> archive_occupancy; // per island
    CallTotals calls;
    std::int64_t call_bound = 0;
    int running_prompt_versions = 0;
    std::optional<NodeId> best_id;
    std::optional<double> best_metric;
    bool finished = false;
    int last_iteration = 0;
};

/// Builds the run summary from a replayed journal.
inline RunSummary summarize(const ReplayResult& rr) {
    const RunState& st = rr.state;
    RunSummary s;
    s.config = st.config;
    s.nodes_total = static_cast<int>(st.tree.size());
    s.calls = st.calls;
    s.call_bound = 4 * static_cast<std::int64_t>(st.config.budget_T);
    s.running_prompt_versions = st.running.version;
    s.best_id = st.extremes.best_id();
    if (s.best_id) s.best_metric = st.extremes.best_metric();
    s.finished = st.finished;
    s.last_iteration = st.last_iteration;

    for (const auto& n : st.tree.nodes())
        if (n.buggy) ++s.nodes_buggy;
    s.buggy_rate = s.nodes_total > 0 ? static_cast<double>(s.nodes_buggy) / s.nodes_total : 0.0;

    for (const auto& e : rr.events)
        if (e.kind == "iteration_failed") ++s.iterations_failed;

    for (int i = 0; i < st.islands.count(); ++i) s.archive_occupancy.push_back(st.islands.island(i).occupied_cells());

    for (const auto& [id, rec] : st.rewards) s.records.push_back(rec);
    std::sort(s.records.begin(), s.records.end(),
              [](const RewardRecord& a, const RewardRecord& b) { return a.node_id < b.node_id; });

    // best-so-far trajectory over iterations, non-buggy nodes only
    std::map<int, NodeId> node_at_iteration;
    for (const auto& n : st.tree.nodes()) node_at_iteration[n.created_at_iteration] = n.id;
    std::optional<double> best;
    for (int t = 0; t <= st.last_iteration; ++t) {
        TrajectoryRow row;
        row.iteration = t;
        auto it = node_at_iteration.find(t);
        if (it != node_at_iteration.end()) {
            const SolutionNode& n = st.tree.node(it->second);
            row.node_id = n.id;
            row.metric = n.metric;
            if (!n.buggy && n.metric && (!best || improves(*n.metric, *best, st.config.direction))) best = *n.metric;
        }
        row.best_so_far = best;
        s.trajectory.push_back(row);
    }
    return s;
}

inline json summary_to_json(const RunSummary& s) {
    json j;
    j["nodes_total"] = s.nodes_total;
    j["nodes_buggy"] = s.nodes_buggy;
    j["buggy_rate"] = s.buggy_rate;
    j["iterations_failed"] = s.iterations_failed;
    j["last_iteration"] = s.last_iteration;
    j["finished"] = s.finished;
    j["best_node_id"] = s.best_id ? json(*s.best_id) : json(nullptr);
    j["best_metric"] = s.best_metric ? json(*s.best_metric) : json(nullptr);
    j["calls"] = {{"generation", s.calls.generation},
                  {"review", s.calls.review},
                  {"global_reasoning", s.calls.global_reasoning},
                  {"prompt_update", s.calls.prompt_update},
                  {"total", s.calls.total()},
                  {"bound", s.call_bound}};
    j["running_prompt_versions"] = s.running_prompt_versions;
    j["archive_occupancy"] = s.archive_occupancy;
    json recs = json::array();
    for (const auto& r : s.records)
        recs.push_back({{"node_id", r.node_id},
                        {"metric", r.metric ? json(*r.metric) : json(nullptr)},
                        {"advantage", r.advantage},
                        {"reward", r.reward},
                        {"buggy", r.buggy},
                        {"history_size_at_eval", r.history_size_at_eval}});
    j["records"] = recs;
    json traj = json::array();
    for (const auto& row : s.trajectory)
        traj.push_back({{"iteration", row.iteration},
                        {"node_id", row.node_id ? json(*row.node_id) : json(nullptr)},
                        {"metric", row.metric ? json(*row.metric) : json(nullptr)},
                        {"best_so_far", row.best_so_far ? json(*row.best_so_far) : json(nullptr)}});
    j["trajectory"] = traj;
    return j;
}

inline std::string render_summary_text(const RunSummary& s) {
    std::ostringstream out;
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };
    out << "run summary\n";
    out << "  iterations: " << s.last_iteration << (s.finished ? " (finished)" : " (in progress)") << "\n";
    out << "  nodes: " << s.nodes_total << " (" << s.nodes_buggy << " buggy, rate " << std::fixed
        << std::setprecision(3) << s.buggy_rate << ")\n";
    out << "  failed iterations: " << s.iterations_failed << "\n";
    out << "  N*: " << (s.best_id ? "node " + std::to_string(*s.best_id) + ", metric " + opt(s.best_metric) : "none")
        << "\n";
    out << "  LLM calls: " << s.calls.total() << " <= " << s.call_bound << " (generation " << s.calls.generation
        << ", review " << s.calls.review << ", reasoning " << s.calls.global_reasoning << ", prompt_update "
        << s.calls.prompt_update << ")\n";
    out << "  running prompt versions: " << s.running_prompt_versions << "\n";
    out << "  archive occupancy:";
    for (std::size_t i = 0; i < s.archive_occupancy.size(); ++i)
        out << " island" << i << "=" << s.archive_occupancy[i];
    out << "\n\n";

    out << "node table (M/A/R)\n";
    out << "  id  metric        advantage     reward        buggy  |hist|\n";
    for (const auto& r : s.records) {
        out << "  " << std::left << std::setw(4) << r.node_id << std::setw(14)
            << (r.metric ? format_double(*r.metric) : "n/a") << std::setw(14) << format_double(r.advantage)
            << std::setw(14) << format_double(r.reward) << std::setw(7) << (r.buggy ? "true" : "false")
            << r.history_size_at_eval << "\n";
    }
    out << "\nbest-so-far trajectory\n";
    out << "  iter  node  metric        best_so_far\n";
    for (const auto& row : s.trajectory) {
        out << "  " << std::left << std::setw(6) << row.iteration << std::setw(6)
            << (row.node_id ? std::to_string(*row.node_id) : "-") << std::setw(14)
            << (row.metric ? format_double(*row.metric) : "-") << (row.best_so_far ? format_double(*row.best_so_far) : "-")
            << "\n";
    }
    return out.str();
}

inline std::string render_archive_text(const RunState& st) {
    std::ostringstream out;
    out << "archive occupancy (" << st.islands.count() << " islands, " << st.config.bins_per_dim
        << "^3 cells each)\n";
    for (int i = 0; i < st.islands.count(); ++i) {
        const Archive& a = st.islands.island(i);
        out << "island " << i << ": " << a.occupied_cells() << " occupied\n";
        for (const auto& [cell, elite] : a.cells()) {
            out << "  (" << cell[0] << "," << cell[1] << "," << cell[2] << ")  node " << std::left << std::setw(6)
                << elite.node_id << " metric " << format_double(elite.metric) << "\n";
        }
    }
    return out.str();
}

/// Journal-level audit of the call-budget rules: totals within 4T,
/// runtime-failed nodes consume exactly the generation call, ok nodes at
/// most four calls, and review/reasoning/update appear only for
/// ok-executed nodes. Throws LedgerViolation on any breach.
inline CallTotals verify_call_attribution(const ReplayResult& rr) {
    struct PerNode {
        bool executed_ok = false;
        bool seen_execution = false;
        int review = 0, reasoning = 0, update = 0;
    };
    std::map<NodeId, PerNode> per_node;
    CallTotals totals;
    for (const auto& e : rr.events) {
        if (e.kind == "node_created" && !e.payload.at("parent_id").is_null()) totals.generation += 1;
        if (e.kind == "iteration_failed") totals.generation += 1;
        if (e.kind == "execution_finished") {
            auto& pn = per_node[e.payload.at("node_id").get<NodeId>()];
            pn.seen_execution = true;
            pn.executed_ok = e.payload.at("status").get<std::string>() == "ok";
        }
        if (e.kind == "review_finished") {
            per_node[e.payload.at("node_id").get<NodeId>()].review += 1;
            totals.review += 1;
        }
        if (e.kind == "reasoning_finished" && !e.payload.at("skipped").get<bool>()) {
            per_node[e.payload.at("node_id").get<NodeId>()].reasoning += 1;
            totals.global_reasoning += 1;
        }
        if (e.kind == "prompt_updated") {
            per_node[e.payload.at("node_id").get<NodeId>()].update += 1;
            totals.prompt_update += 1;
        }
    }
    std::int64_t bound = 4 * static_cast<std::int64_t>(rr.state.config.budget_T);
    if (totals.total() > bound) throw LedgerViolation("journal call total exceeds 4T");
    for (const auto& [id, pn] : per_node) {
        if (!pn.seen_execution && (pn.review || pn.reasoning || pn.update))
            throw LedgerViolation("node " + std::to_string(id) + " has gate calls without execution");
        if (!pn.executed_ok && (pn.review || pn.reasoning || pn.update))
            throw LedgerViolation("node " + std::to_string(id) + " has gate calls despite runtime failure");
        if (pn.review > 1 || pn.reasoning > 1 || pn.update > 1)
            throw LedgerViolation("node " + std::to_string(id) + " has duplicated gate calls");
        if (id != 0 && pn.executed_ok && (pn.review != 1 || pn.update != 1))
            throw LedgerViolation("node " + std::to_string(id) + " missing review or prompt-update attempt");
    }
    return totals;
}

} // namespace seats
