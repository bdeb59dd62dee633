#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seats/archive.hpp"
#include "seats/config.hpp"
#include "seats/errors.hpp"
#include "seats/review.hpp"
#include "seats/reward.hpp"
#include "seats/sandbox.hpp"
#include "seats/tree.hpp"

namespace seats {

// Append-only record of every state transition; replaying it
// reconstructs tree, metric history, archives, running prompt and
// extremes exactly. One JSON object per line, gap-free sequence.

inline const std::set<std::string>& journal_event_kinds() {
    static const std::set<std::string> kinds{
        "run_started",   "node_created",     "execution_finished", "review_finished", "reasoning_finished",
        "prompt_updated", "reward_assigned", "backprop_applied",   "archive_offer",   "migration",
        "extremes_updated", "iteration_failed", "run_finished"};
    return kinds;
}

struct JournalEvent {
    std::uint64_t sequence = 0;
    int iteration = 0;
    std::string kind;
    json payload;
};

inline json event_to_json(const JournalEvent& e) {
    return json{{"iteration", e.iteration}, {"kind", e.kind}, {"payload", e.payload}, {"sequence", e.sequence}};
}

inline std::string serialize_event(const JournalEvent& e) { return event_to_json(e).dump(); }

class JournalWriter {
  public:
    JournalWriter(const std::filesystem::path& path, std::uint64_t next_sequence = 1, bool append = false)
        : out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)), next_sequence_(next_sequence) {
        if (!out_) throw std::runtime_error("cannot open journal for writing: " + path.string());
    }

    std::uint64_t append(int iteration, const std::string& kind, json payload) {
        JournalEvent e{next_sequence_++, iteration, kind, std::move(payload)};
        out_ << serialize_event(e) << '\n';
        out_.flush();
        return e.sequence;
    }

    std::uint64_t next_sequence() const { return next_sequence_; }

  private:
    std::ofstream out_;
    std::uint64_t next_sequence_;
};

/// Full state reconstructed from a journal; also the live run state.
struct RunState {
    RunConfig config;
    Tree tree;
    MetricHistory history;
    IslandSet islands;
    ExtremesTracker extremes;
    RunningPrompt running;
    std::vector<std::string> running_bodies; // index == version; [0] is the empty v0
    std::map<NodeId, RewardRecord> rewards;
    CallTotals calls;
    int last_iteration = 0;
    int last_migration_iteration = 0;
    bool finished = false;

    explicit RunState(const RunConfig& cfg)
        : config(cfg),
          tree(cfg.max_children),
          history(cfg.direction),
          islands(cfg.islands, cfg.bins_per_dim, cfg.direction, cfg.migration_interval),
          extremes(cfg.direction),
          running{0, "", static_cast<std::size_t>(cfg.running_prompt_max_chars)},
          running_bodies{""} {}

    int island_of(NodeId id) const { return static_cast<int>(id) % config.islands; }
};

namespace detail {

struct EventChecker {
    const JournalEvent& e;

    [[noreturn]] void fail(const std::string& msg) const { throw ReplayError(e.sequence, msg); }

    const json& field(const char* name) const {
        if (!e.payload.contains(name)) fail(std::string("payload missing field '") + name + "'");
        return e.payload.at(name);
    }

    double number(const char* name) const {
        const json& f = field(name);
        if (!f.is_number()) fail(std::string("field '") + name + "' is not a number");
        return f.get<double>();
    }

    int integer(const char* name) const {
        const json& f = field(name);
        if (!f.is_number_integer()) fail(std::string("field '") + name + "' is not an integer");
        return f.get<int>();
    }

    bool boolean(const char* name) const {
        const json& f = field(name);
        if (!f.is_boolean()) fail(std::string("field '") + name + "' is not a boolean");
        return f.get<bool>();
    }

    std::string text(const char* name) const {
        const json& f = field(name);
        if (!f.is_string()) fail(std::string("field '") + name + "' is not a string");
        return f.get<std::string>();
    }
};

} // namespace detail

/// Applies one journal event to the state, validating references and
/// journaled outcomes against recomputation. Throws ReplayError naming
/// the offending sequence.
inline void apply_event(RunState& st, const JournalEvent& e) {
    detail::EventChecker c{e};
    if (st.finished) c.fail("event after run_finished");
    if (!journal_event_kinds().count(e.kind)) c.fail("unknown event kind '" + e.kind + "'");
    st.last_iteration = std::max(st.last_iteration, e.iteration);

    auto node_ref = [&](NodeId id) -> SolutionNode& {
        if (id < 0 || id >= static_cast<NodeId>(st.tree.size())) c.fail("unknown node " + std::to_string(id));
        return st.tree.node(id);
    };

    if (e.kind == "run_started") {
        c.fail("duplicate run_started");
    } else if (e.kind == "node_created") {
        NodeId id = c.integer("node_id");
        if (id != st.tree.next_id()) c.fail("node id out of order");
        std::optional<NodeId> parent;
        if (!c.field("parent_id").is_null()) parent = c.integer("parent_id");
        const json& d = c.field("descriptor");
        if (!d.is_array() || d.size() != 3) c.fail("descriptor must be a 3-array");
        BehaviorDescriptor desc(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
        try {
            st.tree.create_node(parent, c.text("code"), c.text("plan"), desc, e.iteration);
        } catch (const InvariantViolation& iv) {
            c.fail(iv.what());
        }
        if (c.integer("island") != st.island_of(id)) c.fail("island does not match round-robin assignment");
        if (parent) st.calls.generation += 1;
    } else if (e.kind == "execution_finished") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        ExecutionStatus status;
        try {
            status = execution_status_from_string(c.text("status"));
        } catch (const std::exception& ex) {
            c.fail(ex.what());
        }
        ExecutionResult r;
        r.status = status;
        r.stdout_tail = c.text("stdout_tail");
        r.stderr_tail = c.text("stderr_tail");
        if (!c.field("exit_code").is_null()) r.exit_code = c.integer("exit_code");
        if (status == ExecutionStatus::Ok) {
            r.metric = c.number("metric");
            n.metric = r.metric;
            // strict mode defers generated nodes to their review; the root
            // has no review and enters the history here
            if (!st.config.exclude_flagged_metrics || n.id == 0) st.history.record(*r.metric);
        } else if (!c.field("metric").is_null()) {
            c.fail("metric present on a non-ok execution");
        }
        n.buggy = status != ExecutionStatus::Ok;
        n.analysis = make_execution_summary(r);
    } else if (e.kind == "review_finished") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        st.calls.review += 1;
        bool flagged = c.boolean("has_logical_error");
        if (flagged) n.buggy = true;
        if (st.config.exclude_flagged_metrics && !flagged) {
            if (!n.metric) c.fail("review of a node without metric");
            st.history.record(*n.metric);
        }
    } else if (e.kind == "reasoning_finished") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        if (!c.boolean("skipped")) st.calls.global_reasoning += 1;
        std::string insight = c.text("insight");
        if (!insight.empty()) n.analysis += "Global insight: " + insight + "\n";
    } else if (e.kind == "prompt_updated") {
        node_ref(c.integer("node_id"));
        st.calls.prompt_update += 1;
        if (c.boolean("ok")) {
            int version = c.integer("version");
            if (version != st.running.version + 1) c.fail("running prompt version not incremented by 1");
            std::string body = c.text("body");
            if (body.size() > st.running.max_chars) c.fail("running prompt body exceeds max_chars");
            st.running.version = version;
            st.running.body = body;
            st.running_bodies.push_back(body);
        }
    } else if (e.kind == "reward_assigned") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        RewardRecord rec;
        rec.node_id = n.id;
        if (!c.field("metric").is_null()) rec.metric = c.number("metric");
        rec.advantage = c.number("advantage");
        rec.reward = c.number("reward");
        rec.buggy = c.boolean("buggy");
        rec.history_size_at_eval = c.integer("history_size_at_eval");
        if (rec.buggy != n.buggy) c.fail("reward buggy flag disagrees with node state");
        if (st.rewards.count(n.id)) c.fail("duplicate reward for node " + std::to_string(n.id));
        st.rewards[n.id] = rec;
    } else if (e.kind == "backprop_applied") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        auto it = st.rewards.find(n.id);
        if (it == st.rewards.end()) c.fail("backprop before reward_assigned");
        double r = c.number("reward");
        if (r != it->second.reward) c.fail("backprop reward disagrees with reward record");
        std::vector<NodeId> path;
        try {
            path = st.tree.backpropagate(n.id, r);
        } catch (const InvariantViolation& iv) {
            c.fail(iv.what());
        }
        const json& jp = c.field("path");
        if (!jp.is_array() || jp.size() != path.size()) c.fail("backprop path mismatch");
        for (std::size_t i = 0; i < path.size(); ++i)
            if (jp[i].get<NodeId>() != path[i]) c.fail("backprop path mismatch");
        // extremes update follows backprop in the live loop
        st.extremes.update(n.id, n.metric, n.buggy);
    } else if (e.kind == "extremes_updated") {
        auto check = [&](const char* key, std::optional<NodeId> actual) {
            const json& f = c.field(key);
            if (f.is_null() != !actual) c.fail(std::string("extremes field '") + key + "' disagrees with recomputation");
            if (!f.is_null() && f.get<NodeId>() != *actual) c.fail(std::string("extremes field '") + key + "' disagrees with recomputation");
        };
        check("best_id", st.extremes.best_id());
        check("worst_id", st.extremes.worst_id());
    } else if (e.kind == "archive_offer") {
        SolutionNode& n = node_ref(c.integer("node_id"));
        if (n.buggy) c.fail("archive offer from a buggy node");
        if (!n.metric) c.fail("archive offer without metric");
        int island = c.integer("island");
        if (island != st.island_of(n.id)) c.fail("archive offer island mismatch");
        Cell cell = descriptor_to_cell(n.descriptor, st.config.bins_per_dim);
        const json& jc = c.field("cell");
        if (!jc.is_array() || jc.size() != 3) c.fail("cell must be a 3-array");
        for (int i = 0; i < 3; ++i)
            if (jc[static_cast<std::size_t>(i)].get<int>() != cell[static_cast<std::size_t>(i)]) c.fail("archive cell mismatch");
        bool accepted = st.islands.island(island).try_insert(n.id, *n.metric, n.descriptor);
        if (accepted != c.boolean("accepted")) c.fail("archive acceptance disagrees with recomputation");
    } else if (e.kind == "migration") {
        if (!st.islands.is_migration_iteration(e.iteration)) c.fail("migration at a non-interval iteration");
        st.last_migration_iteration = std::max(st.last_migration_iteration, e.iteration);
        const json& offers = c.field("offers");
        if (!offers.is_array()) c.fail("offers must be an array");
        for (const auto& o : offers) {
            JournalEvent sub{e.sequence, e.iteration, "migration_offer", o};
            detail::EventChecker oc{sub};
            int to = oc.integer("to_island");
            if (to < 0 || to >= st.islands.count()) oc.fail("migration to unknown island");
            const json& d = oc.field("descriptor");
            BehaviorDescriptor desc(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
            bool accepted = st.islands.island(to).try_insert(oc.integer("node_id"), oc.number("metric"), desc);
            if (accepted != oc.boolean("accepted")) oc.fail("migration acceptance disagrees with recomputation");
        }
    } else if (e.kind == "iteration_failed") {
        c.text("reason");
        st.calls.generation += 1;
    } else if (e.kind == "run_finished") {
        const json& calls = c.field("calls");
        if (calls.value("generation", -1) != st.calls.generation ||
            calls.value("review", -1) != st.calls.review ||
            calls.value("global_reasoning", -1) != st.calls.global_reasoning ||
            calls.value("prompt_update", -1) != st.calls.prompt_update)
            c.fail("final call totals disagree with recomputation");
        const json& best = c.field("best_node_id");
        if (best.is_null() != !st.extremes.best_id()) c.fail("final best disagrees with recomputation");
        if (!best.is_null() && best.get<NodeId>() != *st.extremes.best_id())
            c.fail("final best disagrees with recomputation");
        st.finished = true;
    }
}

struct ReplayResult {
    RunState state;
    std::vector<JournalEvent> events;
};

/// Reads and validates a journal, reconstructing the run state. Refuses
/// with the first offending sequence number on any violation.
inline ReplayResult replay_journal(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReplayError(0, "cannot open journal: " + path.string());

    std::vector<JournalEvent> events;
    std::string line;
    std::uint64_t expected_seq = 1;
    while (std::getline(in, line)) {
        if (line.empty()) throw ReplayError(expected_seq, "empty journal line");
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            throw ReplayError(expected_seq, "malformed JSON");
        }
        JournalEvent e;
        try {
            e.sequence = j.at("sequence").get<std::uint64_t>();
            e.iteration = j.at("iteration").get<int>();
            e.kind = j.at("kind").get<std::string>();
            e.payload = j.at("payload");
        } catch (const json::exception&) {
            throw ReplayError(expected_seq, "event missing required fields");
        }
        if (e.sequence != expected_seq) throw ReplayError(expected_seq, "sequence gap or reorder");
        events.push_back(std::move(e));
        ++expected_seq;
    }
    if (events.empty()) throw ReplayError(0, "journal is empty");
    if (events.front().kind != "run_started") throw ReplayError(1, "first event must be run_started");

    RunConfig cfg;
    try {
        cfg = config_from_json(events.front().payload.at("config"));
        if (cfg.run_dir.empty())
            cfg.run_dir = path.parent_path().empty() ? "." : path.parent_path().string();
        validate_config(cfg);
    } catch (const ReplayError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ReplayError(1, std::string("bad embedded config: ") + ex.what());
    }

    ReplayResult result{RunState(cfg), {}};
    for (std::size_t i = 1; i < events.size(); ++i) apply_event(result.state, events[i]);
    result.events = std::move(events);
    return result;
}

/// Re-serialization of replayed events; byte-identical to the journal.
inline std::string reserialize(const std::vector<JournalEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += serialize_event(e);
        out += '\n';
    }
    return out;
}

} // namespace seats
