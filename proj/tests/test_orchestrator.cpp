#include <catch2/catch.hpp>

#include <filesystem>
#include <map>

#include "seats/compare.hpp"
#include "seats/report.hpp"
#include "seats/runner.hpp"

using namespace seats;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("seats_orch_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig landscape_config(const std::string& name, int budget, std::int64_t seed, const fs::path& run_dir) {
    return make_landscape_config(name, budget, seed, "metric_advantage", run_dir);
}

} // namespace

TEST_CASE("smallest run: budget 1 yields root plus one node") {
    auto dir = fresh_dir("t1");
    RunConfig cfg = landscape_config("quadratic_1d", 1, 3, dir);
    BestReport report = run_new(cfg);

    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    CHECK(rr.state.tree.size() == 2);
    CHECK(rr.state.finished);
    REQUIRE(report.best_id);
    // N* is the better of root and the generated node
    double m0 = *rr.state.tree.node(0).metric;
    double m1 = *rr.state.tree.node(1).metric;
    CHECK(*report.best_metric == std::min(m0, m1));
    CHECK(report.best_id == (m1 < m0 ? 1 : 0));
}

TEST_CASE("journal events respect the per-node phase order") {
    auto dir = fresh_dir("phase_order");
    RunConfig cfg = landscape_config("quadratic_1d", 12, 11, dir);
    cfg.generator.fail_every = 5; // mix in runtime failures
    run_new(cfg);

    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    std::map<NodeId, std::vector<std::string>> per_node;
    for (const auto& e : rr.events) {
        if (!e.payload.is_object() || !e.payload.contains("node_id")) continue;
        per_node[e.payload.at("node_id").get<NodeId>()].push_back(e.kind);
    }
    REQUIRE(per_node.size() >= 5);
    for (const auto& [id, kinds] : per_node) {
        std::vector<std::string> expected;
        bool ok_exec = rr.state.tree.node(id).metric.has_value();
        expected.push_back("node_created");
        expected.push_back("execution_finished");
        if (ok_exec && id != 0) {
            expected.push_back("review_finished");
            expected.push_back("reasoning_finished");
            expected.push_back("prompt_updated");
        }
        expected.push_back("reward_assigned");
        expected.push_back("backprop_applied");
        // optional trailers in fixed order
        std::vector<std::string> got(kinds.begin(), kinds.end());
        REQUIRE(got.size() >= expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) CHECK(got[i] == expected[i]);
        for (std::size_t i = expected.size(); i < got.size(); ++i)
            CHECK((got[i] == "extremes_updated" || got[i] == "archive_offer"));
    }
}

TEST_CASE("an all-buggy run consumes exactly T generation calls") {
    auto dir = fresh_dir("allbuggy");
    RunConfig cfg = landscape_config("quadratic_1d", 8, 5, dir);
    cfg.generator.fail_every = 1; // every candidate crashes
    BestReport report = run_new(cfg);

    CHECK(report.calls.generation == 8);
    CHECK(report.calls.review == 0);
    CHECK(report.calls.global_reasoning == 0);
    CHECK(report.calls.prompt_update == 0);
    CHECK(report.calls.total() == 8);
    // root is fine, every generated node is buggy => N* is the root
    CHECK(report.best_id == 0);

    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    verify_call_attribution(rr);
    RunSummary s = summarize(rr);
    CHECK(s.nodes_buggy == 8);
}

TEST_CASE("ok nodes consume at most four calls and reasoning skips before two non-buggy solutions") {
    auto dir = fresh_dir("calls_ok");
    RunConfig cfg = landscape_config("quadratic_1d", 6, 21, dir);
    run_new(cfg);
    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    CallTotals totals = verify_call_attribution(rr);
    CHECK(totals.total() <= 4 * 6);

    // the first generated ok node sees only the root in the pool plus
    // itself, so reasoning runs from the first node on; a skipped event
    // appears only if the root failed (it does not here)
    int skipped = 0;
    for (const auto& e : rr.events)
        if (e.kind == "reasoning_finished" && e.payload.at("skipped").get<bool>()) ++skipped;
    CHECK(skipped == 0);
}

TEST_CASE("failed generations consume the iteration and are journaled") {
    auto dir = fresh_dir("genfail");
    fs::path fixtures = fresh_dir("genfail_fixtures");
    fs::create_directories(fixtures);
    write_file(fixtures / "response_000.txt", "PLAN:\nok\n```sh\necho 'SEATS_METRIC: 2.5'\n```\nDESCRIPTOR: d1=0.1 d2=0.1 d3=0.1\n");
    write_file(fixtures / "response_001.txt", "no fence, unparseable");
    write_file(fixtures / "response_002.txt", "PLAN:\nok\n```sh\necho 'SEATS_METRIC: 2.25'\n```\nDESCRIPTOR: d1=0.9 d2=0.9 d3=0.9\n");

    RunConfig cfg;
    cfg.budget_T = 3;
    cfg.seed = 1;
    cfg.generator.kind = "fixtures";
    cfg.generator.fixtures_dir = fixtures.string();
    cfg.run_dir = dir.string();
    cfg.reference_code_path = (fixtures / "root.sh").string();
    write_file(fixtures / "root.sh", "echo 'SEATS_METRIC: 3.0'\n");
    cfg.base_prompt_path = (fixtures / "base.txt").string();
    write_file(fixtures / "base.txt", "## Task\nfixture task\n");

    BestReport report = run_new(cfg);
    ReplayResult rr = replay_journal(dir / "journal.jsonl");

    int failed = 0;
    for (const auto& e : rr.events)
        if (e.kind == "iteration_failed") ++failed;
    CHECK(failed == 1);
    CHECK(rr.state.tree.size() == 3); // root + two parsed nodes
    CHECK(report.calls.generation == 3);
    CHECK(rr.state.finished);
    CHECK(report.best_metric == 2.25);
}

TEST_CASE("flagged nodes keep their metrics in the history by default, excluded in strict mode") {
    for (bool strict : {false, true}) {
        auto dir = fresh_dir(strict ? "strict" : "literal");
        RunConfig cfg = landscape_config("quadratic_1d", 9, 33, dir);
        cfg.generator.leak_every = 3;
        cfg.exclude_flagged_metrics = strict;
        run_new(cfg);

        ReplayResult rr = replay_journal(dir / "journal.jsonl");
        int ok_exec = 0, flagged = 0;
        for (const auto& e : rr.events) {
            if (e.kind == "execution_finished" && e.payload.at("status") == "ok") ++ok_exec;
            if (e.kind == "review_finished" && e.payload.at("has_logical_error").get<bool>()) ++flagged;
        }
        REQUIRE(flagged > 0);
        std::size_t expected = static_cast<std::size_t>(strict ? ok_exec - flagged : ok_exec);
        CHECK(rr.state.history.size() == expected);
    }
}

TEST_CASE("interrupt and resume reproduce the uninterrupted journal") {
    auto dir_full = fresh_dir("resume_full");
    auto dir_split = fresh_dir("resume_split");
    RunConfig full_cfg = landscape_config("quadratic_1d", 20, 77, dir_full);
    RunConfig split_cfg = landscape_config("quadratic_1d", 20, 77, dir_split);

    run_new(full_cfg);
    BestReport partial = run_new(split_cfg, 10);
    CHECK(partial.iterations_completed == 10);
    CHECK_FALSE(replay_journal(dir_split / "journal.jsonl").state.finished);

    BestReport resumed = resume_run(dir_split / "journal.jsonl");
    CHECK(resumed.iterations_completed == 20);

    CHECK(read_file(dir_split / "journal.jsonl") == read_file(dir_full / "journal.jsonl"));
}

TEST_CASE("resume with a mismatched seed is refused") {
    auto dir = fresh_dir("resume_seed");
    RunConfig cfg = landscape_config("quadratic_1d", 4, 123, dir);
    run_new(cfg, 2);
    RunConfig other = cfg;
    other.seed = 124;
    CHECK_THROWS_AS(resume_run(dir / "journal.jsonl", std::nullopt, other), ConfigError);
    // matching seed continues fine
    BestReport r = resume_run(dir / "journal.jsonl", std::nullopt, cfg);
    CHECK(r.iterations_completed == 4);
}

TEST_CASE("resume of a finished run is a no-op report") {
    auto dir = fresh_dir("resume_finished");
    RunConfig cfg = landscape_config("quadratic_1d", 3, 9, dir);
    BestReport first = run_new(cfg);
    std::string journal_before = read_file(dir / "journal.jsonl");
    BestReport again = resume_run(dir / "journal.jsonl");
    CHECK(read_file(dir / "journal.jsonl") == journal_before);
    CHECK(again.best_id == first.best_id);
    CHECK(again.calls.total() == first.calls.total());
}

TEST_CASE("running prompt version files are written for audit") {
    auto dir = fresh_dir("rp_files");
    RunConfig cfg = landscape_config("quadratic_1d", 4, 55, dir);
    run_new(cfg);
    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    REQUIRE(rr.state.running.version >= 1);
    for (int v = 1; v <= rr.state.running.version; ++v) {
        auto p = dir / ("running_prompt.v" + std::to_string(v) + ".txt");
        REQUIRE(fs::exists(p));
        CHECK(read_file(p) == rr.state.running_bodies[static_cast<std::size_t>(v)]);
    }
}

TEST_CASE("report summary exposes trajectory, ledger and occupancy") {
    auto dir = fresh_dir("report");
    RunConfig cfg = landscape_config("quadratic_1d", 15, 8, dir);
    cfg.generator.leak_every = 4;
    run_new(cfg);

    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    RunSummary s = summarize(rr);
    CHECK(s.nodes_total == static_cast<int>(rr.state.tree.size()));
    CHECK(s.calls.total() <= s.call_bound);
    CHECK(s.archive_occupancy.size() == 4);
    CHECK(s.running_prompt_versions >= 1);
    REQUIRE(s.trajectory.size() == 16); // iterations 0..15

    // best-so-far is monotone nonincreasing under lower_better
    std::optional<double> prev;
    for (const auto& row : s.trajectory) {
        if (prev && row.best_so_far) CHECK(*row.best_so_far <= *prev);
        if (row.best_so_far) prev = row.best_so_far;
    }
    CHECK(s.trajectory.back().best_so_far == s.best_metric);

    std::string text = render_summary_text(s);
    CHECK(text.find("N*") != std::string::npos);
    CHECK(summary_to_json(s)["calls"]["total"].get<std::int64_t>() == s.calls.total());

    // replay closure on a real run journal
    CHECK(reserialize(rr.events) == read_file(dir / "journal.jsonl"));
}

TEST_CASE("a run with a failed root still proceeds") {
    auto dir = fresh_dir("badroot");
    fs::create_directories(dir);
    RunConfig cfg = landscape_config("quadratic_1d", 3, 2, dir);
    write_file(dir / "root.sh", "# PARAMS: 5\nexit 1\n");
    cfg.reference_code_path = (dir / "root.sh").string();
    BestReport report = run_new(cfg);
    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    CHECK(rr.state.tree.node(0).buggy);
    CHECK(rr.state.rewards.at(0).reward == -1.0);
    CHECK(rr.state.history.size() < rr.state.tree.size()); // root contributed no metric
    // generated nodes can still become N*
    CHECK(report.best_id.has_value());
    CHECK(*report.best_id != 0);
}

TEST_CASE("two workers complete a run with intact invariants") {
    auto dir = fresh_dir("workers2");
    RunConfig cfg = landscape_config("quadratic_1d", 16, 31, dir);
    cfg.workers = 2;
    cfg.migration_interval = 5; // exercise migration under out-of-order completion
    BestReport report = run_new(cfg);
    CHECK(report.iterations_completed == 16);

    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    CHECK(rr.state.finished);
    verify_call_attribution(rr);
    int migrations = 0;
    for (const auto& e : rr.events)
        if (e.kind == "migration") ++migrations;
    CHECK(migrations == 3); // at iterations 5, 10, 15

    // subtree-sum invariant via chronological re-application
    std::map<NodeId, double> value;
    std::map<NodeId, int> visits;
    for (const auto& e : rr.events) {
        if (e.kind != "backprop_applied") continue;
        double r = e.payload.at("reward").get<double>();
        for (const auto& id : e.payload.at("path")) {
            value[id.get<NodeId>()] += r;
            visits[id.get<NodeId>()] += 1;
        }
    }
    for (const auto& n : rr.state.tree.nodes()) {
        CHECK(n.value == value[n.id]);
        CHECK(n.visits == visits[n.id]);
    }
}

TEST_CASE("a fully reviewed ok node consumes exactly four calls") {
    auto dir = fresh_dir("four_calls");
    RunConfig cfg = landscape_config("quadratic_1d", 5, 21, dir);
    run_new(cfg);
    ReplayResult rr = replay_journal(dir / "journal.jsonl");
    std::map<NodeId, int> calls;
    for (const auto& e : rr.events) {
        if (e.kind == "node_created" && !e.payload.at("parent_id").is_null())
            calls[e.payload.at("node_id").get<NodeId>()] += 1;
        if (e.kind == "review_finished" || e.kind == "prompt_updated") calls[e.payload.at("node_id").get<NodeId>()] += 1;
        if (e.kind == "reasoning_finished" && !e.payload.at("skipped").get<bool>())
            calls[e.payload.at("node_id").get<NodeId>()] += 1;
    }
    // the root is ok here, so every generated ok node compares against a
    // non-empty pool and consumes the full four calls
    for (const auto& n : rr.state.tree.nodes()) {
        if (n.id == 0) continue;
        if (n.metric) CHECK(calls[n.id] == 4);
    }
}

TEST_CASE("identical-policy self-comparison scores a half win rate") {
    auto dir = fresh_dir("self_compare");
    CompareResult res = compare_policies("quadratic_1d", 3, 6, 500, dir, "metric_advantage", "metric_advantage");
    CHECK(res.ties == 3);
    CHECK(res.wins == 0);
    CHECK(res.win_rate == 0.5);
    CHECK(res.leq_fraction == 1.0);
}

TEST_CASE("both policies drive the search to the convex optimum region") {
    // start is f(5) = 25; the advantage policy lands within 0.05 of the
    // optimum, the fixed baseline within 0.5 (its coarse +-1 signal can
    // freeze subtrees near the bottom, which is what the comparison
    // study quantifies)
    auto dir = fresh_dir("convex_reach");
    CompareResult res = compare_policies("quadratic_1d", 3, 400, 42, dir);
    for (const auto& row : res.rows) {
        REQUIRE(row.advantage_best);
        REQUIRE(row.fixed_best);
        CHECK(*row.advantage_best < 0.05); // optimum is 0
        CHECK(*row.fixed_best < 0.5);
    }
}

TEST_CASE("run refuses to clobber an existing journal") {
    auto dir = fresh_dir("noclobber");
    RunConfig cfg = landscape_config("quadratic_1d", 2, 4, dir);
    run_new(cfg);
    CHECK_THROWS_AS(run_new(cfg), ConfigError);
}

TEST_CASE("task bindings render the base template into the base prompt") {
    RunConfig cfg;
    cfg.task = {{"task_name", "hourly load forecasting"},
                {"dataset_description", "CSV files under data/"},
                {"metric_name", "WAPE"},
                {"metric_definition", "sum(|y-yhat|)/sum(|y|)"},
                {"direction_sentence", "Lower is better."}};
    std::string base = resolve_base_prompt(cfg, nullptr, "print('reference')\n");
    CHECK(base.find("hourly load forecasting") != std::string::npos);
    CHECK(base.find("WAPE: sum(|y-yhat|)/sum(|y|)") != std::string::npos);
    CHECK(base.find("print('reference')") != std::string::npos);
    CHECK(base.find("{{") == std::string::npos);

    // missing bindings surface as template errors naming the placeholder
    cfg.task.erase("metric_name");
    CHECK_THROWS_AS(resolve_base_prompt(cfg, nullptr, "x"), TemplateError);
}

TEST_CASE("config validation failures name the field") {
    RunConfig cfg;
    cfg.budget_T = 0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = RunConfig{};
    cfg.generator.kind = "remote";
    CHECK_THROWS_AS(validate_config(cfg), ConfigError); // missing endpoint_url
    cfg = RunConfig{};
    cfg.reward_policy = "bogus";
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}
