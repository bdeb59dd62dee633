#pragma once

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "seats/config.hpp"
#include "seats/generation.hpp"
#include "seats/journal.hpp"
#include "seats/prompt.hpp"
#include "seats/review.hpp"
#include "seats/reward.hpp"
#include "seats/sandbox.hpp"
#include "seats/tree.hpp"

namespace seats {

struct GeneratorSet {
    std::shared_ptr<Generator> generator;
    std::shared_ptr<Generator> reviewer;
    std::shared_ptr<Generator> reasoner;
    std::shared_ptr<Generator> updater;
};

struct BestReport {
    std::optional<NodeId> best_id;
    std::optional<double> best_metric;
    std::string best_code;
    std::vector<NodeId> lineage; // root .. best
    CallTotals calls;
    int iterations_completed = 0;
};

/// Drives the five-phase loop over the budget: select, generate,
/// execute, review-and-refine, reward-and-update. Owns all shared state
/// mutation; generation/execution/review run in worker threads and hand
/// results back to the single writer in completion order.
class Orchestrator {
  public:
    Orchestrator(RunState state, GeneratorSet gens, std::unique_ptr<JournalWriter> journal,
                 std::filesystem::path run_dir, std::string base_prompt, std::string root_code)
        : st_(std::move(state)), gens_(std::move(gens)), journal_(std::move(journal)), run_dir_(std::move(run_dir)),
          ledger_(st_.config.budget_T), base_prompt_(std::move(base_prompt)), root_code_(std::move(root_code)) {
        const RunConfig& cfg = st_.config;
        system_prompt_ = load_template("system", cfg.templates.system).body;
        tpl_generation_context_ = load_template("generation_context", cfg.templates.generation_context);
        tpl_review_ = load_template("review", cfg.templates.review);
        tpl_update_ = load_template("update", cfg.templates.update);
        ledger_.restore(st_.calls);

        sandbox_ = cfg.sandbox;
        sandbox_.timeout_seconds = cfg.timeout_seconds;
        if (sandbox_.workdir.empty() && !std::getenv("SEATS_WORKDIR"))
            sandbox_.workdir = (run_dir_ / "sandbox").string();
    }

    const RunState& state() const { return st_; }

    /// Runs (or continues) the loop up to the budget, or up to
    /// `stop_after` iterations for controlled interruption. The journal
    /// gets run_finished only when the full budget completed.
    BestReport run(std::optional<int> stop_after = std::nullopt) {
        if (st_.finished) return make_best_report();
        if (st_.tree.empty()) initialize_root();

        const int budget = st_.config.budget_T;
        const int end = std::min(budget, stop_after.value_or(budget));
        if (st_.last_iteration < end) run_pipeline(end);

        if (st_.last_iteration >= budget && !st_.finished) {
            CallTotals totals = ledger_.totals();
            json best = st_.extremes.best_id() ? json(*st_.extremes.best_id()) : json(nullptr);
            json best_metric = st_.extremes.best_id() ? json(st_.extremes.best_metric()) : json(nullptr);
            journal_->append(st_.last_iteration, "run_finished",
                             json{{"best_node_id", best},
                                  {"best_metric", best_metric},
                                  {"iterations_completed", st_.last_iteration},
                                  {"calls", calls_to_json(totals)}});
            st_.finished = true;
        }
        return make_best_report();
    }

    static json calls_to_json(const CallTotals& t) {
        return json{{"generation", t.generation},
                    {"review", t.review},
                    {"global_reasoning", t.global_reasoning},
                    {"prompt_update", t.prompt_update}};
    }

  private:
    struct Job {
        int iteration = 0;
        NodeId parent = 0;
        int rp_version = 0;
        GenerationRequest request;
    };

    struct Completion {
        int iteration = 0;
        NodeId parent = 0;
        int rp_version = 0;
        bool fatal = false;      // environment failure: shut down cleanly
        bool gen_failed = false; // generation/parse failure: iteration consumed
        std::string fail_reason;
        GenerationResponse resp;
        ExecutionResult exec;
        ReviewVerdict verdict;
        bool has_verdict = false;
    };

    static std::string iter_dir_name(int iteration) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "iter_%05d", iteration);
        return buf;
    }

    GenerationRequest aux_request_defaults() const {
        GenerationRequest r;
        r.temperature = st_.config.generator.temperature;
        r.max_output_chars = st_.config.generator.max_output_chars;
        return r;
    }

    void initialize_root() {
        // execute before journaling anything, so an environment failure
        // here leaves a journal a later resume can re-initialize from
        ExecutionResult res = execute(root_code_, sandbox_, iter_dir_name(0));
        NodeId id = st_.tree.create_node(std::nullopt, root_code_, "reference implementation", {}, 0);
        journal_->append(0, "node_created",
                         json{{"node_id", 0},
                              {"parent_id", nullptr},
                              {"code", root_code_},
                              {"plan", "reference implementation"},
                              {"descriptor", {0.0, 0.0, 0.0}},
                              {"island", 0},
                              {"running_prompt_version", 0}});
        journal_execution(id, res);
        apply_execution(id, res);
        // the root is scored without consuming any LLM call: its review
        // gate is its execution status
        finish_phase5(id, 0);
    }

    void run_pipeline(int end) {
        std::deque<Job> jobs;
        std::deque<Completion> done;
        std::mutex jm, dm;
        std::condition_variable jcv, dcv;
        bool shutdown = false;

        auto worker_loop = [&]() {
            for (;;) {
                Job job;
                {
                    std::unique_lock<std::mutex> lock(jm);
                    jcv.wait(lock, [&] { return shutdown || !jobs.empty(); });
                    if (jobs.empty()) return;
                    job = std::move(jobs.front());
                    jobs.pop_front();
                }
                Completion c;
                c.iteration = job.iteration;
                c.parent = job.parent;
                c.rp_version = job.rp_version;
                try {
                    try {
                        c.resp = parse_generation_response(gens_.generator->complete(job.request));
                    } catch (const GenerationError& e) {
                        c.gen_failed = true;
                        c.fail_reason = e.what();
                    }
                    if (!c.gen_failed) {
                        c.exec = execute(c.resp.code, sandbox_, iter_dir_name(job.iteration));
                        if (c.exec.status == ExecutionStatus::Ok) {
                            c.verdict = review(c.resp.code, make_execution_summary(c.exec), *gens_.reviewer,
                                               tpl_review_, aux_request_defaults());
                            c.has_verdict = true;
                        }
                    }
                } catch (const std::exception& e) {
                    c.fatal = true;
                    c.fail_reason = e.what();
                }
                {
                    std::lock_guard<std::mutex> lock(dm);
                    done.push_back(std::move(c));
                }
                dcv.notify_one();
            }
        };

        int nworkers = st_.config.workers;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nworkers));
        for (int i = 0; i < nworkers; ++i) pool.emplace_back(worker_loop);

        int next_t = st_.last_iteration + 1;
        int in_flight = 0;
        std::optional<std::string> fatal;

        auto dispatch = [&](int t) {
            double c = st_.config.schedule.value(t - 1);
            NodeId parent = st_.tree.select_expansion_target(c);
            st_.tree.apply_virtual_visit(parent);
            Job job;
            job.iteration = t;
            job.parent = parent;
            job.rp_version = st_.running.version;
            job.request.system_prompt = system_prompt_;
            job.request.user_prompt = build_generation_prompt(parent, t);
            job.request.node_id_hint = parent;
            job.request.temperature = st_.config.generator.temperature;
            job.request.max_output_chars = st_.config.generator.max_output_chars;
            {
                std::lock_guard<std::mutex> lock(jm);
                jobs.push_back(std::move(job));
            }
            jcv.notify_one();
            ++in_flight;
        };

        while ((next_t <= end && !fatal) || in_flight > 0) {
            while (in_flight < nworkers && next_t <= end && !fatal) dispatch(next_t++);
            Completion c;
            {
                std::unique_lock<std::mutex> lock(dm);
                dcv.wait(lock, [&] { return !done.empty(); });
                c = std::move(done.front());
                done.pop_front();
            }
            --in_flight;
            st_.tree.revert_virtual_visit(c.parent);
            if (c.fatal) {
                if (!fatal) fatal = c.fail_reason;
                continue;
            }
            process_completion(c);
        }

        {
            std::lock_guard<std::mutex> lock(jm);
            shutdown = true;
        }
        jcv.notify_all();
        for (auto& t : pool) t.join();

        if (fatal) throw SandboxError("run aborted: " + *fatal);
    }

    void journal_execution(NodeId id, const ExecutionResult& r) {
        json payload{{"node_id", id},
                     {"status", to_string(r.status)},
                     {"metric", r.status == ExecutionStatus::Ok ? json(*r.metric) : json(nullptr)},
                     {"exit_code", r.exit_code ? json(*r.exit_code) : json(nullptr)},
                     {"stdout_tail", r.stdout_tail},
                     {"stderr_tail", r.stderr_tail}};
        journal_->append(current_iteration_, "execution_finished", payload);
    }

    void apply_execution(NodeId id, const ExecutionResult& r) {
        SolutionNode& node = st_.tree.node(id);
        node.buggy = r.status != ExecutionStatus::Ok;
        node.analysis = make_execution_summary(r);
        if (r.status == ExecutionStatus::Ok) {
            node.metric = r.metric;
            // in strict mode generated nodes enter the history only after a
            // clean review; the root has no review, so it enters here
            if (!st_.config.exclude_flagged_metrics || id == 0) st_.history.record(*r.metric);
        }
    }

    void process_completion(const Completion& c) {
        current_iteration_ = c.iteration;
        if (c.gen_failed) {
            ledger_.record(CallCategory::Generation);
            journal_->append(c.iteration, "iteration_failed", json{{"reason", c.fail_reason}});
            st_.last_iteration = std::max(st_.last_iteration, c.iteration);
            maybe_migrate();
            return;
        }

        NodeId id = st_.tree.create_node(c.parent, c.resp.code, c.resp.plan, c.resp.descriptor, c.iteration);
        ledger_.record(CallCategory::Generation);
        journal_->append(c.iteration, "node_created",
                         json{{"node_id", id},
                              {"parent_id", c.parent},
                              {"code", c.resp.code},
                              {"plan", c.resp.plan},
                              {"descriptor", {c.resp.descriptor.d1, c.resp.descriptor.d2, c.resp.descriptor.d3}},
                              {"island", st_.island_of(id)},
                              {"running_prompt_version", c.rp_version}});

        journal_execution(id, c.exec);
        apply_execution(id, c.exec);
        SolutionNode& node = st_.tree.node(id);

        if (c.exec.status == ExecutionStatus::Ok) {
            const ReviewVerdict& v = c.verdict;
            ledger_.record(CallCategory::Review);
            journal_->append(c.iteration, "review_finished",
                             json{{"node_id", id},
                                  {"has_logical_error", v.has_logical_error},
                                  {"findings", v.findings},
                                  {"prompt_suggestion", v.prompt_suggestion},
                                  {"verdict_parse_ok", v.verdict_parse_ok}});
            if (v.has_logical_error) node.buggy = true;
            if (st_.config.exclude_flagged_metrics && !v.has_logical_error) st_.history.record(*node.metric);

            std::string insight = run_reasoning(node, c.iteration);
            run_prompt_update(node, v, insight, c.iteration);
        }

        finish_phase5(id, c.iteration);
        st_.last_iteration = std::max(st_.last_iteration, c.iteration);
        maybe_migrate();
    }

    /// Global steerable reasoning for an ok-executed node. The current
    /// node joins the comparison pool when its own review came back
    /// clean; with fewer than two non-buggy solutions in sight there is
    /// nothing to compare and no call is consumed.
    std::string run_reasoning(SolutionNode& node, int iteration) {
        bool eligible_self = !node.buggy;
        int pool = st_.extremes.non_buggy_count() + (eligible_self ? 1 : 0);
        std::string insight;
        bool skipped = true;
        bool reasoner_ok = true;
        if (pool >= 2) {
            SolutionTriple cur{node.id, node.code, node.plan, node.metric.value_or(0.0)};
            SolutionTriple best = cur, worst = cur;
            if (st_.extremes.best_id()) {
                const SolutionNode& b = st_.tree.node(*st_.extremes.best_id());
                const SolutionNode& w = st_.tree.node(*st_.extremes.worst_id());
                best = SolutionTriple{b.id, b.code, b.plan, st_.extremes.best_metric()};
                worst = SolutionTriple{w.id, w.code, w.plan, st_.extremes.worst_metric()};
                if (eligible_self && improves(cur.metric, best.metric, st_.config.direction)) best = cur;
                if (eligible_self && improves(worst.metric, cur.metric, st_.config.direction)) worst = cur;
            }
            ReasoningOutcome out = global_reasoning(best, worst, cur, *gens_.reasoner, aux_request_defaults());
            ledger_.record(CallCategory::GlobalReasoning);
            insight = out.insight;
            reasoner_ok = out.ok;
            skipped = false;
        }
        journal_->append(iteration, "reasoning_finished",
                         json{{"node_id", node.id}, {"insight", insight}, {"skipped", skipped}, {"reasoner_ok", reasoner_ok}});
        if (!insight.empty()) node.analysis += "Global insight: " + insight + "\n";
        return insight;
    }

    /// One consolidated running-prompt update per reviewed node: review
    /// suggestion and reasoning insight merge into a single refinement
    /// call, keeping within the per-node call budget.
    void run_prompt_update(SolutionNode& node, const ReviewVerdict& v, const std::string& insight, int iteration) {
        std::string consolidated;
        if (!trim(v.prompt_suggestion).empty()) consolidated = v.prompt_suggestion;
        if (!trim(insight).empty()) consolidated += (consolidated.empty() ? "" : "\n") + insight;
        if (consolidated.empty()) consolidated = trim(v.findings);
        if (consolidated.empty()) consolidated = "(no new findings)";

        RunningPromptUpdate up = update_running_prompt(st_.running, consolidated, *gens_.updater, tpl_update_,
                                                       aux_request_defaults());
        ledger_.record(CallCategory::PromptUpdate);
        if (up.ok) {
            st_.running = up.updated;
            st_.running_bodies.push_back(up.updated.body);
            journal_->append(iteration, "prompt_updated",
                             json{{"node_id", node.id},
                                  {"ok", true},
                                  {"version", up.updated.version},
                                  {"body", up.updated.body},
                                  {"truncated", up.truncated}});
            write_file(run_dir_ / ("running_prompt.v" + std::to_string(up.updated.version) + ".txt"),
                       up.updated.body);
        } else {
            journal_->append(iteration, "prompt_updated",
                             json{{"node_id", node.id}, {"ok", false}, {"version", st_.running.version}, {"truncated", false}});
        }
    }

    /// Reward, backpropagation, extremes and archive maintenance.
    void finish_phase5(NodeId id, int iteration) {
        SolutionNode& node = st_.tree.node(id);
        double advantage = node.metric ? st_.history.advantage(*node.metric) : 0.0;
        double r = st_.config.reward_policy == "fixed" ? fixed_policy_reward(node)
                                                       : reward(advantage, node.buggy);
        RewardRecord rec{id, node.metric, advantage, r, node.buggy, static_cast<int>(st_.history.size())};
        st_.rewards[id] = rec;
        journal_->append(iteration, "reward_assigned",
                         json{{"node_id", id},
                              {"metric", node.metric ? json(*node.metric) : json(nullptr)},
                              {"advantage", advantage},
                              {"reward", r},
                              {"buggy", node.buggy},
                              {"history_size_at_eval", rec.history_size_at_eval}});

        std::vector<NodeId> path = st_.tree.backpropagate(id, r);
        journal_->append(iteration, "backprop_applied", json{{"node_id", id}, {"reward", r}, {"path", path}});

        bool changed = st_.extremes.update(id, node.metric, node.buggy);
        if (changed) {
            journal_->append(iteration, "extremes_updated",
                             json{{"best_id", st_.extremes.best_id() ? json(*st_.extremes.best_id()) : json(nullptr)},
                                  {"worst_id", st_.extremes.worst_id() ? json(*st_.extremes.worst_id()) : json(nullptr)}});
        }

        if (!node.buggy && node.metric && id != 0) {
            int island = st_.island_of(id);
            Cell cell = descriptor_to_cell(node.descriptor, st_.config.bins_per_dim);
            bool accepted = st_.islands.island(island).try_insert(id, *node.metric, node.descriptor);
            journal_->append(iteration, "archive_offer",
                             json{{"node_id", id},
                                  {"island", island},
                                  {"cell", {cell[0], cell[1], cell[2]}},
                                  {"metric", *node.metric},
                                  {"accepted", accepted}});
        }
    }

    /// ML-Master-style fixed baseline: +1 when the node strictly improves
    /// its nearest metric-bearing ancestor (or establishes the first
    /// metric on its path), -1 otherwise; buggy always -1.
    double fixed_policy_reward(const SolutionNode& node) const {
        if (node.buggy || !node.metric) return -1.0;
        std::optional<NodeId> cur = node.parent_id;
        while (cur) {
            const SolutionNode& anc = st_.tree.node(*cur);
            if (anc.metric) return improves(*node.metric, *anc.metric, st_.config.direction) ? 1.0 : -1.0;
            cur = anc.parent_id;
        }
        return 1.0;
    }

    void maybe_migrate() {
        const int interval = st_.config.migration_interval;
        while (st_.last_iteration >= st_.last_migration_iteration + interval) {
            int at = st_.last_migration_iteration + interval;
            std::vector<MigrationOffer> offers = st_.islands.migrate();
            json joffers = json::array();
            for (const auto& o : offers) {
                joffers.push_back(json{{"from_island", o.from_island},
                                       {"to_island", o.to_island},
                                       {"node_id", o.node_id},
                                       {"metric", o.metric},
                                       {"descriptor", {o.descriptor.d1, o.descriptor.d2, o.descriptor.d3}},
                                       {"accepted", o.accepted}});
            }
            journal_->append(at, "migration", json{{"offers", joffers}});
            st_.last_migration_iteration = at;
        }
    }

    std::string build_generation_prompt(NodeId parent, int iteration) {
        const RunConfig& cfg = st_.config;
        std::string context = make_parent_context(parent);
        std::string global = make_global_block();
        std::string archive = make_archive_block(parent, iteration);
        int remaining = cfg.budget_T - iteration + 1;
        RenderResult res = assemble_prompt(tpl_generation_context_, base_prompt_, st_.running.body, context, global,
                                           archive, remaining, cfg.budget_T);
        for (const auto& name : res.unknown_placeholders)
            std::fprintf(stderr, "warning: unbound placeholder {{%s}} left verbatim\n", name.c_str());
        return res.text;
    }

    std::string make_parent_context(NodeId parent_id) const {
        const SolutionNode& p = st_.tree.node(parent_id);
        std::string s;
        s += "Parent node " + std::to_string(p.id) + " (created at iteration " +
             std::to_string(p.created_at_iteration) + "):\n";
        s += "Metric: " + (p.metric ? format_double(*p.metric) : std::string("n/a")) + "\n";
        s += std::string("Buggy: ") + (p.buggy ? "true" : "false") + "\n";
        s += "Plan: " + p.plan + "\n";
        s += "Analysis:\n" + p.analysis;
        s += "Code:\n" + p.code;
        s += "Siblings already expanded from this parent: " + std::to_string(p.children.size()) + " of " +
             std::to_string(st_.config.max_children) + "\n";
        for (NodeId cid : p.children) {
            const SolutionNode& child = st_.tree.node(cid);
            s += "- node " + std::to_string(cid) + ": metric " +
                 (child.metric ? format_double(*child.metric) : std::string("n/a")) + ", buggy " +
                 (child.buggy ? "true" : "false") + "\n";
        }
        return s;
    }

    std::string make_global_block() const {
        if (!st_.extremes.best_id()) return "";
        const SolutionNode& b = st_.tree.node(*st_.extremes.best_id());
        const SolutionNode& w = st_.tree.node(*st_.extremes.worst_id());
        std::string s;
        s += "Global best: node " + std::to_string(b.id) + ", metric " + format_double(st_.extremes.best_metric()) +
             "\n";
        s += "Plan: " + b.plan + "\n";
        s += "Global worst: node " + std::to_string(w.id) + ", metric " + format_double(st_.extremes.worst_metric()) +
             "\n";
        s += "Plan: " + w.plan + "\n";
        return s;
    }

    std::string make_archive_block(NodeId parent_id, int iteration) {
        const SolutionNode& p = st_.tree.node(parent_id);
        int island = st_.island_of(parent_id);
        std::mt19937_64 rng(derive_seed(static_cast<std::uint64_t>(st_.config.seed), 0xa2c417eULL,
                                        static_cast<std::uint64_t>(iteration)));
        Cell exclude = descriptor_to_cell(p.descriptor, st_.config.bins_per_dim);
        auto elites = st_.islands.island(island).sample_elites(st_.config.archive_sample_k, rng, exclude);
        std::string s;
        for (const auto& e : elites) {
            const SolutionNode& n = st_.tree.node(e.node_id);
            std::string plan_first = n.plan.substr(0, n.plan.find('\n'));
            s += "Elite node " + std::to_string(e.node_id) + ": metric " + format_double(e.metric) + ", descriptor (" +
                 format_double(e.descriptor.d1) + ", " + format_double(e.descriptor.d2) + ", " +
                 format_double(e.descriptor.d3) + ")\n";
            s += "Plan: " + plan_first + "\n";
        }
        return s;
    }

    BestReport make_best_report() const {
        BestReport r;
        r.calls = ledger_.totals();
        r.iterations_completed = st_.last_iteration;
        if (st_.extremes.best_id()) {
            r.best_id = st_.extremes.best_id();
            r.best_metric = st_.extremes.best_metric();
            const SolutionNode& best = st_.tree.node(*r.best_id);
            r.best_code = best.code;
            std::optional<NodeId> cur = best.id;
            while (cur) {
                r.lineage.push_back(*cur);
                cur = st_.tree.node(*cur).parent_id;
            }
            std::reverse(r.lineage.begin(), r.lineage.end());
        }
        return r;
    }

    RunState st_;
    GeneratorSet gens_;
    std::unique_ptr<JournalWriter> journal_;
    std::filesystem::path run_dir_;
    CallLedger ledger_;
    std::string base_prompt_;
    std::string root_code_;
    std::string system_prompt_;
    PromptTemplate tpl_generation_context_;
    PromptTemplate tpl_review_;
    PromptTemplate tpl_update_;
    SandboxSettings sandbox_;
    int current_iteration_ = 0;
};

} // namespace seats
