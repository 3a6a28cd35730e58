#include "leansearch/reasoning.hpp"

#include <thread>

namespace leansearch {

std::string to_string(BranchStatus status) {
    switch (status) {
        case BranchStatus::good: return "good";
        case BranchStatus::early_stop: return "early_stop";
        case BranchStatus::fail: return "fail";
        case BranchStatus::unjudged: return "unjudged";
    }
    return "fail";
}

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::accepted: return "accepted";
        case RunStatus::pooled: return "pooled";
        case RunStatus::unjudged: return "unjudged";
    }
    return "pooled";
}

namespace {

json sketch_json(const Sketch& s) {
    json steps = json::array();
    for (const auto& st : s.steps) {
        json j = {{"description", st.description}, {"query", st.query}};
        if (st.context) j["context"] = *st.context;
        steps.push_back(std::move(j));
    }
    return {{"revision", s.revision}, {"steps", std::move(steps)}};
}

json verdict_json(const JudgeVerdict& v) {
    json fb = json::array();
    for (const auto& f : v.feedback) fb.push_back({{"step", f.step_index}, {"reason", f.reason}});
    json j = {{"accepted", v.accepted}};
    if (!v.accepted) j["feedback"] = std::move(fb);
    return j;
}

// Writes each event to the branch's own log and, if present, the live log.
struct BranchTrace {
    int branch;
    TraceLog* own;
    TraceLog* live;
    void emit(const char* type, json payload) const {
        if (live) live->append(branch, type, payload);
        if (own) own->append(branch, type, std::move(payload));
    }
};

BranchResult run_branch_impl(const ReasoningTarget& target, const ReasoningProviders& p,
                             const ReasoningConfig& config, int branch_id, std::stop_token cancel,
                             const BranchTrace& trace) {
    if (!p.retriever || !p.corpus || !p.sketcher || !p.filter ||
        (config.reflection_enabled && (!p.judge || !p.reviser)))
        throw PreconditionError("reasoning providers are not fully configured");

    BranchResult result;
    result.branch_id = branch_id;

    RoleOptions base;
    base.parse_retries = config.parse_retries;
    base.provider_retries = config.provider_retries;
    base.params.seed = config.seed + static_cast<std::uint64_t>(branch_id);
    base.stop = cancel;
    RoleOptions creative = base;
    creative.params.temperature = config.sketch_temperature;

    auto stopped = [&] {
        if (!cancel.stop_requested()) return false;
        result.status = BranchStatus::early_stop;
        trace.emit("cancel", json::object());
        return true;
    };

    auto run = [&] {
        if (stopped()) return;
        Sketch sketch = generate_sketch(target, *p.sketcher, creative);
        trace.emit("sketch", sketch_json(sketch));
        for (;;) {
            std::vector<RankedList> lists;
            for (std::size_t i = 0; i < sketch.steps.size(); ++i) {
                const auto& step = sketch.steps[i];
                if (stopped()) return;
                RankedList hits = p.retriever->retrieve(step.query, config.per_step_k);
                trace.emit("retrieve", {{"step", i + 1}, {"query", step.query}, {"hits", hits.names()}});
                if (stopped()) return;
                auto kept = filter_candidates(step, hits, *p.corpus, *p.filter, base, &result.dropped);
                if (!kept) {
                    stopped();
                    return;
                }
                trace.emit("filter", {{"step", i + 1}, {"kept", kept->names()}});
                lists.push_back(std::move(*kept));
            }
            if (!config.reflection_enabled) {
                result.final_sketch = std::move(sketch);
                result.filtered = std::move(lists);
                result.status = BranchStatus::unjudged;
                return;
            }
            if (stopped()) return;
            JudgeVerdict verdict = judge_sketch(target, sketch, lists, *p.corpus, *p.judge, base);
            trace.emit("judge", verdict_json(verdict));
            result.judge_trace.push_back(verdict);
            result.final_sketch = sketch;
            result.filtered = std::move(lists);
            if (verdict.accepted) {
                result.status = BranchStatus::good;
                return;
            }
            if (sketch.revision >= config.max_revisions) {
                result.status = BranchStatus::fail;
                return;
            }
            if (stopped()) return;
            sketch = revise_sketch(target, sketch, verdict, *p.reviser, config.max_revisions, creative);
            trace.emit("revise", sketch_json(sketch));
        }
    };

    try {
        run();
    } catch (const PreconditionError&) {
        throw;
    } catch (const std::exception& e) {
        result.status = BranchStatus::fail;
        result.error = e.what();
    }

    json done = {{"status", to_string(result.status)}, {"revision", result.final_sketch.revision},
                 {"judge_calls", result.judge_trace.size()}};
    if (result.error) done["error"] = *result.error;
    trace.emit("done", std::move(done));
    return result;
}

}  // namespace

BranchResult run_branch(const ReasoningTarget& target, const ReasoningProviders& providers,
                        const ReasoningConfig& config, int branch_id, std::stop_token cancel,
                        TraceLog* trace) {
    return run_branch_impl(target, providers, config, branch_id, std::move(cancel),
                           BranchTrace{branch_id, trace, nullptr});
}

ReasoningResult run_reasoning(const ReasoningTarget& target, const ReasoningProviders& providers,
                              const ReasoningConfig& config, TraceLog* live,
                              std::stop_token external) {
    if (config.budget < 1) throw PreconditionError("budget must be at least 1");
    if (config.max_revisions < 0) throw PreconditionError("max_revisions must be non-negative");
    const auto n = static_cast<std::size_t>(config.budget);

    std::vector<BranchResult> results(n);
    std::vector<TraceLog> logs(n);
    std::vector<std::exception_ptr> errors(n);
    std::stop_source siblings;
    std::stop_callback forward(external, [&] { siblings.request_stop(); });
    {
        std::vector<std::jthread> threads;
        threads.reserve(n);
        for (std::size_t b = 0; b < n; ++b) {
            threads.emplace_back([&, b] {
                try {
                    results[b] = run_branch_impl(target, providers, config, static_cast<int>(b),
                                                 siblings.get_token(),
                                                 BranchTrace{static_cast<int>(b), &logs[b], live});
                    if (results[b].status == BranchStatus::good) siblings.request_stop();
                } catch (...) {
                    errors[b] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ReasoningResult out;
    for (std::size_t b = 0; b < n; ++b)
        for (const auto& e : logs[b].events()) out.trace.append(e.branch, e.type, e.payload);

    bool all_errored = true;
    for (const auto& r : results)
        if (!r.error) all_errored = false;
    if (all_errored) {
        std::string msg = "every reasoning branch failed:";
        for (const auto& r : results) msg += " [branch " + std::to_string(r.branch_id) + ": " + *r.error + "]";
        throw ReasoningError(msg);
    }

    for (std::size_t b = 0; b < n; ++b) {
        if (results[b].status == BranchStatus::good) {
            out.status = RunStatus::accepted;
            out.winner = static_cast<int>(b);
            out.ranking = aggregate(results[b].filtered);
            break;
        }
    }
    if (!out.winner) {
        std::vector<RankedList> pooled;
        bool any_unjudged = false;
        for (const auto& r : results) {
            if (r.status == BranchStatus::early_stop) continue;
            any_unjudged |= r.status == BranchStatus::unjudged;
            pooled.insert(pooled.end(), r.filtered.begin(), r.filtered.end());
        }
        out.status = any_unjudged ? RunStatus::unjudged : RunStatus::pooled;
        out.ranking = aggregate(pooled);
    }
    out.branches = std::move(results);
    return out;
}

json to_json(const BranchResult& b) {
    json lists = json::array();
    for (const auto& l : b.filtered) lists.push_back(l.names());
    json verdicts = json::array();
    for (const auto& v : b.judge_trace) verdicts.push_back(verdict_json(v));
    json j = {{"branch", b.branch_id},
              {"status", to_string(b.status)},
              {"sketch", sketch_json(b.final_sketch)},
              {"filtered", std::move(lists)},
              {"verdicts", std::move(verdicts)}};
    if (b.error) j["error"] = *b.error;
    if (!b.dropped.empty()) j["dropped"] = b.dropped;
    return j;
}

json to_json(const ReasoningResult& r) {
    json ranking = json::array();
    for (const auto& e : r.ranking.entries) ranking.push_back({{"name", e.decl_name}, {"score", e.score}});
    json branches = json::array();
    for (const auto& b : r.branches) branches.push_back(to_json(b));
    json j = {{"status", to_string(r.status)}, {"ranking", std::move(ranking)},
              {"branches", std::move(branches)}};
    j["winner"] = r.winner ? json(*r.winner) : json(nullptr);
    return j;
}

}  // namespace leansearch
