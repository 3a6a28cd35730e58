#pragma once

#include "support.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <latch>
#include <thread>

namespace testing {

// Scripted two-branch reasoning runs that force each joint outcome class.
// Branches are told apart by the request seed (config.seed + branch id).
enum class Plan { good, early_stop, fail };

struct BranchPlan {
    Plan plan = Plan::good;
    int accept_at = 0;  // revision accepted by the judge when plan == good
};

struct ScenarioRun {
    ReasoningResult result;
    std::array<int, 2> judge_calls{0, 0};
    std::size_t total_judge_calls = 0;
    std::size_t retriever_calls = 0;
};

inline std::string step_query(int branch, int revision, int step) {
    return "b" + std::to_string(branch) + "-r" + std::to_string(revision) + "-s" + std::to_string(step);
}

inline std::vector<std::string> step_hits(const std::string& query) {
    // Overlapping lists so pooling exercises the sum.
    return {"L." + query, "Shared.common", "Shared." + query.substr(0, 2)};
}

inline CorpusSnapshot scenario_corpus() {
    CorpusSnapshot c("scenario");
    c.add(decl("Shared.common"));
    for (int b = 0; b < 2; ++b) {
        c.add(decl("Shared.b" + std::to_string(b)));
        for (int r = 0; r <= 3; ++r)
            for (int s = 0; s < 2; ++s) c.add(decl("L." + step_query(b, r, s)));
    }
    return c;
}

class StepRetriever final : public Retriever {
public:
    RankedList retrieve(std::string_view query, std::size_t k) override {
        ++calls;
        auto names = step_hits(std::string(query));
        if (names.size() > k) names.resize(k);
        auto l = list_of(names, std::string(query));
        l.stage = Stage::reranked;
        return l;
    }
    std::atomic<std::size_t> calls{0};
};

inline bool wait_for_stop(const std::stop_token& st, std::chrono::seconds limit = std::chrono::seconds(10)) {
    auto deadline = std::chrono::steady_clock::now() + limit;
    while (!st.stop_requested()) {
        if (std::chrono::steady_clock::now() > deadline) return false;
        std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
    return true;
}

inline ScenarioRun run_scenario(BranchPlan p0, BranchPlan p1, bool reflection = true,
                                int max_revisions = 3) {
    const std::array<BranchPlan, 2> plans{p0, p1};
    ReasoningConfig cfg;
    cfg.budget = 2;
    cfg.max_revisions = max_revisions;
    cfg.reflection_enabled = reflection;
    cfg.seed = 100;
    auto branch_of = [&](const TextRequest& r) { return static_cast<int>(*r.params.seed - cfg.seed); };

    auto corpus = scenario_corpus();
    StepRetriever retriever;

    // good vs good: both accept before either can cancel the other.
    std::latch both_judged(2);
    // good vs fail: the good branch accepts only once the failing one is done.
    std::array<std::latch*, 2> fail_done{nullptr, nullptr};
    std::latch fail_latch0(1), fail_latch1(1);
    fail_done[0] = &fail_latch0;
    fail_done[1] = &fail_latch1;
    const bool both_good = plans[0].plan == Plan::good && plans[1].plan == Plan::good;

    FunctionTextProvider sketcher([&](const TextRequest& r) {
        int b = branch_of(r);
        return sketch_json({step_query(b, 0, 0), step_query(b, 0, 1)});
    });
    FunctionTextProvider reviser([&](const TextRequest& r) {
        int b = branch_of(r);
        auto pos = r.prompt.find("(revision ");
        int prior = std::stoi(r.prompt.substr(pos + 10));
        return sketch_json({step_query(b, prior + 1, 0), step_query(b, prior + 1, 1)});
    });
    FunctionTextProvider filter([&](const TextRequest& r) -> std::string {
        int b = branch_of(r);
        if (plans[b].plan == Plan::early_stop) wait_for_stop(r.stop);
        return "yes";
    });
    std::array<std::atomic<int>, 2> judge_calls{};
    FunctionTextProvider judge([&](const TextRequest& r) -> std::string {
        int b = branch_of(r);
        int call = judge_calls[b]++;
        const auto& plan = plans[b];
        if (plan.plan == Plan::fail) {
            if (call == max_revisions) fail_done[b]->count_down();
            return "reject step 1: missing premise";
        }
        if (plan.plan == Plan::good && call >= plan.accept_at) {
            if (both_good) {
                both_judged.arrive_and_wait();
            } else if (plans[1 - b].plan == Plan::fail) {
                fail_done[1 - b]->wait();
            }
            return "{\"accepted\": true}";
        }
        return "{\"accepted\": false, \"feedback\": [{\"step\": 2, \"reason\": \"different route\"}]}";
    });

    ReasoningProviders providers{&retriever, &corpus, &sketcher, &filter, &judge, &reviser};
    ScenarioRun run;
    run.result = run_reasoning({"informal", "theorem t : P"}, providers, cfg);
    run.judge_calls = {judge_calls[0].load(), judge_calls[1].load()};
    run.total_judge_calls = judge.log().size();
    run.retriever_calls = retriever.calls.load();
    return run;
}

// Appendix-style rank-discount sum evaluated directly.
inline std::map<std::string, double> oracle_scores(std::span<const RankedList> lists) {
    std::map<std::string, double> s;
    for (const auto& l : lists)
        for (std::size_t i = 0; i < l.hits.size(); ++i)
            s[l.hits[i].decl_name] += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return s;
}

inline std::string plan_name(Plan p) {
    switch (p) {
        case Plan::good: return "good";
        case Plan::early_stop: return "early_stop";
        case Plan::fail: return "fail";
    }
    return "?";
}

// Checks one scenario run; returns a list of violated expectations.
inline std::vector<std::string> check_scenario(const ScenarioRun& run, BranchPlan p0, BranchPlan p1,
                                               int max_revisions = 3) {
    std::vector<std::string> bad;
    const std::array<BranchPlan, 2> plans{p0, p1};
    const auto& r = run.result;
    if (r.branches.size() != 2) return {"expected two branches"};
    std::optional<int> expect_winner;
    for (int b = 0; b < 2; ++b)
        if (plans[b].plan == Plan::good) {
            expect_winner = b;
            break;
        }
    for (int b = 0; b < 2; ++b) {
        const auto& br = r.branches[b];
        const std::string tag = "branch " + std::to_string(b) + ": ";
        if (to_string(br.status) != plan_name(plans[b].plan))
            bad.push_back(tag + "status " + to_string(br.status) + ", expected " + plan_name(plans[b].plan));
        const int rev = br.final_sketch.revision;
        if (rev > max_revisions) bad.push_back(tag + "revision above cap");
        if (plans[b].plan == Plan::good) {
            if (rev != plans[b].accept_at) bad.push_back(tag + "accepted at the wrong revision");
            if (br.judge_trace.empty() || !br.judge_trace.back().accepted) bad.push_back(tag + "last verdict not accepted");
        }
        if (plans[b].plan == Plan::fail) {
            if (rev != max_revisions) bad.push_back(tag + "fail below revision cap");
            for (const auto& v : br.judge_trace)
                if (v.accepted) bad.push_back(tag + "fail branch holds an accepted verdict");
        }
        if (plans[b].plan != Plan::early_stop) {
            if (static_cast<int>(br.judge_trace.size()) != rev + 1)
                bad.push_back(tag + "judge calls " + std::to_string(br.judge_trace.size()) + " != revisions+1");
            if (run.judge_calls[b] != rev + 1) bad.push_back(tag + "provider judge calls != revisions+1");
        }
        for (const auto& v : br.judge_trace)
            if (v.accepted != v.feedback.empty()) bad.push_back(tag + "verdict invariant violated");
        // Lists correspond to the latest judged sketch.
        if (plans[b].plan != Plan::early_stop) {
            if (br.filtered.size() != br.final_sketch.steps.size()) bad.push_back(tag + "list count != step count");
            for (std::size_t s = 0; s < br.filtered.size(); ++s)
                if (br.filtered[s].query != step_query(b, rev, static_cast<int>(s)))
                    bad.push_back(tag + "lists are not from the latest sketch");
        }
    }
    if (r.winner != expect_winner) bad.push_back("wrong winner");
    std::vector<RankedList> contributing;
    if (expect_winner) {
        if (r.status != RunStatus::accepted) bad.push_back("run status should be accepted");
        contributing = r.branches[*expect_winner].filtered;
    } else {
        if (r.status != RunStatus::pooled) bad.push_back("run status should be pooled");
        for (const auto& br : r.branches)
            if (br.status != BranchStatus::early_stop)
                contributing.insert(contributing.end(), br.filtered.begin(), br.filtered.end());
    }
    auto want = oracle_scores(contributing);
    if (want.size() != r.ranking.entries.size()) bad.push_back("ranking size differs from oracle");
    for (const auto& e : r.ranking.entries) {
        auto it = want.find(e.decl_name);
        if (it == want.end() || std::abs(it->second - e.score) > 1e-12)
            bad.push_back("ranking score for " + e.decl_name + " differs from oracle");
    }
    return bad;
}

// Comparable digest of a run for repeatability checks.
inline std::string scenario_digest(const ScenarioRun& run) {
    json j = to_json(run.result);
    j["judge_calls"] = run.judge_calls;
    return j.dump();
}

}  // namespace testing
