#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/providers.hpp"
#include "leansearch/retrieval.hpp"
#include "leansearch/util.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace leansearch {

struct ReasoningTarget {
    std::string informal;
    std::string formal;
};

struct SketchStep {
    std::string description;
    std::optional<std::string> context;
    std::string query;
};

struct Sketch {
    std::vector<SketchStep> steps;
    int revision = 0;
};

struct StepFeedback {
    int step_index = 0;  // 1-based step number; 0 refers to the sketch as a whole
    std::string reason;
};

// accepted => feedback empty; rejected => feedback non-empty.
struct JudgeVerdict {
    bool accepted = false;
    std::vector<StepFeedback> feedback;
};

// `unjudged` marks branches run with reflection disabled: the judge is never
// consulted and the initial sketch's lists are returned as-is.
enum class BranchStatus { good, early_stop, fail, unjudged };
std::string to_string(BranchStatus status);

struct BranchResult {
    int branch_id = 0;
    BranchStatus status = BranchStatus::fail;
    Sketch final_sketch;
    std::vector<RankedList> filtered;  // one per step of the latest judged sketch
    std::vector<JudgeVerdict> judge_trace;
    std::optional<std::string> error;
    std::vector<std::string> dropped;  // candidates the filter could not classify
};

struct AggregatedEntry {
    std::string decl_name;
    double score = 0.0;
};

// Rank-discount pooling: s(d) = sum over lists containing d of
// 1 / log2(rank + 2), rank 0-indexed.
struct AggregatedRanking {
    std::vector<AggregatedEntry> entries;
    // decl_name -> (list index, 0-indexed rank in that list)
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> sources;

    RankedList to_ranked_list(std::string query = "") const;
};

AggregatedRanking aggregate(std::span<const RankedList> lists);

// ---------------------------------------------------------------------------
// Trace log

struct TraceEvent {
    std::size_t seq = 0;
    int branch = 0;
    std::string type;  // sketch, retrieve, filter, judge, revise, cancel, done
    json payload;
};

json to_json(const TraceEvent& e);

// Append-only, thread-safe. An optional listener sees every event as it is
// appended.
class TraceLog {
public:
    using Listener = std::function<void(const TraceEvent&)>;

    TraceLog() = default;
    TraceLog(const TraceLog& other);
    TraceLog& operator=(const TraceLog& other);

    void set_listener(Listener listener);
    void append(int branch, std::string type, json payload);
    std::vector<TraceEvent> events() const;
    std::vector<TraceEvent> events_since(std::size_t seq) const;
    std::size_t size() const;
    std::string to_jsonl() const;

private:
    mutable std::mutex mu_;
    std::vector<TraceEvent> events_;
    Listener listener_;
};

// ---------------------------------------------------------------------------
// Roles

class SketchParseError : public ParseError {
public:
    SketchParseError(std::string what, std::string raw)
        : ParseError(std::move(what), 0), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

std::string sketch_prompt(const ReasoningTarget& target);
std::string revise_prompt(const ReasoningTarget& target, const Sketch& prior,
                          const JudgeVerdict& verdict);
std::string filter_prompt(const SketchStep& step, const DeclarationRecord& candidate);
std::string judge_prompt(const ReasoningTarget& target, const Sketch& sketch,
                         std::span<const RankedList> filtered, const CorpusSnapshot& corpus);
std::string sketch_to_text(const Sketch& sketch);

// Accepts {"steps": [...]} or a bare array, optionally fenced.
Sketch parse_sketch(std::string_view text);
std::optional<bool> parse_filter_decision(std::string_view text);
// Throws ParseError when neither JSON nor the "accept" / "reject step N: why"
// text form is recognised. Applies the verdict invariant repair.
JudgeVerdict parse_verdict(std::string_view text, std::span<const RankedList> filtered);

struct RoleOptions {
    int parse_retries = 2;
    int provider_retries = 2;
    GenerationParams params{};
    std::stop_token stop;
};

Sketch generate_sketch(const ReasoningTarget& target, TextProvider& provider,
                       const RoleOptions& options = {});

// Order-preserving subset; candidates the provider fails on are dropped and
// appended to `dropped`. Returns nullopt if `options.stop` fires between calls.
std::optional<RankedList> filter_candidates(const SketchStep& step, const RankedList& hits,
                                            const CorpusSnapshot& corpus, TextProvider& provider,
                                            const RoleOptions& options = {},
                                            std::vector<std::string>* dropped = nullptr);

// Unparseable output after retries counts as a rejection.
JudgeVerdict judge_sketch(const ReasoningTarget& target, const Sketch& sketch,
                          std::span<const RankedList> filtered, const CorpusSnapshot& corpus,
                          TextProvider& provider, const RoleOptions& options = {});

Sketch revise_sketch(const ReasoningTarget& target, const Sketch& prior, const JudgeVerdict& verdict,
                     TextProvider& provider, int max_revisions, const RoleOptions& options = {});

// ---------------------------------------------------------------------------
// Loop

struct ReasoningConfig {
    int budget = 2;
    int max_revisions = 3;
    bool reflection_enabled = true;
    std::size_t per_step_k = 10;
    int parse_retries = 2;
    int provider_retries = 2;
    double sketch_temperature = 0.7;
    std::uint64_t seed = 0;
};

struct ReasoningProviders {
    Retriever* retriever = nullptr;
    const CorpusSnapshot* corpus = nullptr;
    TextProvider* sketcher = nullptr;
    TextProvider* filter = nullptr;
    TextProvider* judge = nullptr;
    TextProvider* reviser = nullptr;
};

BranchResult run_branch(const ReasoningTarget& target, const ReasoningProviders& providers,
                        const ReasoningConfig& config, int branch_id, std::stop_token cancel,
                        TraceLog* trace = nullptr);

enum class RunStatus { accepted, pooled, unjudged };
std::string to_string(RunStatus status);

struct ReasoningResult {
    RunStatus status = RunStatus::pooled;
    std::optional<int> winner;  // branch whose lists were aggregated, if accepted
    AggregatedRanking ranking;
    std::vector<BranchResult> branches;
    TraceLog trace;  // per-branch logs concatenated in launch order
};

class ReasoningError : public Error {
public:
    using Error::Error;
};

// Runs `config.budget` branches concurrently. The first accepted branch
// cancels its siblings; when several are accepted the lowest launch index
// wins. Without an accepted branch the lists of every non-cancelled branch are
// pooled. `live` receives events as they happen (interleaved across branches).
ReasoningResult run_reasoning(const ReasoningTarget& target, const ReasoningProviders& providers,
                              const ReasoningConfig& config, TraceLog* live = nullptr,
                              std::stop_token external = {});

json to_json(const BranchResult& b);
json to_json(const ReasoningResult& r);

}  // namespace leansearch
