#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/evaluation.hpp"
#include "leansearch/providers.hpp"
#include "leansearch/reasoning.hpp"
#include "leansearch/retrieval.hpp"
#include "leansearch/util.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace leansearch {

// ---------------------------------------------------------------------------
// Solved check

struct StrippedSource {
    std::string text;
    bool unterminated_comment = false;
};

// Drops "--" line comments and nested "/- ... -/" block comments. String
// literals pass through untouched. An unterminated block comment runs to the
// end of input and is flagged.
StrippedSource strip_comments(std::string_view source);

// True if `text` contains "sorry" as a whole identifier.
bool contains_sorry_token(std::string_view text);

bool is_solved(bool verifier_ok, std::string_view source);

// ---------------------------------------------------------------------------
// Verifier

struct Diagnostic {
    int line = 0;  // 1-based; 0 when unknown
    int column = 0;
    std::string severity = "error";
    std::string message;
};

struct SorryGoal {
    int line = 0;
    std::string goal;
};

struct VerifierResult {
    bool ok = false;
    std::vector<Diagnostic> diagnostics;
    std::vector<SorryGoal> sorries;

    const Diagnostic* first_error() const;
};

json to_json(const VerifierResult& r);
VerifierResult verifier_result_from_json(const json& j);

class VerifierClient {
public:
    virtual ~VerifierClient() = default;
    // Throws ProviderError on transport failure.
    virtual VerifierResult check(std::string_view source) = 0;
};

// POST <url>/check {"source"} -> {"ok", "diagnostics", "sorries"}.
class HttpVerifierClient final : public VerifierClient {
public:
    explicit HttpVerifierClient(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    VerifierResult check(std::string_view source) override;

private:
    Endpoint endpoint_;
};

// First rule whose every `contains` needle occurs in the source wins. With no
// match the fallback applies: ok unless a line holds an "ERROR" marker, and
// one sorry goal per line holding a live sorry.
class ScriptedVerifier final : public VerifierClient {
public:
    struct Rule {
        std::vector<std::string> contains;
        std::optional<VerifierResult> result;
        std::optional<std::string> error;  // throw ProviderError instead
    };
    explicit ScriptedVerifier(std::vector<Rule> rules = {}, std::string default_goal = "⊢ goal")
        : rules_(std::move(rules)), default_goal_(std::move(default_goal)) {}
    static std::unique_ptr<ScriptedVerifier> from_json(const json& j);

    VerifierResult check(std::string_view source) override;
    std::vector<std::string> calls() const;

private:
    std::vector<Rule> rules_;
    std::string default_goal_;
    mutable std::mutex mu_;
    std::vector<std::string> calls_;
};

// Caps the number of concurrent checks across every loop sharing it.
class GatedVerifier final : public VerifierClient {
public:
    GatedVerifier(VerifierClient& inner, std::ptrdiff_t max_concurrent)
        : inner_(inner), gate_(max_concurrent) {}
    VerifierResult check(std::string_view source) override;

private:
    VerifierClient& inner_;
    std::counting_semaphore<1024> gate_;
};

std::unique_ptr<VerifierClient> make_verifier(const json& spec, const std::string& base_dir);

class ProofStateError : public Error {
public:
    using Error::Error;
};

// Appends " := sorry" unless the statement already ends in a sorry body.
std::string with_sorry_body(std::string_view formal_statement);

// Goal context of the first sorry the verifier reports.
std::string extract_proof_state(std::string_view formal_statement, VerifierClient& verifier);

// ---------------------------------------------------------------------------
// Reflection loop

enum class RetrievalMode {
    none,
    standard_reflect,
    finder_like_reflect,
    state_based,
    statement_based,
    reasoning_sketch
};
std::string to_string(RetrievalMode m);
RetrievalMode retrieval_mode_from_string(std::string_view s);

struct ProveProblem {
    std::string id;
    std::string informal;
    std::string formal_statement;
};
ProveProblem prove_problem_from_json(const json& j);
std::vector<ProveProblem> load_problems(const std::string& path);

struct LoopConfig {
    int reflection_rounds = 8;
    int prover_max_retries = 3;
    int verifier_max_retries = 3;
    double verifier_wait_seconds = 30.0;
    RetrievalMode retrieval_mode = RetrievalMode::none;
    std::size_t hints_per_round = 10;

    void validate() const;
};

struct Attempt {
    int round = 0;
    std::string source;
    std::optional<VerifierResult> verifier;
    std::vector<std::string> hints;  // declaration names rendered into the prompt
    std::optional<std::string> retrieval_query;
    std::optional<std::string> error;
};

struct LoopOutcome {
    std::string problem_id;
    bool solved = false;
    int rounds_used = 0;
    std::vector<Attempt> attempts;
    std::optional<std::string> error;
};
json to_json(const LoopOutcome& outcome);

struct ProverProviders {
    TextProvider* prover = nullptr;
    TextProvider* query_rewriter = nullptr;
    Retriever* retriever = nullptr;        // standard, finder-like and statement modes
    Retriever* state_retriever = nullptr;  // state_based
    VerifierClient* verifier = nullptr;
    const CorpusSnapshot* corpus = nullptr;  // hint hydration; names only when absent
    std::function<ReasoningResult(const ReasoningTarget&)> reason;
    std::function<void(std::chrono::duration<double>)> sleep;  // defaults to a real sleep
};

inline constexpr const char* kProverPromptVersion = "prover-prompt-v1";

std::string prover_prompt(const ProveProblem& problem, const std::string& sketch_text,
                          const std::vector<JudgeBlock>& hints, const Attempt* previous);
std::string rewrite_prompt(const ProveProblem& problem, const Attempt& attempt);

// Pulls the proof out of a fenced reply, if fenced.
std::string extract_proof_source(std::string_view reply);

LoopOutcome run_reflection_loop(const ProveProblem& problem, const LoopConfig& config,
                                const ProverProviders& providers);

}  // namespace leansearch
