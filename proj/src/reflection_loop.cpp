#include "leansearch/prover.hpp"

#include <thread>

namespace leansearch {

namespace {

constexpr std::pair<RetrievalMode, std::string_view> kModes[] = {
    {RetrievalMode::none, "none"},
    {RetrievalMode::standard_reflect, "standard_reflect"},
    {RetrievalMode::finder_like_reflect, "finder_like_reflect"},
    {RetrievalMode::state_based, "state_based"},
    {RetrievalMode::statement_based, "statement_based"},
    {RetrievalMode::reasoning_sketch, "reasoning_sketch"},
};

}  // namespace

std::string to_string(RetrievalMode m) {
    for (const auto& [mode, name] : kModes)
        if (mode == m) return std::string(name);
    return "none";
}

RetrievalMode retrieval_mode_from_string(std::string_view s) {
    for (const auto& [mode, name] : kModes)
        if (name == s) return mode;
    throw Error("unknown retrieval mode '" + std::string(s) + "'");
}

ProveProblem prove_problem_from_json(const json& j) {
    ProveProblem p;
    p.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
    p.informal = j.value("informal", "");
    p.formal_statement = j.at("formal_statement").get<std::string>();
    if (trim(p.formal_statement).empty()) throw Error("problem " + p.id + " has an empty formal_statement");
    return p;
}

std::vector<ProveProblem> load_problems(const std::string& path) {
    std::vector<ProveProblem> out;
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            out.push_back(prove_problem_from_json(json::parse(lines[i])));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), i + 1);
        } catch (const Error& e) {
            throw ParseError(e.what(), i + 1);
        }
    }
    return out;
}

void LoopConfig::validate() const {
    if (reflection_rounds < 0 || prover_max_retries < 0 || verifier_max_retries < 0 ||
        verifier_wait_seconds < 0)
        throw PreconditionError("loop counters must be non-negative");
}

json to_json(const LoopOutcome& o) {
    json attempts = json::array();
    for (const auto& a : o.attempts) {
        json j = {{"round", a.round}, {"source", a.source}, {"hints", a.hints}};
        j["verifier"] = a.verifier ? to_json(*a.verifier) : json(nullptr);
        if (a.retrieval_query) j["retrieval_query"] = *a.retrieval_query;
        if (a.error) j["error"] = *a.error;
        attempts.push_back(std::move(j));
    }
    json j = {{"id", o.problem_id}, {"solved", o.solved}, {"rounds_used", o.rounds_used},
              {"attempts", std::move(attempts)}};
    if (o.error) j["error"] = *o.error;
    return j;
}

namespace {

std::string diagnostics_text(const VerifierResult& r) {
    std::string out;
    for (const auto& d : r.diagnostics) {
        out += d.severity + " at line " + std::to_string(d.line) + ": " + d.message + "\n";
    }
    for (const auto& s : r.sorries) out += "unsolved goal at line " + std::to_string(s.line) + ": " + s.goal + "\n";
    return out;
}

}  // namespace

std::string prover_prompt(const ProveProblem& problem, const std::string& sketch_text,
                          const std::vector<JudgeBlock>& hints, const Attempt* previous) {
    std::string out;
    out += "Prove the following theorem in Lean 4 with Mathlib. Reply with the complete Lean code "
           "in a single ```lean block.\n\n";
    out += "Informal statement: " + problem.informal + "\n";
    out += "Formal statement:\n" + problem.formal_statement + "\n";
    if (!sketch_text.empty()) out += "\nProof sketch:\n" + sketch_text + "\n";
    if (!hints.empty()) {
        out += "\nPossibly useful library declarations:\n";
        for (std::size_t i = 0; i < hints.size(); ++i)
            out += "\n[" + std::to_string(i + 1) + "]\n" + render_block(hints[i]);
    }
    if (previous) {
        out += "\nYour previous attempt:\n```lean\n" + previous->source + "\n```\n";
        if (previous->verifier)
            out += "Verifier feedback:\n" + diagnostics_text(*previous->verifier);
        else if (previous->error)
            out += "Verifier feedback:\n" + *previous->error + "\n";
        out += "Fix the proof.\n";
    }
    return out;
}

std::string rewrite_prompt(const ProveProblem& problem, const Attempt& attempt) {
    std::string out;
    out += "A Lean proof attempt failed. Write one short natural-language search query describing "
           "the library lemma that would most help fix it. Reply with the query only.\n\n";
    out += "Formal statement:\n" + problem.formal_statement + "\n";
    out += "Attempt:\n" + attempt.source + "\n";
    if (attempt.verifier) out += "Verifier feedback:\n" + diagnostics_text(*attempt.verifier);
    return out;
}

std::string extract_proof_source(std::string_view reply) {
    auto open = reply.find("```");
    if (open == std::string_view::npos) return trim(reply);
    auto body = reply.find('\n', open);
    if (body == std::string_view::npos) return trim(reply);
    auto close = reply.find("```", body + 1);
    auto inner = reply.substr(body + 1, close == std::string_view::npos ? std::string_view::npos
                                                                         : close - body - 1);
    return trim(inner);
}

namespace {

class Loop {
public:
    Loop(const ProveProblem& problem, const LoopConfig& config, const ProverProviders& p)
        : problem_(problem), config_(config), p_(p) {}

    LoopOutcome run();

private:
    struct Hints {
        std::vector<std::string> names;
        std::optional<std::string> query;
        std::optional<std::string> error;
    };

    Hints retrieve(Retriever* retriever, const std::string& query);
    Hints initial_hints();
    Hints reflection_hints(const Attempt& attempt);
    std::string state_query(const Attempt* attempt);
    std::optional<VerifierResult> verify(const std::string& source, std::string& error);
    void sleep_between_checks();

    const ProveProblem& problem_;
    const LoopConfig& config_;
    const ProverProviders& p_;
    std::string sketch_text_;
};

Loop::Hints Loop::retrieve(Retriever* retriever, const std::string& query) {
    Hints h;
    h.query = query;
    if (!retriever) {
        h.error = "no retriever configured for mode " + to_string(config_.retrieval_mode);
        return h;
    }
    try {
        for (const auto& hit : retriever->retrieve(query, config_.hints_per_round).hits) {
            if (h.names.size() >= config_.hints_per_round) break;
            h.names.push_back(hit.decl_name);
        }
    } catch (const std::exception& e) {
        h.error = std::string("retrieval failed: ") + e.what();
    }
    return h;
}

std::string Loop::state_query(const Attempt* attempt) {
    if (attempt && attempt->verifier) {
        const auto& v = *attempt->verifier;
        // A live sorry already exposes the goal at that point.
        if (!v.sorries.empty()) return v.sorries.front().goal;
        if (const auto* err = v.first_error(); err && err->line > 1) {
            std::string prefix;
            std::size_t start = 0;
            for (int line = 1; line < err->line && start <= attempt->source.size(); ++line) {
                auto end = attempt->source.find('\n', start);
                if (end == std::string::npos) end = attempt->source.size();
                prefix.append(attempt->source, start, end - start);
                prefix += '\n';
                start = end + 1;
            }
            try {
                auto r = p_.verifier->check(prefix + "  sorry");
                if (!r.sorries.empty()) return r.sorries.front().goal;
            } catch (const ProviderError&) {
            }
        }
    }
    return extract_proof_state(problem_.formal_statement, *p_.verifier);
}

Loop::Hints Loop::initial_hints() {
    switch (config_.retrieval_mode) {
        case RetrievalMode::none:
        case RetrievalMode::standard_reflect:
        case RetrievalMode::finder_like_reflect:
            return {};
        case RetrievalMode::statement_based:
            return retrieve(p_.retriever, problem_.informal + "\n" + problem_.formal_statement);
        case RetrievalMode::state_based: {
            try {
                return retrieve(p_.state_retriever, state_query(nullptr));
            } catch (const std::exception& e) {
                Hints h;
                h.error = std::string("proof state extraction failed: ") + e.what();
                return h;
            }
        }
        case RetrievalMode::reasoning_sketch: {
            Hints h;
            if (!p_.reason) {
                h.error = "no reasoning runner configured";
                return h;
            }
            try {
                auto result = p_.reason(ReasoningTarget{problem_.informal, problem_.formal_statement});
                const BranchResult* source = nullptr;
                if (result.winner) source = &result.branches.at(static_cast<std::size_t>(*result.winner));
                for (const auto& b : result.branches)
                    if (!source && b.status != BranchStatus::early_stop && !b.final_sketch.steps.empty())
                        source = &b;
                if (source) sketch_text_ = sketch_to_text(source->final_sketch);
                for (const auto& e : result.ranking.entries) {
                    if (h.names.size() >= config_.hints_per_round) break;
                    h.names.push_back(e.decl_name);
                }
            } catch (const std::exception& e) {
                h.error = std::string("reasoning failed: ") + e.what();
            }
            return h;
        }
    }
    return {};
}

Loop::Hints Loop::reflection_hints(const Attempt& attempt) {
    switch (config_.retrieval_mode) {
        case RetrievalMode::none:
            return {};
        case RetrievalMode::standard_reflect:
        case RetrievalMode::finder_like_reflect:
        case RetrievalMode::reasoning_sketch: {
            if (!p_.query_rewriter) {
                Hints h;
                h.error = "no query rewriter configured";
                return h;
            }
            std::string query;
            try {
                TextRequest req{"query_rewrite", rewrite_prompt(problem_, attempt), {}, {}};
                query = trim(with_retries(config_.prover_max_retries,
                                          [&] { return p_.query_rewriter->generate(req); }));
            } catch (const std::exception& e) {
                Hints h;
                h.error = std::string("query rewrite failed: ") + e.what();
                return h;
            }
            if (query.empty()) query = problem_.informal;
            return retrieve(p_.retriever, query);
        }
        case RetrievalMode::statement_based: {
            std::string query = attempt.source;
            if (attempt.verifier) query += "\n" + diagnostics_text(*attempt.verifier);
            return retrieve(p_.retriever, query);
        }
        case RetrievalMode::state_based: {
            try {
                return retrieve(p_.state_retriever, state_query(&attempt));
            } catch (const std::exception& e) {
                Hints h;
                h.error = std::string("proof state extraction failed: ") + e.what();
                return h;
            }
        }
    }
    return {};
}

void Loop::sleep_between_checks() {
    std::chrono::duration<double> wait(config_.verifier_wait_seconds);
    if (p_.sleep)
        p_.sleep(wait);
    else
        std::this_thread::sleep_for(wait);
}

std::optional<VerifierResult> Loop::verify(const std::string& source, std::string& error) {
    for (int attempt = 0; attempt <= config_.verifier_max_retries; ++attempt) {
        if (attempt > 0) sleep_between_checks();
        try {
            return p_.verifier->check(source);
        } catch (const ProviderError& e) {
            error = e.what();
        }
    }
    return std::nullopt;
}

LoopOutcome Loop::run() {
    config_.validate();
    if (!p_.prover || !p_.verifier) throw PreconditionError("prover and verifier are required");

    LoopOutcome out;
    out.problem_id = problem_.id;
    Hints hints = initial_hints();
    std::optional<std::size_t> previous;

    for (int round = 0; round <= config_.reflection_rounds; ++round) {
        std::vector<JudgeBlock> blocks;
        for (const auto& name : hints.names)
            blocks.push_back(p_.corpus ? hydrate_block(*p_.corpus, name) : JudgeBlock{name, "", "", "", "", ""});

        Attempt attempt;
        attempt.round = round;
        attempt.hints = hints.names;
        attempt.retrieval_query = hints.query;
        if (hints.error) attempt.error = hints.error;

        TextRequest req{"prover", prover_prompt(problem_, sketch_text_, blocks,
                                            previous ? &out.attempts[*previous] : nullptr), {}, {}};
        try {
            attempt.source = extract_proof_source(
                with_retries(config_.prover_max_retries, [&] { return p_.prover->generate(req); }));
        } catch (const ProviderError& e) {
            out.error = std::string("prover unavailable: ") + e.what();
            break;
        }

        std::string verify_error;
        attempt.verifier = verify(attempt.source, verify_error);
        if (!attempt.verifier) attempt.error = "verifier unavailable: " + verify_error;
        out.attempts.push_back(std::move(attempt));
        const Attempt& current = out.attempts.back();
        out.rounds_used = round;
        if (!current.verifier) {
            out.error = "verifier unavailable: " + verify_error;
            break;
        }
        if (is_solved(current.verifier->ok, current.source)) {
            out.solved = true;
            break;
        }
        if (round == config_.reflection_rounds) break;
        previous = out.attempts.size() - 1;
        hints = reflection_hints(current);
    }
    return out;
}

}  // namespace

LoopOutcome run_reflection_loop(const ProveProblem& problem, const LoopConfig& config,
                                const ProverProviders& providers) {
    return Loop(problem, config, providers).run();
}

}  // namespace leansearch
