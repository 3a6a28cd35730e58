#include "leansearch/reasoning.hpp"

#include <regex>

namespace leansearch {

namespace {

constexpr const char* kSketchFormat =
    "Answer with a JSON object of the form\n"
    "{\"steps\": [{\"description\": \"the mathematical move\", \"context\": \"auxiliary facts "
    "it relies on\", \"query\": \"a short natural-language search phrase for one library "
    "result\"}]}\n";

std::string target_block(const ReasoningTarget& target) {
    std::string s;
    if (!target.informal.empty()) s += "Informal statement:\n" + target.informal + "\n\n";
    s += "Formal statement:\n" + target.formal + "\n";
    return s;
}

}  // namespace

std::string sketch_to_text(const Sketch& sketch) {
    std::string s;
    for (std::size_t i = 0; i < sketch.steps.size(); ++i) {
        const auto& st = sketch.steps[i];
        s += "Step " + std::to_string(i + 1) + ": " + st.description + "\n";
        if (st.context && !st.context->empty()) s += "  Context: " + *st.context + "\n";
        s += "  Query: " + st.query + "\n";
    }
    return s;
}

std::string sketch_prompt(const ReasoningTarget& target) {
    std::string p =
        "You are planning a proof of the theorem below against a large formal mathematics "
        "library. Propose a step-by-step proof outline. For each step give a natural-language "
        "description of the mathematical move, any auxiliary context it relies on, and a "
        "retrieval query phrased as a natural-language search for the library result the step "
        "needs. Do not write Lean code and do not name specific library lemmas; commit to which "
        "results should exist and how each contributes.\n\n";
    p += target_block(target);
    p += "\n";
    p += kSketchFormat;
    return p;
}

std::string revise_prompt(const ReasoningTarget& target, const Sketch& prior,
                          const JudgeVerdict& verdict) {
    std::string p =
        "You are revising a proof outline that a reviewer rejected because the library could not "
        "support it. Use the feedback to repair the failing steps or choose a different proof "
        "route. Do not write Lean code and do not name specific library lemmas.\n\n";
    p += target_block(target);
    p += "\nRejected outline (revision " + std::to_string(prior.revision) + "):\n";
    p += sketch_to_text(prior);
    p += "\nReviewer feedback:\n";
    for (const auto& f : verdict.feedback) {
        if (f.step_index > 0) p += "- Step " + std::to_string(f.step_index) + ": " + f.reason + "\n";
        else p += "- Overall: " + f.reason + "\n";
    }
    p += "\n";
    p += kSketchFormat;
    return p;
}

std::string filter_prompt(const SketchStep& step, const DeclarationRecord& candidate) {
    std::string p =
        "Decide whether the library declaration below is genuinely useful for the planned proof "
        "step. Judge this candidate on its own. Answer \"yes\" or \"no\".\n\n";
    p += "Step: " + step.description + "\n";
    if (step.context && !step.context->empty()) p += "Context: " + *step.context + "\n";
    p += "Query: " + step.query + "\n\n";
    p += "Candidate: " + candidate.name + "\n";
    p += "Kind: " + candidate.kind.label() + "\n";
    p += "Signature: " + utf8_prefix(candidate.signature, 800) + "\n";
    if (candidate.value) p += "Value: " + utf8_prefix(*candidate.value, 400) + "\n";
    p += "Informal statement: " + utf8_prefix(candidate.informal.value_or(""), 600) + "\n";
    return p;
}

std::string judge_prompt(const ReasoningTarget& target, const Sketch& sketch,
                         std::span<const RankedList> filtered, const CorpusSnapshot& corpus) {
    std::string p =
        "Decide whether the proof outline below is supportable by the library, given the "
        "declarations retrieved and vetted for each step. A step marked as having no usable "
        "results means the retriever found nothing useful for it. Answer with a JSON object "
        "{\"accepted\": true} or {\"accepted\": false, \"feedback\": [{\"step\": <number>, "
        "\"reason\": \"missing premise / different route suggested / unsatisfiable type "
        "constraint ...\"}]}.\n\n";
    p += target_block(target);
    p += "\nOutline:\n";
    for (std::size_t i = 0; i < sketch.steps.size(); ++i) {
        const auto& st = sketch.steps[i];
        p += "\nStep " + std::to_string(i + 1) + ": " + st.description + "\n";
        p += "Query: " + st.query + "\n";
        if (i >= filtered.size() || filtered[i].empty()) {
            p += "Retrieved: (no usable results)\n";
            continue;
        }
        p += "Retrieved:\n";
        for (const auto& h : filtered[i].hits) {
            const auto* rec = corpus.find(h.decl_name);
            p += "- " + h.decl_name;
            if (rec) {
                p += " [" + rec->kind.label() + "] " + utf8_prefix(rec->signature, 800);
                if (rec->informal) p += "\n  " + utf8_prefix(*rec->informal, 600);
            }
            p += "\n";
        }
    }
    return p;
}

Sketch parse_sketch(std::string_view text) {
    json doc;
    std::string body = strip_code_fences(text);
    try {
        auto first = body.find_first_of("[{");
        if (first != std::string::npos && body[first] == '[') doc = json::parse(body.substr(first));
        else doc = extract_json_object(body);
    } catch (const std::exception& e) {
        throw SketchParseError(std::string("sketch is not a JSON document: ") + e.what(),
                               std::string(text));
    }
    const json* steps = &doc;
    if (doc.is_object()) {
        if (!doc.contains("steps") || !doc["steps"].is_array())
            throw SketchParseError("sketch has no steps array", std::string(text));
        steps = &doc["steps"];
    }
    if (!steps->is_array()) throw SketchParseError("sketch has no steps array", std::string(text));
    if (steps->empty()) throw SketchParseError("sketch has zero steps", std::string(text));

    Sketch sketch;
    for (std::size_t i = 0; i < steps->size(); ++i) {
        const auto& s = (*steps)[i];
        const std::string where = "step " + std::to_string(i + 1);
        if (!s.is_object()) throw SketchParseError(where + " is not an object", std::string(text));
        SketchStep step;
        if (!s.contains("query") || !s["query"].is_string() ||
            trim(s["query"].get<std::string>()).empty())
            throw SketchParseError(where + " is missing a query", std::string(text));
        step.query = trim(s["query"].get<std::string>());
        if (s.contains("description") && s["description"].is_string())
            step.description = s["description"].get<std::string>();
        if (s.contains("context") && s["context"].is_string())
            step.context = s["context"].get<std::string>();
        sketch.steps.push_back(std::move(step));
    }
    return sketch;
}

std::optional<bool> parse_filter_decision(std::string_view text) {
    std::string t = to_lower(trim(strip_code_fences(text)));
    if (t.rfind("yes", 0) == 0) return true;
    if (t.rfind("no", 0) == 0) return false;
    try {
        json j = extract_json_object(t);
        for (const char* key : {"relevant", "keep", "useful"})
            if (j.contains(key) && j[key].is_boolean()) return j[key].get<bool>();
    } catch (const ParseError&) {
    }
    return std::nullopt;
}

JudgeVerdict parse_verdict(std::string_view text, std::span<const RankedList> filtered) {
    JudgeVerdict v;
    bool parsed = false;
    const std::string body = trim(strip_code_fences(text));
    if (body.find('{') != std::string::npos) {
        try {
            json j = extract_json_object(body);
            if (j.contains("accepted") && j["accepted"].is_boolean()) {
                v.accepted = j["accepted"].get<bool>();
                parsed = true;
            } else if (j.contains("verdict") && j["verdict"].is_string()) {
                auto s = to_lower(j["verdict"].get<std::string>());
                if (s == "accept" || s == "reject") {
                    v.accepted = s == "accept";
                    parsed = true;
                }
            }
            if (parsed && j.contains("feedback") && j["feedback"].is_array()) {
                for (const auto& f : j["feedback"]) {
                    StepFeedback fb;
                    if (f.is_string()) {
                        fb.reason = f.get<std::string>();
                    } else if (f.is_object()) {
                        fb.step_index = f.value("step", f.value("step_index", 0));
                        fb.reason = f.value("reason", "");
                    }
                    if (!fb.reason.empty()) v.feedback.push_back(std::move(fb));
                }
            }
        } catch (const std::exception&) {
            parsed = false;
        }
    }
    if (!parsed) {
        const std::string lower = to_lower(body);
        if (lower.rfind("accept", 0) == 0) {
            v.accepted = true;
            parsed = true;
        } else if (lower.rfind("reject", 0) == 0) {
            v.accepted = false;
            parsed = true;
            static const std::regex step_re(R"(step\s+(\d+)\s*:\s*([^;\n]+))", std::regex::icase);
            for (std::sregex_iterator it(body.begin(), body.end(), step_re), end; it != end; ++it)
                v.feedback.push_back({std::stoi((*it)[1]), trim((*it)[2].str())});
        }
    }
    if (!parsed) throw ParseError("unrecognised judge verdict", 0);

    if (v.accepted) {
        v.feedback.clear();
    } else if (v.feedback.empty()) {
        for (std::size_t i = 0; i < filtered.size(); ++i)
            if (filtered[i].empty())
                v.feedback.push_back({static_cast<int>(i + 1),
                                      "no usable results were retrieved for this step"});
        if (v.feedback.empty()) v.feedback.push_back({0, "rejected without feedback"});
    }
    return v;
}

namespace {

Sketch request_sketch(const std::string& role, const std::string& prompt, TextProvider& provider,
                      const RoleOptions& options) {
    TextRequest req{role, prompt, options.params, options.stop};
    std::string raw;
    for (int attempt = 0;; ++attempt) {
        raw = with_retries(options.provider_retries, [&] { return provider.generate(req); });
        try {
            return parse_sketch(raw);
        } catch (const SketchParseError&) {
            if (attempt >= options.parse_retries) throw;
        }
    }
}

}  // namespace

Sketch generate_sketch(const ReasoningTarget& target, TextProvider& provider,
                       const RoleOptions& options) {
    if (trim(target.formal).empty()) throw PreconditionError("formal statement is empty");
    Sketch s = request_sketch("sketch", sketch_prompt(target), provider, options);
    s.revision = 0;
    return s;
}

Sketch revise_sketch(const ReasoningTarget& target, const Sketch& prior, const JudgeVerdict& verdict,
                     TextProvider& provider, int max_revisions, const RoleOptions& options) {
    if (verdict.accepted) throw PreconditionError("cannot revise an accepted sketch");
    if (prior.revision >= max_revisions)
        throw PreconditionError("sketch already at the revision cap (" +
                                std::to_string(max_revisions) + ")");
    Sketch s = request_sketch("revise", revise_prompt(target, prior, verdict), provider, options);
    s.revision = prior.revision + 1;
    return s;
}

std::optional<RankedList> filter_candidates(const SketchStep& step, const RankedList& hits,
                                            const CorpusSnapshot& corpus, TextProvider& provider,
                                            const RoleOptions& options,
                                            std::vector<std::string>* dropped) {
    RankedList out{hits.query, {}, Stage::filtered};
    for (const auto& h : hits.hits) {
        if (options.stop.stop_requested()) return std::nullopt;
        const auto* rec = corpus.find(h.decl_name);
        if (!rec) {
            if (dropped) dropped->push_back(h.decl_name);
            continue;
        }
        TextRequest req{"filter", filter_prompt(step, *rec), options.params, options.stop};
        std::optional<bool> keep;
        try {
            keep = with_retries(options.provider_retries, [&] {
                auto decision = parse_filter_decision(provider.generate(req));
                if (!decision) throw ProviderError("unparseable filter decision");
                return decision;
            });
        } catch (const ProviderError&) {
            if (dropped) dropped->push_back(h.decl_name);
            continue;
        }
        if (*keep) out.hits.push_back(h);
    }
    out.renumber();
    return out;
}

JudgeVerdict judge_sketch(const ReasoningTarget& target, const Sketch& sketch,
                          std::span<const RankedList> filtered, const CorpusSnapshot& corpus,
                          TextProvider& provider, const RoleOptions& options) {
    if (filtered.size() != sketch.steps.size())
        throw PreconditionError("judge needs one filtered list per sketch step");
    TextRequest req{"judge", judge_prompt(target, sketch, filtered, corpus), options.params,
                    options.stop};
    for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
        std::string raw = with_retries(options.provider_retries, [&] { return provider.generate(req); });
        try {
            return parse_verdict(raw, filtered);
        } catch (const ParseError&) {
        }
    }
    return JudgeVerdict{false, {{0, "judge unparseable"}}};
}

}  // namespace leansearch
