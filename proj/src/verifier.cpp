#include "leansearch/prover.hpp"

#include <filesystem>
#include <regex>

namespace leansearch {

const Diagnostic* VerifierResult::first_error() const {
    const Diagnostic* best = nullptr;
    for (const auto& d : diagnostics) {
        if (d.severity != "error") continue;
        // Unknown positions sort last.
        auto key = [](const Diagnostic& x) {
            return std::pair{x.line > 0 ? x.line : INT32_MAX, x.column};
        };
        if (!best || key(d) < key(*best)) best = &d;
    }
    return best;
}

json to_json(const VerifierResult& r) {
    json diags = json::array();
    for (const auto& d : r.diagnostics)
        diags.push_back({{"line", d.line}, {"column", d.column}, {"severity", d.severity},
                         {"message", d.message}});
    json sorries = json::array();
    for (const auto& s : r.sorries) sorries.push_back({{"line", s.line}, {"goal", s.goal}});
    return {{"ok", r.ok}, {"diagnostics", diags}, {"sorries", sorries}};
}

VerifierResult verifier_result_from_json(const json& j) {
    VerifierResult r;
    r.ok = j.value("ok", false);
    for (const auto& d : j.value("diagnostics", json::array()))
        r.diagnostics.push_back({d.value("line", 0), d.value("column", 0),
                                 d.value("severity", "error"), d.value("message", "")});
    for (const auto& s : j.value("sorries", json::array()))
        r.sorries.push_back({s.value("line", 0), s.value("goal", "")});
    return r;
}

VerifierResult HttpVerifierClient::check(std::string_view source) {
    json res = http_post_json(endpoint_, "/check", {{"source", source}});
    try {
        return verifier_result_from_json(res);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected verifier response shape: ") + e.what());
    }
}

std::unique_ptr<ScriptedVerifier> ScriptedVerifier::from_json(const json& j) {
    std::vector<Rule> rules;
    for (const auto& r : j.value("rules", json::array())) {
        Rule rule;
        if (r.contains("contains")) {
            if (r["contains"].is_string())
                rule.contains.push_back(r["contains"].get<std::string>());
            else
                rule.contains = r["contains"].get<std::vector<std::string>>();
        }
        if (r.contains("error"))
            rule.error = r["error"].get<std::string>();
        else
            rule.result = verifier_result_from_json(r);
        rules.push_back(std::move(rule));
    }
    return std::make_unique<ScriptedVerifier>(std::move(rules), j.value("default_goal", "⊢ goal"));
}

VerifierResult ScriptedVerifier::check(std::string_view source) {
    {
        std::lock_guard lk(mu_);
        calls_.emplace_back(source);
    }
    for (const auto& rule : rules_) {
        bool match = std::all_of(rule.contains.begin(), rule.contains.end(),
                                 [&](const std::string& needle) { return source.find(needle) != std::string_view::npos; });
        if (!match) continue;
        if (rule.error) throw ProviderError(*rule.error);
        return *rule.result;
    }

    VerifierResult r;
    r.ok = true;
    auto stripped = strip_comments(source);
    if (stripped.unterminated_comment) {
        r.ok = false;
        r.diagnostics.push_back({0, 0, "error", "unterminated comment"});
    }
    int line_no = 0;
    std::size_t start = 0;
    const std::string& text = stripped.text;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        ++line_no;
        if (line.find("ERROR") != std::string_view::npos) {
            r.ok = false;
            r.diagnostics.push_back({line_no, 0, "error", "scripted error marker"});
        }
        if (contains_sorry_token(line)) {
            r.sorries.push_back({line_no, default_goal_});
            r.diagnostics.push_back({line_no, 0, "warning", "declaration uses 'sorry'"});
        }
        start = end + 1;
    }
    return r;
}

std::vector<std::string> ScriptedVerifier::calls() const {
    std::lock_guard lk(mu_);
    return calls_;
}

VerifierResult GatedVerifier::check(std::string_view source) {
    gate_.acquire();
    struct Release {
        std::counting_semaphore<1024>& g;
        ~Release() { g.release(); }
    } release{gate_};
    return inner_.check(source);
}

std::unique_ptr<VerifierClient> make_verifier(const json& spec, const std::string& base_dir) {
    const std::string type = spec.value("type", "");
    if (type == "http") return std::make_unique<HttpVerifierClient>(endpoint_from_json(spec));
    if (type == "scripted") {
        if (spec.contains("script")) {
            std::filesystem::path p = spec["script"].get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            return ScriptedVerifier::from_json(json::parse(read_file(p.string())));
        }
        return ScriptedVerifier::from_json(spec);
    }
    throw Error("unknown verifier type '" + type + "'");
}

// ---------------------------------------------------------------------------

std::string with_sorry_body(std::string_view formal_statement) {
    std::string s = trim(formal_statement);
    static const std::regex sorry_tail(R"(:=\s*(by\s+)?sorry$)");
    if (std::regex_search(s, sorry_tail)) return s;
    static const std::regex open_tail(R"(:=\s*by$)");
    if (std::regex_search(s, open_tail)) return s + " sorry";
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, ":=") == 0) return s + " sorry";
    return s + " := sorry";
}

std::string extract_proof_state(std::string_view formal_statement, VerifierClient& verifier) {
    auto result = verifier.check(with_sorry_body(formal_statement));
    if (result.sorries.empty()) {
        std::string msg = "verifier reported no sorry goal";
        for (const auto& d : result.diagnostics)
            if (d.severity == "error") msg += "; " + d.message;
        throw ProofStateError(msg);
    }
    const SorryGoal* first = &result.sorries.front();
    for (const auto& s : result.sorries)
        if (s.line > 0 && (first->line <= 0 || s.line < first->line)) first = &s;
    return first->goal;
}

}  // namespace leansearch
