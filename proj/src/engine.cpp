#include "leansearch/service.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

namespace leansearch {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTopLevelKeys = {"corpus", "index",   "template", "providers",
                                             "search", "reasoning", "loop",   "server"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("unknown key '" + it.key() + "' in " + where + " (accepted: " + list + ")");
        }
}

template <class T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j, std::string base_dir) {
    if (!j.is_object()) throw ConfigError("config must be an object");
    reject_unknown(j, kTopLevelKeys, "config");
    ServiceConfig c;
    c.base_dir = std::move(base_dir);
    try {
        read_into(j, "corpus", c.corpus_path);
        read_into(j, "index", c.index_path);
        if (j.contains("template")) {
            const auto& t = j["template"];
            reject_unknown(t, {"kind_aware"}, "template");
            read_into(t, "kind_aware", c.kind_aware_template);
        }
        if (j.contains("search")) {
            const auto& s = j["search"];
            reject_unknown(s, {"rerank", "rerank_pool", "kind_aware"}, "search");
            read_into(s, "rerank", c.search.rerank);
            read_into(s, "rerank_pool", c.search.rerank_pool);
            read_into(s, "kind_aware", c.search.kind_aware);
        }
        if (j.contains("reasoning")) {
            const auto& r = j["reasoning"];
            reject_unknown(r, {"budget", "max_revisions", "reflection_enabled", "per_step_k",
                               "parse_retries", "provider_retries", "sketch_temperature"},
                           "reasoning");
            read_into(r, "budget", c.reasoning.budget);
            read_into(r, "max_revisions", c.reasoning.max_revisions);
            read_into(r, "reflection_enabled", c.reasoning.reflection_enabled);
            read_into(r, "per_step_k", c.reasoning.per_step_k);
            read_into(r, "parse_retries", c.reasoning.parse_retries);
            read_into(r, "provider_retries", c.reasoning.provider_retries);
            read_into(r, "sketch_temperature", c.reasoning.sketch_temperature);
        }
        if (j.contains("loop")) {
            const auto& l = j["loop"];
            reject_unknown(l, {"reflection_rounds", "prover_max_retries", "verifier_max_retries",
                               "verifier_wait_seconds", "retrieval_mode", "hints_per_round"},
                           "loop");
            read_into(l, "reflection_rounds", c.loop.reflection_rounds);
            read_into(l, "prover_max_retries", c.loop.prover_max_retries);
            read_into(l, "verifier_max_retries", c.loop.verifier_max_retries);
            read_into(l, "verifier_wait_seconds", c.loop.verifier_wait_seconds);
            read_into(l, "hints_per_round", c.loop.hints_per_round);
            if (l.contains("retrieval_mode"))
                c.loop.retrieval_mode = retrieval_mode_from_string(l["retrieval_mode"].get<std::string>());
        }
        if (j.contains("server")) {
            const auto& s = j["server"];
            reject_unknown(s, {"host", "port", "workers", "ui_dir", "auth_token_env"}, "server");
            read_into(s, "host", c.server.host);
            read_into(s, "port", c.server.port);
            read_into(s, "workers", c.server.workers);
            read_into(s, "ui_dir", c.server.ui_dir);
            read_into(s, "auth_token_env", c.server.auth_token_env);
        }
        if (j.contains("providers"))
            for (auto it = j["providers"].begin(); it != j["providers"].end(); ++it) {
                if (!it.value().is_object() || !it.value().contains("type"))
                    throw ConfigError("provider '" + it.key() + "' needs a \"type\"");
                c.providers[it.key()] = it.value();
            }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (c.search.rerank_pool == 0) throw ConfigError("search.rerank_pool must be positive");
    if (c.reasoning.budget < 1) throw ConfigError("reasoning.budget must be at least 1");
    if (c.reasoning.max_revisions < 0) throw ConfigError("reasoning.max_revisions must be non-negative");
    if (c.server.workers == 0) throw ConfigError("server.workers must be positive");
    c.loop.validate();
    return c;
}

ServiceConfig ServiceConfig::load(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    auto dir = fs::absolute(path).parent_path().string();
    auto c = from_json(j, dir);
    c.apply_env_overrides();
    return c;
}

void ServiceConfig::apply_env_overrides() {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    // Paths from the environment are relative to the working directory.
    if (auto v = env("LEANSEARCH_CORPUS")) corpus_path = fs::absolute(*v).string();
    if (auto v = env("LEANSEARCH_INDEX")) index_path = fs::absolute(*v).string();
    if (auto v = env("LEANSEARCH_UI_DIR")) server.ui_dir = fs::absolute(*v).string();
    if (auto v = env("LEANSEARCH_HOST")) server.host = *v;
    if (auto v = env("LEANSEARCH_PORT")) {
        try {
            server.port = std::stoi(*v);
        } catch (const std::exception&) {
            throw ConfigError("LEANSEARCH_PORT is not a number: " + *v);
        }
    }
}

std::string ServiceConfig::resolve(const std::string& path) const {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
}

const json& ServiceConfig::role(const std::string& name) const {
    auto it = providers.find(name);
    if (it == providers.end()) throw ConfigError("provider configuration missing for role '" + name + "'");
    return it->second;
}

TemplateConfig ServiceConfig::template_config() const {
    auto t = TemplateConfig::defaults();
    return kind_aware_template ? t : t.kind_blind();
}

// ---------------------------------------------------------------------------

Engine::Engine(ServiceConfig config) : config_(std::move(config)) {}

const CorpusSnapshot& Engine::corpus() {
    std::lock_guard lk(mu_);
    if (!corpus_) {
        if (config_.corpus_path.empty()) throw ConfigError("no corpus path configured");
        corpus_ = load_corpus(config_.resolve(config_.corpus_path));
    }
    return *corpus_;
}

EmbeddingProvider& Engine::embedder() {
    std::lock_guard lk(mu_);
    if (!embedder_) embedder_ = make_embedding_provider(config_.role("embedder"), config_.base_dir);
    return *embedder_;
}

RerankProvider* Engine::reranker() {
    std::lock_guard lk(mu_);
    if (!reranker_loaded_) {
        if (config_.has_role("reranker"))
            reranker_ = make_rerank_provider(config_.role("reranker"), config_.base_dir);
        reranker_loaded_ = true;
    }
    return reranker_.get();
}

const Searcher& Engine::searcher() {
    std::lock_guard lk(mu_);
    if (!searcher_) {
        if (config_.index_path.empty()) throw ConfigError("no index path configured");
        auto tmpl = config_.template_config();
        index_ = VectorIndex::load(config_.resolve(config_.index_path));
        const auto& prov = index_->provenance();
        if (prov.embedder_model != embedder().model_id())
            throw ConfigError("index was built with embedder '" + prov.embedder_model +
                              "' but the configured embedder is '" + embedder().model_id() + "'");
        if (prov.template_version != tmpl.version)
            throw ConfigError("index was built with template '" + prov.template_version +
                              "' but the configured template is '" + tmpl.version + "'");
        searcher_ = std::make_unique<Searcher>(*index_, compose_passages(corpus(), tmpl), embedder(),
                                               reranker(), tmpl);
    }
    return *searcher_;
}

TextProvider& Engine::text_provider(const std::string& role) {
    std::lock_guard lk(mu_);
    auto& slot = text_[role];
    if (!slot) slot = make_text_provider(config_.role(role), config_.base_dir);
    return *slot;
}

VerifierClient& Engine::verifier() {
    std::lock_guard lk(mu_);
    if (!verifier_) verifier_ = make_verifier(config_.role("verifier"), config_.base_dir);
    return *verifier_;
}

Retriever& Engine::retriever(const std::string& role) {
    std::lock_guard lk(mu_);
    auto& slot = retrievers_[role];
    if (!slot) {
        std::string type = "local";
        if (config_.has_role(role)) type = config_.role(role).value("type", "local");
        if (type == "local")
            slot = std::make_unique<SearchRetriever>(searcher(), config_.search);
        else if (type == "http")
            slot = std::make_unique<HttpRetriever>(endpoint_from_json(config_.role(role)));
        else
            throw ConfigError("unknown retriever type '" + type + "' for role '" + role + "'");
    }
    return *slot;
}

RankedList Engine::search(std::string_view query, std::size_t k, const SearchOptions& opts) {
    const auto& s = searcher();
    if (opts.rerank && !reranker()) throw ConfigError("reranking requested but no reranker is configured");
    return s.search(query, k, opts);
}

ReasoningProviders Engine::reasoning_providers() {
    ReasoningProviders p;
    p.retriever = &retriever("local");
    p.corpus = &corpus();
    p.sketcher = &text_provider("sketcher");
    p.filter = &text_provider("filter");
    if (config_.has_role("judge")) p.judge = &text_provider("judge");
    if (config_.has_role("reviser")) p.reviser = &text_provider("reviser");
    return p;
}

ReasoningResult Engine::reason(const ReasoningTarget& target, const ReasoningConfig& cfg, TraceLog* live,
                               std::stop_token stop) {
    auto p = reasoning_providers();
    if (cfg.reflection_enabled) {
        if (!p.judge) throw ConfigError("provider configuration missing for role 'judge'");
        if (!p.reviser) throw ConfigError("provider configuration missing for role 'reviser'");
    }
    return run_reasoning(target, p, cfg, live, std::move(stop));
}

ProverProviders Engine::prover_providers(const LoopConfig& loop) {
    ProverProviders p;
    p.prover = &text_provider("prover");
    p.verifier = &verifier();
    if (!config_.corpus_path.empty()) p.corpus = &corpus();
    switch (loop.retrieval_mode) {
        case RetrievalMode::none:
            break;
        case RetrievalMode::standard_reflect:
        case RetrievalMode::finder_like_reflect:
        case RetrievalMode::reasoning_sketch:
            p.query_rewriter = &text_provider("query_rewriter");
            p.retriever = &retriever("retriever");
            if (loop.retrieval_mode == RetrievalMode::reasoning_sketch)
                p.reason = [this](const ReasoningTarget& t) { return reason(t, config_.reasoning); };
            break;
        case RetrievalMode::statement_based:
            p.retriever = &retriever("retriever");
            break;
        case RetrievalMode::state_based:
            p.state_retriever = &retriever("state_retriever");
            break;
    }
    return p;
}

}  // namespace leansearch
