#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/evaluation.hpp"
#include "leansearch/prover.hpp"
#include "leansearch/providers.hpp"
#include "leansearch/reasoning.hpp"
#include "leansearch/retrieval.hpp"
#include "leansearch/util.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace leansearch {

// ---------------------------------------------------------------------------
// Configuration

class ConfigError : public Error {
public:
    using Error::Error;
};

struct ServerSettings {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t workers = 2;
    std::string ui_dir;          // served under /ui when set
    std::string auth_token_env;  // when set, /v1 requires "Authorization: Bearer <token>"
};

struct ServiceConfig {
    std::string base_dir;  // relative paths resolve against this
    std::string corpus_path;
    std::string index_path;
    bool kind_aware_template = true;
    SearchOptions search;
    ReasoningConfig reasoning;
    LoopConfig loop;
    ServerSettings server;
    // Role name -> provider spec. Roles: embedder, reranker, informalizer,
    // informalizer_fallback, sketcher, filter, judge, reviser, prover,
    // query_rewriter, verifier, ranking_judge, retriever, state_retriever.
    std::map<std::string, json> providers;

    static ServiceConfig from_json(const json& j, std::string base_dir);
    // Reads the file, then applies LEANSEARCH_* environment overrides.
    static ServiceConfig load(const std::string& path);
    void apply_env_overrides();

    std::string resolve(const std::string& path) const;
    bool has_role(const std::string& role) const { return providers.count(role) > 0; }
    const json& role(const std::string& role) const;  // throws ConfigError
    TemplateConfig template_config() const;
};

// ---------------------------------------------------------------------------
// Engine: corpus, index and providers wired together

class Engine {
public:
    explicit Engine(ServiceConfig config);

    const ServiceConfig& config() const { return config_; }

    // Loaded on first use.
    const CorpusSnapshot& corpus();
    const Searcher& searcher();
    EmbeddingProvider& embedder();
    RerankProvider* reranker();
    TextProvider& text_provider(const std::string& role);
    VerifierClient& verifier();
    Retriever& retriever(const std::string& role);

    RankedList search(std::string_view query, std::size_t k, const SearchOptions& opts);
    ReasoningProviders reasoning_providers();
    ReasoningResult reason(const ReasoningTarget& target, const ReasoningConfig& cfg,
                           TraceLog* live = nullptr, std::stop_token stop = {});
    ProverProviders prover_providers(const LoopConfig& loop);

private:
    ServiceConfig config_;
    std::recursive_mutex mu_;
    std::optional<CorpusSnapshot> corpus_;
    std::optional<VectorIndex> index_;
    std::unique_ptr<Searcher> searcher_;
    std::unique_ptr<EmbeddingProvider> embedder_;
    std::unique_ptr<RerankProvider> reranker_;
    bool reranker_loaded_ = false;
    std::map<std::string, std::unique_ptr<TextProvider>> text_;
    std::unique_ptr<VerifierClient> verifier_;
    std::map<std::string, std::unique_ptr<Retriever>> retrievers_;
};

// ---------------------------------------------------------------------------
// Background jobs

// Fixed worker pool. Destruction stops intake and drains queued jobs.
class JobExecutor {
public:
    explicit JobExecutor(std::size_t workers);
    ~JobExecutor();
    JobExecutor(const JobExecutor&) = delete;
    JobExecutor& operator=(const JobExecutor&) = delete;

    void submit(std::function<void(std::stop_token)> job);
    // Stops intake, asks running jobs to cancel if `cancel`, and joins.
    void shutdown(bool cancel = false);

private:
    void work();

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void(std::stop_token)>> queue_;
    bool closing_ = false;
    std::stop_source cancel_;
    std::vector<std::jthread> threads_;
};

enum class JobStatus { running, done, error };
std::string to_string(JobStatus s);

struct ReasonJob {
    std::string id;
    ReasoningTarget target;
    ReasoningConfig config;
    TraceLog trace;
    mutable std::mutex mu;
    JobStatus status = JobStatus::running;
    std::optional<json> result;
    std::optional<std::string> error;

    json status_json() const;
};

// ---------------------------------------------------------------------------
// HTTP API

struct HttpResponse {
    int status = 200;
    json body;
};

// Transport-independent request handling; the HTTP server and tests share it.
class Api {
public:
    Api(Engine& engine, std::size_t workers);
    ~Api();

    HttpResponse health();
    HttpResponse search(const std::string& body);
    HttpResponse submit_reason(const std::string& body);
    HttpResponse reason_status(const std::string& id);
    HttpResponse reason_trace(const std::string& id, std::size_t since);
    HttpResponse decl(const std::string& name);

    // Blocks until the job leaves the running state (tests and drain).
    std::optional<JobStatus> wait(const std::string& id, std::chrono::milliseconds timeout);
    void shutdown();

private:
    std::shared_ptr<ReasonJob> find(const std::string& id);

    Engine& engine_;
    std::mutex mu_;
    std::condition_variable done_cv_;
    std::map<std::string, std::shared_ptr<ReasonJob>> jobs_;
    std::size_t next_id_ = 1;
    JobExecutor executor_;
};

class HttpServer {
public:
    HttpServer(Engine& engine, const ServerSettings& settings);
    ~HttpServer();

    // Binds (port 0 picks a free port) and serves on a background thread.
    int start();
    void stop();
    int port() const { return port_; }
    Api& api() { return *api_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::unique_ptr<Api> api_;
    ServerSettings settings_;
    int port_ = 0;
    std::jthread thread_;
};

// ---------------------------------------------------------------------------
// CLI

// Returns the process exit code: 0 ok, 1 runtime failure, 2 usage error.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace leansearch
