#pragma once

#include "leansearch/util.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

namespace leansearch {

// Transport failure, remote error, or a mock configured to fail.
class ProviderError : public Error {
public:
    using Error::Error;
};

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 2048;
    std::optional<std::uint64_t> seed;
};

struct TextRequest {
    std::string role;  // "informalize", "sketch", "filter", "judge", ...
    std::string prompt;
    GenerationParams params;
    // Lets long-running providers abandon work; callers never rely on it.
    std::stop_token stop;
};

class TextProvider {
public:
    virtual ~TextProvider() = default;
    virtual std::string generate(const TextRequest& request) = 0;
    virtual std::string model_id() const = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<float> embed(std::string_view text) = 0;
    virtual std::string model_id() const = 0;
};

struct RerankRequest {
    std::string query;
    std::string passage;
    std::string kind;         // declaration kind label of the candidate
    std::string instruction;  // kind-aware (or kind-agnostic) task instruction
};

class RerankProvider {
public:
    virtual ~RerankProvider() = default;
    // Relevance probability P(yes) in [0, 1].
    virtual double score(const RerankRequest& request) = 0;
    virtual std::string model_id() const = 0;
};

// Calls f up to retries + 1 times, retrying only on ProviderError.
template <class F>
auto with_retries(int retries, F&& f) -> decltype(f()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return f();
        } catch (const ProviderError&) {
            if (attempt >= retries) throw;
        }
    }
}

// ---------------------------------------------------------------------------
// HTTP providers (OpenAI-compatible chat/embeddings, Jina/vLLM-style rerank).

struct Endpoint {
    std::string url;       // e.g. "https://api.example.com/v1"
    std::string model;
    std::string auth_env;  // name of the env var holding the bearer token
    int timeout_seconds = 120;
};

// POSTs `body` to endpoint.url + path and returns the parsed response.
json http_post_json(const Endpoint& endpoint, std::string_view path, const json& body);

class HttpTextProvider final : public TextProvider {
public:
    explicit HttpTextProvider(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string generate(const TextRequest& request) override;
    std::string model_id() const override { return endpoint_.model; }

private:
    Endpoint endpoint_;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<float> embed(std::string_view text) override;
    std::string model_id() const override { return endpoint_.model; }

private:
    Endpoint endpoint_;
};

class HttpRerankProvider final : public RerankProvider {
public:
    explicit HttpRerankProvider(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    double score(const RerankRequest& request) override;
    std::string model_id() const override { return endpoint_.model; }

private:
    Endpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Deterministic offline providers.

// Records every request it sees; shared by the mock providers.
class RequestLog {
public:
    void record(const TextRequest& r) {
        std::lock_guard lk(mu_);
        requests_.push_back(r);
    }
    std::vector<TextRequest> snapshot() const {
        std::lock_guard lk(mu_);
        return requests_;
    }
    std::size_t size() const {
        std::lock_guard lk(mu_);
        return requests_.size();
    }

private:
    mutable std::mutex mu_;
    std::vector<TextRequest> requests_;
};

// Responses chosen by the first matching rule. A rule matches when the prompt
// fingerprint equals `fingerprint`, or when every `contains` needle occurs in
// the prompt (and the role matches, if set). A rule with `error` throws
// ProviderError instead of answering.
struct ScriptRule {
    std::string role;
    std::string fingerprint;
    std::vector<std::string> contains;
    std::string response;
    std::optional<std::string> error;
};

class ScriptedTextProvider final : public TextProvider {
public:
    explicit ScriptedTextProvider(std::vector<ScriptRule> rules,
                                  std::optional<std::string> fallback = std::nullopt,
                                  std::string model = "scripted")
        : rules_(std::move(rules)), fallback_(std::move(fallback)), model_(std::move(model)) {}

    // {"rules": [{"contains": "..." | [...], "role", "fingerprint", "response", "error"}],
    //  "default": "..."}
    static std::unique_ptr<ScriptedTextProvider> from_json(const json& script);

    std::string generate(const TextRequest& request) override;
    std::string model_id() const override { return model_; }
    const RequestLog& log() const { return log_; }

private:
    std::vector<ScriptRule> rules_;
    std::optional<std::string> fallback_;
    std::string model_;
    RequestLog log_;
};

class FunctionTextProvider final : public TextProvider {
public:
    using Fn = std::function<std::string(const TextRequest&)>;
    explicit FunctionTextProvider(Fn fn, std::string model = "function")
        : fn_(std::move(fn)), model_(std::move(model)) {}
    std::string generate(const TextRequest& request) override {
        log_.record(request);
        return fn_(request);
    }
    std::string model_id() const override { return model_; }
    const RequestLog& log() const { return log_; }

private:
    Fn fn_;
    std::string model_;
    RequestLog log_;
};

// Lower-cased alphanumeric word tokens; identifiers split on '.', '_' etc.
std::vector<std::string> word_tokens(std::string_view text);

// Feature-hashed bag of words, L2-normalised. Deterministic on every platform.
class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 64) : dim_(dim) {}
    std::vector<float> embed(std::string_view text) override;
    std::string model_id() const override { return "hash-embedder-" + std::to_string(dim_); }

private:
    std::size_t dim_;
};

class FunctionEmbedder final : public EmbeddingProvider {
public:
    using Fn = std::function<std::vector<float>(std::string_view)>;
    explicit FunctionEmbedder(Fn fn, std::string model = "function-embedder")
        : fn_(std::move(fn)), model_(std::move(model)) {}
    std::vector<float> embed(std::string_view text) override { return fn_(text); }
    std::string model_id() const override { return model_; }

private:
    Fn fn_;
    std::string model_;
};

// Fraction of distinct query tokens present in the passage.
class OverlapReranker final : public RerankProvider {
public:
    double score(const RerankRequest& request) override;
    std::string model_id() const override { return "overlap-reranker"; }
};

class FunctionReranker final : public RerankProvider {
public:
    using Fn = std::function<double(const RerankRequest&)>;
    explicit FunctionReranker(Fn fn) : fn_(std::move(fn)) {}
    double score(const RerankRequest& request) override { return fn_(request); }
    std::string model_id() const override { return "function-reranker"; }

private:
    Fn fn_;
};

// Builds providers from a config node. Relative script paths resolve against
// `base_dir`.
//   text:      {"type": "http", "url", "model", "auth_env", "timeout"}
//              {"type": "scripted", "script": "file.json"} | {"type": "scripted", "rules": [...]}
//   embedding: {"type": "http", ...} | {"type": "hash", "dim": 64}
//   rerank:    {"type": "http", ...} | {"type": "overlap"}
std::unique_ptr<TextProvider> make_text_provider(const json& spec, const std::string& base_dir);
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const json& spec,
                                                           const std::string& base_dir);
std::unique_ptr<RerankProvider> make_rerank_provider(const json& spec,
                                                     const std::string& base_dir);
Endpoint endpoint_from_json(const json& spec);

}  // namespace leansearch
