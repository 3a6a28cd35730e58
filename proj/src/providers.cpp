#include "leansearch/providers.hpp"

#include <httplib.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

namespace leansearch {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError("endpoint url lacks a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

}  // namespace

json http_post_json(const Endpoint& endpoint, std::string_view path, const json& body) {
    auto url = split_url(endpoint.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::min(endpoint.timeout_seconds, 30), 0);
    client.set_read_timeout(endpoint.timeout_seconds, 0);
    client.set_write_timeout(endpoint.timeout_seconds, 0);

    httplib::Headers headers;
    if (!endpoint.auth_env.empty()) {
        const char* token = std::getenv(endpoint.auth_env.c_str());
        if (!token || !*token)
            throw ProviderError("environment variable " + endpoint.auth_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Post(url.prefix + std::string(path), headers, body.dump(), "application/json");
    if (!res) throw ProviderError("POST " + endpoint.url + std::string(path) + ": " +
                                  httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw ProviderError("POST " + endpoint.url + std::string(path) + ": HTTP " +
                            std::to_string(res->status) + " " + res->body.substr(0, 300));
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what());
    }
}

std::string HttpTextProvider::generate(const TextRequest& request) {
    json body = {
        {"model", endpoint_.model},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.params.temperature},
        {"max_tokens", request.params.max_tokens},
    };
    if (request.params.seed) body["seed"] = *request.params.seed;
    json res = http_post_json(endpoint_, "/chat/completions", body);
    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
    }
}

std::vector<float> HttpEmbeddingProvider::embed(std::string_view text) {
    json body = {{"model", endpoint_.model}, {"input", std::string(text)}};
    json res = http_post_json(endpoint_, "/embeddings", body);
    try {
        return res.at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected embedding response shape: ") + e.what());
    }
}

double HttpRerankProvider::score(const RerankRequest& request) {
    json body = {
        {"model", endpoint_.model},
        {"query", request.query},
        {"documents", json::array({request.passage})},
        {"instruction", request.instruction},
    };
    json res = http_post_json(endpoint_, "/rerank", body);
    try {
        double s = res.at("results").at(0).at("relevance_score").get<double>();
        if (!std::isfinite(s) || s < 0.0 || s > 1.0)
            throw ProviderError("rerank score outside [0,1]: " + std::to_string(s));
        return s;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected rerank response shape: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

std::unique_ptr<ScriptedTextProvider> ScriptedTextProvider::from_json(const json& script) {
    std::vector<ScriptRule> rules;
    for (const auto& r : script.value("rules", json::array())) {
        ScriptRule rule;
        rule.role = r.value("role", "");
        rule.fingerprint = r.value("fingerprint", "");
        if (r.contains("contains")) {
            const auto& c = r["contains"];
            if (c.is_string()) rule.contains.push_back(c.get<std::string>());
            else rule.contains = c.get<std::vector<std::string>>();
        }
        rule.response = r.value("response", "");
        if (r.contains("error")) rule.error = r["error"].get<std::string>();
        rules.push_back(std::move(rule));
    }
    std::optional<std::string> fallback;
    if (script.contains("default")) fallback = script["default"].get<std::string>();
    return std::make_unique<ScriptedTextProvider>(std::move(rules), std::move(fallback),
                                                  script.value("model", "scripted"));
}

std::string ScriptedTextProvider::generate(const TextRequest& request) {
    log_.record(request);
    const std::string fp = fingerprint(request.prompt);
    for (const auto& rule : rules_) {
        if (!rule.role.empty() && rule.role != request.role) continue;
        bool hit;
        if (!rule.fingerprint.empty()) {
            hit = rule.fingerprint == fp;
        } else {
            hit = std::all_of(rule.contains.begin(), rule.contains.end(), [&](const auto& needle) {
                return request.prompt.find(needle) != std::string::npos;
            });
        }
        if (!hit) continue;
        if (rule.error) throw ProviderError(*rule.error);
        return rule.response;
    }
    if (fallback_) return *fallback_;
    throw ProviderError("no scripted response for prompt " + fp + " (role " + request.role + ")");
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<float> HashEmbedder::embed(std::string_view text) {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : word_tokens(text)) {
        std::uint64_t h = fnv1a64(tok);
        double sign = (h >> 63) ? -1.0 : 1.0;
        acc[h % dim_] += sign;
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    std::vector<float> out(dim_, 0.0f);
    if (norm == 0.0) {
        out[0] = 1.0f;  // keeps empty texts embeddable
        return out;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

double OverlapReranker::score(const RerankRequest& request) {
    auto q = word_tokens(request.query);
    std::set<std::string> qset(q.begin(), q.end());
    if (qset.empty()) return 0.0;
    auto p = word_tokens(request.passage);
    std::set<std::string> pset(p.begin(), p.end());
    std::size_t hit = 0;
    for (const auto& t : qset) hit += pset.count(t);
    return static_cast<double>(hit) / static_cast<double>(qset.size());
}

// ---------------------------------------------------------------------------

Endpoint endpoint_from_json(const json& spec) {
    Endpoint e;
    e.url = spec.at("url").get<std::string>();
    e.model = spec.value("model", "");
    e.auth_env = spec.value("auth_env", "");
    e.timeout_seconds = spec.value("timeout", 120);
    return e;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return p;
    return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

std::unique_ptr<TextProvider> make_text_provider(const json& spec, const std::string& base_dir) {
    const std::string type = spec.value("type", "");
    if (type == "http") return std::make_unique<HttpTextProvider>(endpoint_from_json(spec));
    if (type == "scripted") {
        if (spec.contains("script"))
            return ScriptedTextProvider::from_json(
                json::parse(read_file(resolve(base_dir, spec["script"].get<std::string>()))));
        return ScriptedTextProvider::from_json(spec);
    }
    throw Error("unknown text provider type '" + type + "'");
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const json& spec, const std::string&) {
    const std::string type = spec.value("type", "");
    if (type == "http") return std::make_unique<HttpEmbeddingProvider>(endpoint_from_json(spec));
    if (type == "hash") return std::make_unique<HashEmbedder>(spec.value("dim", 64));
    throw Error("unknown embedding provider type '" + type + "'");
}

std::unique_ptr<RerankProvider> make_rerank_provider(const json& spec, const std::string&) {
    const std::string type = spec.value("type", "");
    if (type == "http") return std::make_unique<HttpRerankProvider>(endpoint_from_json(spec));
    if (type == "overlap") return std::make_unique<OverlapReranker>();
    throw Error("unknown rerank provider type '" + type + "'");
}

}  // namespace leansearch
