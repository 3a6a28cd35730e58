#include "leansearch/service.hpp"

#include <httplib.h>

#include <set>

namespace leansearch {

JobExecutor::JobExecutor(std::size_t workers) {
    if (workers == 0) workers = 1;
    for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
}

JobExecutor::~JobExecutor() { shutdown(); }

void JobExecutor::submit(std::function<void(std::stop_token)> job) {
    {
        std::lock_guard lk(mu_);
        if (closing_) throw Error("job executor is shutting down");
        queue_.push_back(std::move(job));
    }
    cv_.notify_one();
}

void JobExecutor::shutdown(bool cancel) {
    {
        std::lock_guard lk(mu_);
        closing_ = true;
    }
    if (cancel) cancel_.request_stop();
    cv_.notify_all();
    for (auto& t : threads_)
        if (t.joinable()) t.join();
}

void JobExecutor::work() {
    for (;;) {
        std::function<void(std::stop_token)> job;
        {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [&] { return closing_ || !queue_.empty(); });
            if (queue_.empty()) return;  // closing and drained
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job(cancel_.get_token());
    }
}

std::string to_string(JobStatus s) {
    switch (s) {
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::error: return "error";
    }
    return "error";
}

json ReasonJob::status_json() const {
    std::lock_guard lk(mu);
    json j = {{"run_id", id}, {"status", to_string(status)}, {"trace_size", trace.size()}};
    if (result) j["result"] = *result;
    if (error) j["error"] = *error;
    return j;
}

// ---------------------------------------------------------------------------

namespace {

HttpResponse error_response(int status, const std::string& message) {
    return {status, {{"error", message}}};
}

struct BadRequest : Error {
    using Error::Error;
};

json parse_body(const std::string& body, const std::set<std::string>& accepted) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw BadRequest(std::string("request body is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw BadRequest("request body must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (accepted.count(it.key())) continue;
        std::string list;
        for (const auto& a : accepted) list += (list.empty() ? "" : ", ") + a;
        throw BadRequest("unknown field '" + it.key() + "'; accepted fields: " + list);
    }
    return j;
}

template <class T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw BadRequest(std::string("field '") + key + "' has the wrong type");
    }
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw BadRequest(std::string("field '") + key + "' is required");
    auto s = j[key].get<std::string>();
    if (trim(s).empty()) throw BadRequest(std::string("field '") + key + "' must be non-empty");
    return s;
}

template <class F>
HttpResponse guarded(F&& f) {
    try {
        return f();
    } catch (const BadRequest& e) {
        return error_response(400, e.what());
    } catch (const PreconditionError& e) {
        return error_response(400, e.what());
    } catch (const ConfigError& e) {
        return error_response(503, e.what());
    } catch (const ProviderError& e) {
        return error_response(502, std::string("provider failure: ") + e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

}  // namespace

Api::Api(Engine& engine, std::size_t workers) : engine_(engine), executor_(workers) {}

Api::~Api() { shutdown(); }

void Api::shutdown() { executor_.shutdown(); }

HttpResponse Api::health() {
    return guarded([&] {
        json j = {{"status", "ok"}};
        const auto& cfg = engine_.config();
        if (!cfg.corpus_path.empty()) j["corpus_size"] = engine_.corpus().size();
        if (!cfg.index_path.empty()) {
            const auto& s = engine_.searcher();
            j["index_size"] = s.index().size();
            j["embedder"] = s.index().provenance().embedder_model;
            j["template_version"] = s.index().provenance().template_version;
        }
        return HttpResponse{200, j};
    });
}

HttpResponse Api::search(const std::string& body) {
    return guarded([&] {
        json req = parse_body(body, {"query", "k", "rerank", "kind_aware"});
        auto query = required_string(req, "query");
        auto k = field<long long>(req, "k", 10);
        if (k < 1) throw BadRequest("field 'k' must be at least 1");
        SearchOptions opts = engine_.config().search;
        opts.rerank = field<bool>(req, "rerank", opts.rerank);
        opts.kind_aware = field<bool>(req, "kind_aware", opts.kind_aware);

        auto list = engine_.search(query, static_cast<std::size_t>(k), opts);
        const auto& corpus = engine_.corpus();
        json hits = json::array();
        for (const auto& h : list.hits) {
            json hit = {{"name", h.decl_name}, {"score", h.score}, {"rank", h.rank + 1}};
            if (const auto* rec = corpus.find(h.decl_name)) {
                hit["kind"] = rec->kind.label();
                hit["signature"] = rec->signature;
                hit["informal"] = rec->informal ? json(*rec->informal) : json(nullptr);
            }
            if (h.degraded) hit["degraded"] = true;
            hits.push_back(std::move(hit));
        }
        return HttpResponse{200, {{"query", query}, {"stage", to_string(list.stage)}, {"hits", hits}}};
    });
}

HttpResponse Api::submit_reason(const std::string& body) {
    return guarded([&] {
        json req = parse_body(body, {"informal", "formal", "budget", "max_revisions", "reflection_enabled"});
        ReasoningTarget target{field<std::string>(req, "informal", ""), required_string(req, "formal")};
        ReasoningConfig cfg = engine_.config().reasoning;
        cfg.budget = field<int>(req, "budget", cfg.budget);
        cfg.max_revisions = field<int>(req, "max_revisions", cfg.max_revisions);
        cfg.reflection_enabled = field<bool>(req, "reflection_enabled", cfg.reflection_enabled);
        if (cfg.budget < 1 || cfg.budget > 16) throw BadRequest("field 'budget' must be in 1..16");
        if (cfg.max_revisions < 0 || cfg.max_revisions > 16)
            throw BadRequest("field 'max_revisions' must be in 0..16");

        // Fail fast on missing configuration instead of inside the job.
        const auto& config = engine_.config();
        std::vector<std::string> roles = {"sketcher", "filter"};
        if (cfg.reflection_enabled) roles.insert(roles.end(), {"judge", "reviser"});
        for (const auto& r : roles) config.role(r);
        engine_.searcher();
        engine_.corpus();

        auto job = std::make_shared<ReasonJob>();
        job->target = std::move(target);
        job->config = cfg;
        {
            std::lock_guard lk(mu_);
            job->id = "run-" + std::to_string(next_id_++);
            jobs_[job->id] = job;
        }
        executor_.submit([this, job](std::stop_token stop) {
            try {
                auto result = engine_.reason(job->target, job->config, &job->trace, stop);
                std::lock_guard lk(job->mu);
                job->result = to_json(result);
                job->status = JobStatus::done;
            } catch (const std::exception& e) {
                std::lock_guard lk(job->mu);
                job->error = e.what();
                job->status = JobStatus::error;
            }
            { std::lock_guard lk(mu_); }
            done_cv_.notify_all();
        });
        return HttpResponse{202, {{"run_id", job->id}, {"status", "running"}}};
    });
}

std::shared_ptr<ReasonJob> Api::find(const std::string& id) {
    std::lock_guard lk(mu_);
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : it->second;
}

HttpResponse Api::reason_status(const std::string& id) {
    auto job = find(id);
    if (!job) return error_response(404, "unknown run id '" + id + "'");
    return {200, job->status_json()};
}

HttpResponse Api::reason_trace(const std::string& id, std::size_t since) {
    auto job = find(id);
    if (!job) return error_response(404, "unknown run id '" + id + "'");
    JobStatus status;
    {
        std::lock_guard lk(job->mu);
        status = job->status;
    }
    // Read after the status so a finished run always returns its full log.
    auto events = job->trace.events_since(since);
    json arr = json::array();
    for (const auto& e : events) arr.push_back(to_json(e));
    return {200, {{"run_id", id}, {"status", to_string(status)}, {"events", arr},
                  {"next", since + events.size()}}};
}

HttpResponse Api::decl(const std::string& name) {
    return guarded([&] {
        const auto* rec = engine_.corpus().find(name);
        if (!rec) return error_response(404, "unknown declaration '" + name + "'");
        return HttpResponse{200, to_json(*rec)};
    });
}

std::optional<JobStatus> Api::wait(const std::string& id, std::chrono::milliseconds timeout) {
    auto job = find(id);
    if (!job) return std::nullopt;
    auto status = [&] {
        std::lock_guard lk(job->mu);
        return job->status;
    };
    std::unique_lock lk(mu_);
    done_cv_.wait_for(lk, timeout, [&] { return status() != JobStatus::running; });
    return status();
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    httplib::Server svr;
};

namespace {

void reply(httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(Engine& engine, const ServerSettings& settings)
    : impl_(std::make_unique<Impl>()),
      api_(std::make_unique<Api>(engine, settings.workers)),
      settings_(settings) {
    auto& svr = impl_->svr;
    Api& api = *api_;

    std::string token;
    if (!settings.auth_token_env.empty()) {
        const char* t = std::getenv(settings.auth_token_env.c_str());
        if (!t || !*t) throw ConfigError("environment variable " + settings.auth_token_env + " is not set");
        token = t;
    }
    svr.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
        if (token.empty() || req.path.rfind("/v1/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
        if (req.get_header_value("Authorization") == "Bearer " + token)
            return httplib::Server::HandlerResponse::Unhandled;
        reply(res, {401, {{"error", "missing or invalid bearer token"}}});
        return httplib::Server::HandlerResponse::Handled;
    });

    svr.Get("/health", [&api](const httplib::Request&, httplib::Response& res) { reply(res, api.health()); });
    svr.Post("/v1/search", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.search(req.body));
    });
    svr.Post("/v1/reason", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.submit_reason(req.body));
    });
    svr.Get(R"(/v1/reason/([^/]+)/trace)", [&api](const httplib::Request& req, httplib::Response& res) {
        std::size_t since = 0;
        if (req.has_param("since")) {
            try {
                since = std::stoul(req.get_param_value("since"));
            } catch (const std::exception&) {
                reply(res, {400, {{"error", "'since' must be a non-negative integer"}}});
                return;
            }
        }
        reply(res, api.reason_trace(req.matches[1], since));
    });
    svr.Get(R"(/v1/reason/([^/]+))", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.reason_status(req.matches[1]));
    });
    svr.Get(R"(/v1/decl/(.+))", [&api](const httplib::Request& req, httplib::Response& res) {
        reply(res, api.decl(req.matches[1]));
    });
    if (!settings.ui_dir.empty() && !svr.set_mount_point("/ui", settings.ui_dir))
        throw ConfigError("ui directory does not exist: " + settings.ui_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    auto& svr = impl_->svr;
    if (settings_.port == 0)
        port_ = svr.bind_to_any_port(settings_.host);
    else if (svr.bind_to_port(settings_.host, settings_.port))
        port_ = settings_.port;
    else
        port_ = -1;
    if (port_ < 0) throw Error("cannot bind " + settings_.host + ":" + std::to_string(settings_.port));
    thread_ = std::jthread([this] { impl_->svr.listen_after_bind(); });
    svr.wait_until_ready();
    return port_;
}

void HttpServer::stop() {
    if (impl_) impl_->svr.stop();
    if (thread_.joinable()) thread_.join();
    if (api_) api_->shutdown();
}

}  // namespace leansearch
