#include "leansearch/corpus.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <queue>
#include <set>
#include <thread>

namespace leansearch {

std::vector<DependencyContext> dependency_context(const CorpusSnapshot& snapshot,
                                                  const DeclarationRecord& record,
                                                  const InformalizeOptions& options) {
    std::vector<DependencyContext> out;
    std::set<std::string> seen{record.name};
    std::vector<std::string> level;
    for (const auto& d : record.deps)
        if (snapshot.contains(d) && seen.insert(d).second) level.push_back(d);

    while (!level.empty() && out.size() < options.max_dep_context) {
        std::sort(level.begin(), level.end());
        std::vector<std::string> next;
        for (const auto& name : level) {
            const auto* dep = snapshot.find(name);
            if (dep->informal && out.size() < options.max_dep_context)
                out.push_back({name, utf8_prefix(*dep->informal, options.dep_context_chars)});
            for (const auto& d : dep->deps)
                if (snapshot.contains(d) && seen.insert(d).second) next.push_back(d);
        }
        level = std::move(next);
    }
    return out;
}

std::string informalize_prompt(const DeclarationRecord& record,
                               const std::vector<DependencyContext>& context) {
    std::string p =
        "You are an expert in Lean 4 and its mathematical library. Describe in concise natural "
        "language the mathematical meaning of the declaration below. Refer to mathematical "
        "concepts rather than formal identifiers. Output only the description.\n\n";
    p += "Declaration: " + record.name + "\n";
    p += "Kind: " + record.kind.label() + "\n";
    p += "Signature: " + record.signature + "\n";
    if (record.value && record.kind.carries_value()) p += "Value: " + *record.value + "\n";
    if (!context.empty()) {
        p += "\nDescriptions of the declarations it depends on:\n";
        for (const auto& c : context) p += "- " + c.name + ": " + c.description + "\n";
    }
    p += "\nDescription:";
    return p;
}

namespace {

std::string generate_nonempty(TextProvider& provider, const TextRequest& request) {
    std::string text = trim(provider.generate(request));
    if (text.empty()) throw ProviderError("empty informalization from " + provider.model_id());
    return text;
}

struct Outcome {
    std::optional<std::string> text;
    std::string error;
};

Outcome informalize_one(const std::string& prompt, TextProvider& primary, TextProvider& fallback,
                        const InformalizeOptions& options) {
    TextRequest request{"informalize", prompt, options.params, {}};
    std::string primary_error;
    try {
        return {with_retries(options.primary_retries,
                             [&] { return generate_nonempty(primary, request); }),
                {}};
    } catch (const ProviderError& e) {
        primary_error = e.what();
    }
    try {
        return {generate_nonempty(fallback, request), {}};
    } catch (const ProviderError& e) {
        return {std::nullopt, "primary: " + primary_error + "; fallback: " + e.what()};
    }
}

}  // namespace

InformalizeResult informalize(const CorpusSnapshot& snapshot, TextProvider& primary,
                              TextProvider& fallback, const InformalizeOptions& options) {
    const auto order = topological_order(snapshot);
    InformalizeResult result{snapshot, {}};
    std::mutex mu;
    std::map<std::string, std::string> failure_reason;

    auto process = [&](const std::string& name) {
        std::string prompt;
        {
            std::lock_guard lk(mu);
            const auto* rec = result.snapshot.find(name);
            prompt = informalize_prompt(*rec, dependency_context(result.snapshot, *rec, options));
        }
        Outcome out = informalize_one(prompt, primary, fallback, options);
        std::lock_guard lk(mu);
        result.snapshot.find_mutable(name)->informal = out.text;
        if (!out.text) failure_reason[name] = out.error;
    };

    // Clear previous descriptions so dependency context only uses fresh ones.
    for (const auto& name : order) result.snapshot.find_mutable(name)->informal.reset();

    if (options.concurrency <= 1) {
        for (const auto& name : order) process(name);
    } else {
        // Wavefront: a record is dispatched once all internal deps are done,
        // in topological-order priority.
        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
        std::vector<std::size_t> pending(order.size(), 0);
        std::vector<std::vector<std::size_t>> dependents(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::set<std::size_t> internal;
            for (const auto& d : snapshot.find(order[i])->deps)
                if (auto it = position.find(d); it != position.end()) internal.insert(it->second);
            pending[i] = internal.size();
            for (auto d : internal) dependents[d].push_back(i);
        }
        std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (pending[i] == 0) ready.push(i);

        std::mutex sched_mu;
        std::condition_variable cv;
        std::size_t done = 0;
        {
            std::vector<std::jthread> workers;
            for (std::size_t w = 0; w < options.concurrency; ++w) {
                workers.emplace_back([&] {
                    for (;;) {
                        std::size_t idx;
                        {
                            std::unique_lock lk(sched_mu);
                            cv.wait(lk, [&] { return !ready.empty() || done == order.size(); });
                            if (ready.empty()) return;
                            idx = ready.top();
                            ready.pop();
                        }
                        process(order[idx]);
                        {
                            std::lock_guard lk(sched_mu);
                            ++done;
                            for (auto d : dependents[idx])
                                if (--pending[d] == 0) ready.push(d);
                        }
                        cv.notify_all();
                    }
                });
            }
        }
    }

    for (const auto& name : order)
        if (auto it = failure_reason.find(name); it != failure_reason.end())
            result.failures.push_back({name, it->second});
    return result;
}

}  // namespace leansearch
