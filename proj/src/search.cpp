#include "leansearch/retrieval.hpp"

#include <cmath>
#include <set>

namespace leansearch {

PassageMap compose_passages(const CorpusSnapshot& snapshot, const TemplateConfig& tmpl) {
    PassageMap out;
    for (const auto& [name, record] : snapshot.records())
        out.emplace(name, compose_passage(record, tmpl));
    return out;
}

std::string rerank_instruction(const DeclKind& kind, bool kind_aware) {
    if (!kind_aware)
        return "Given a mathematical search query, judge whether the Lean declaration matches it.";
    if (kind.carries_value())
        return "Given a mathematical search query, judge whether this Lean " + kind.label() +
               " introduces the concept or construction the query asks for. The candidate is a "
               "definition-type declaration: match on what it defines, not on facts about it.";
    return "Given a mathematical search query, judge whether this Lean " + kind.label() +
           " states the result the query describes.";
}

RankedList rerank(std::string_view query, const RankedList& candidates, const PassageMap& passages,
                  RerankProvider& reranker, const RerankOptions& options) {
    if (candidates.empty()) throw PreconditionError("rerank needs at least one candidate");
    std::vector<Hit> hits = candidates.hits;
    parallel_for(hits.size(), options.max_in_flight, [&](std::size_t i) {
        auto it = passages.find(hits[i].decl_name);
        if (it == passages.end())
            throw Error("no passage for candidate '" + hits[i].decl_name + "'");
        RerankRequest req{std::string(query), it->second.text, it->second.kind.label(),
                          rerank_instruction(it->second.kind, options.kind_aware)};
        try {
            double s = with_retries(options.retries, [&] { return reranker.score(req); });
            if (!std::isfinite(s) || s < 0.0 || s > 1.0)
                throw ProviderError("rerank score outside [0,1]");
            hits[i].score = s;
            hits[i].degraded = false;
        } catch (const ProviderError&) {
            // Keep the embed-stage score; clamped so the list stays in [0,1].
            hits[i].score = std::clamp(hits[i].score, 0.0, 1.0);
            hits[i].degraded = true;
        }
    });
    return RankedList::make(std::string(query), Stage::reranked, std::move(hits));
}

Searcher::Searcher(const VectorIndex& index, PassageMap passages, EmbeddingProvider& embedder,
                   RerankProvider* reranker, TemplateConfig tmpl)
    : index_(index),
      passages_(std::move(passages)),
      embedder_(embedder),
      reranker_(reranker),
      template_(std::move(tmpl)) {}

RankedList Searcher::search(std::string_view query, std::size_t k, const SearchOptions& opts) const {
    if (k == 0) throw PreconditionError("k must be positive");
    const std::string q = trim(query);
    if (q.empty()) throw PreconditionError("query is empty");
    auto qvec = with_retries(retries_, [&] { return embedder_.embed(compose_query(q, template_)); });

    if (!opts.rerank) return cosine_topk(index_, qvec, k, q);

    if (!reranker_) throw PreconditionError("reranking requested but no reranker is configured");
    if (opts.rerank_pool == 0) throw PreconditionError("rerank_pool must be positive");
    RankedList pool = cosine_topk(index_, qvec, opts.rerank_pool, q);
    if (pool.empty()) return RankedList{q, {}, Stage::reranked};
    RankedList out =
        rerank(q, pool, passages_, *reranker_, {opts.kind_aware, retries_, max_in_flight_});
    out.truncate(k);
    return out;
}

RankedList HttpRetriever::retrieve(std::string_view query, std::size_t k) {
    json res = http_post_json(endpoint_, "/retrieve", {{"query", std::string(query)}, {"k", k}});
    std::vector<Hit> hits;
    std::set<std::string> seen;
    try {
        for (const auto& h : res.at("hits")) {
            auto name = h.at("name").get<std::string>();
            if (!seen.insert(name).second) continue;
            // Rank-derived score: external scores are on an unknown scale.
            hits.push_back({name, 1.0 / static_cast<double>(hits.size() + 1), hits.size(), false});
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected retriever response shape: ") + e.what());
    }
    RankedList out{std::string(query), std::move(hits), Stage::embed_only};
    out.truncate(k);
    return out;
}

}  // namespace leansearch
