#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/providers.hpp"
#include "leansearch/util.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace leansearch {

enum class Stage { embed_only, reranked, filtered, aggregated };

std::string to_string(Stage stage);
Stage stage_from_string(std::string_view s);

struct Hit {
    std::string decl_name;
    double score = 0.0;
    std::size_t rank = 0;  // 0-indexed
    bool degraded = false;  // reranker failed; score is the clamped embed score
};

// Hits sorted by score descending, ties by decl_name ascending, ranks 0..n-1.
struct RankedList {
    std::string query;
    std::vector<Hit> hits;
    Stage stage = Stage::embed_only;

    // Sorts and ranks `hits` in place according to the list invariant.
    static RankedList make(std::string query, Stage stage, std::vector<Hit> hits);
    // Keeps the current order and renumbers ranks.
    void renumber();
    void truncate(std::size_t k);
    std::vector<std::string> names() const;
    std::size_t size() const { return hits.size(); }
    bool empty() const { return hits.empty(); }
};

json to_json(const RankedList& list);
RankedList ranked_list_from_json(const json& j);

// ---------------------------------------------------------------------------

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

struct IndexProvenance {
    std::string embedder_model;
    std::string template_version;
    friend bool operator==(const IndexProvenance&, const IndexProvenance&) = default;
};

// Flat float32 matrix with one row per declaration. Immutable once built.
class VectorIndex {
public:
    VectorIndex(std::size_t dim, IndexProvenance provenance);

    void add(std::string decl_name, std::span<const float> vec);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    std::span<const float> vector(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    double norm(std::size_t i) const { return norms_[i]; }
    const IndexProvenance& provenance() const { return provenance_; }

    // Binary layout: magic "LSV2VIDX", u32 version, u32 dim, u64 count,
    // u32-length-prefixed provenance strings (embedder model, template
    // version), then per entry: u32 name length, name bytes, dim f32. All
    // integers and floats little-endian.
    std::string serialize() const;
    static VectorIndex deserialize(std::string_view bytes);
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    std::size_t dim_;
    IndexProvenance provenance_;
    std::vector<std::string> names_;
    std::vector<float> data_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

struct BuildOptions {
    int retries = 2;
    std::size_t concurrency = 1;
};

// Throws DimensionMismatchError naming the offending passage, or
// ProviderError once retries are exhausted.
VectorIndex build_index(std::span<const Passage> passages, EmbeddingProvider& embedder,
                        const std::string& template_version, const BuildOptions& options = {});

// Exhaustive cosine similarity (accumulated in double).
RankedList cosine_topk(const VectorIndex& index, std::span<const float> query_vec, std::size_t k,
                       std::string query = "");

// ---------------------------------------------------------------------------

using PassageMap = std::map<std::string, Passage, std::less<>>;
PassageMap compose_passages(const CorpusSnapshot& snapshot, const TemplateConfig& tmpl);

std::string rerank_instruction(const DeclKind& kind, bool kind_aware);

struct RerankOptions {
    bool kind_aware = true;
    int retries = 2;
    std::size_t max_in_flight = 4;
};

RankedList rerank(std::string_view query, const RankedList& candidates, const PassageMap& passages,
                  RerankProvider& reranker, const RerankOptions& options = {});

struct SearchOptions {
    bool rerank = true;
    std::size_t rerank_pool = 50;
    bool kind_aware = true;
};

// Standard mode: embed the query, exhaustive cosine search, optional rerank
// of the head of the list.
class Searcher {
public:
    Searcher(const VectorIndex& index, PassageMap passages, EmbeddingProvider& embedder,
             RerankProvider* reranker, TemplateConfig tmpl = TemplateConfig::defaults());

    RankedList search(std::string_view query, std::size_t k, const SearchOptions& opts = {}) const;

    const VectorIndex& index() const { return index_; }
    const PassageMap& passages() const { return passages_; }
    void set_retries(int retries) { retries_ = retries; }
    void set_max_in_flight(std::size_t n) { max_in_flight_ = n; }

private:
    const VectorIndex& index_;
    PassageMap passages_;
    EmbeddingProvider& embedder_;
    RerankProvider* reranker_;
    TemplateConfig template_;
    int retries_ = 2;
    std::size_t max_in_flight_ = 4;
};

// Generic retrieval backend used by the prover harness (our Searcher, or an
// external service).
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual RankedList retrieve(std::string_view query, std::size_t k) = 0;
};

class SearchRetriever final : public Retriever {
public:
    explicit SearchRetriever(const Searcher& searcher, SearchOptions opts = {})
        : searcher_(searcher), opts_(opts) {}
    RankedList retrieve(std::string_view query, std::size_t k) override {
        return searcher_.search(query, k, opts_);
    }

private:
    const Searcher& searcher_;
    SearchOptions opts_;
};

// POST {url}/retrieve {"query", "k"} -> {"hits": [{"name", "score"}]}.
class HttpRetriever final : public Retriever {
public:
    explicit HttpRetriever(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    RankedList retrieve(std::string_view query, std::size_t k) override;

private:
    Endpoint endpoint_;
};

}  // namespace leansearch
