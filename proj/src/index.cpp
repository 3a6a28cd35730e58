#include "leansearch/retrieval.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace leansearch {

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::embed_only: return "embed_only";
        case Stage::reranked: return "reranked";
        case Stage::filtered: return "filtered";
        case Stage::aggregated: return "aggregated";
    }
    return "embed_only";
}

Stage stage_from_string(std::string_view s) {
    if (s == "embed_only") return Stage::embed_only;
    if (s == "reranked") return Stage::reranked;
    if (s == "filtered") return Stage::filtered;
    if (s == "aggregated") return Stage::aggregated;
    throw Error("unknown list stage '" + std::string(s) + "'");
}

namespace {

bool hit_before(const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.decl_name < b.decl_name;
}

}  // namespace

RankedList RankedList::make(std::string query, Stage stage, std::vector<Hit> hits) {
    std::sort(hits.begin(), hits.end(), hit_before);
    RankedList out{std::move(query), std::move(hits), stage};
    out.renumber();
    return out;
}

void RankedList::renumber() {
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i;
}

void RankedList::truncate(std::size_t k) {
    if (hits.size() > k) hits.resize(k);
}

std::vector<std::string> RankedList::names() const {
    std::vector<std::string> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.decl_name);
    return out;
}

json to_json(const RankedList& list) {
    json hits = json::array();
    for (const auto& h : list.hits) {
        json jh = {{"name", h.decl_name}, {"score", h.score}, {"rank", h.rank}};
        if (h.degraded) jh["degraded"] = true;
        hits.push_back(std::move(jh));
    }
    return {{"query", list.query}, {"stage", to_string(list.stage)}, {"hits", std::move(hits)}};
}

RankedList ranked_list_from_json(const json& j) {
    RankedList out;
    out.query = j.value("query", "");
    out.stage = stage_from_string(j.value("stage", "embed_only"));
    for (const auto& h : j.at("hits"))
        out.hits.push_back({h.at("name").get<std::string>(), h.value("score", 0.0),
                            h.value("rank", out.hits.size()), h.value("degraded", false)});
    return out;
}

// ---------------------------------------------------------------------------

VectorIndex::VectorIndex(std::size_t dim, IndexProvenance provenance)
    : dim_(dim), provenance_(std::move(provenance)) {
    if (dim_ == 0) throw PreconditionError("index dimension must be positive");
}

void VectorIndex::add(std::string decl_name, std::span<const float> vec) {
    if (vec.size() != dim_)
        throw DimensionMismatchError("vector for '" + decl_name + "' has dimension " +
                                     std::to_string(vec.size()) + ", index expects " +
                                     std::to_string(dim_));
    double norm = 0.0;
    for (float v : vec) {
        if (!std::isfinite(v)) throw Error("non-finite component in vector for '" + decl_name + "'");
        norm += static_cast<double>(v) * static_cast<double>(v);
    }
    if (!by_name_.emplace(decl_name, names_.size()).second) throw DuplicateNameError(decl_name);
    names_.push_back(std::move(decl_name));
    data_.insert(data_.end(), vec.begin(), vec.end());
    norms_.push_back(std::sqrt(norm));
}

namespace {

constexpr char kMagic[8] = {'L', 'S', 'V', '2', 'V', 'I', 'D', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put_le(std::string& out, T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

void put_string(std::string& out, std::string_view s) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T>
    T le() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    std::string str() {
        auto n = le<std::uint32_t>();
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw ParseError("truncated index file", 0);
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string VectorIndex::serialize() const {
    std::string out(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put_le<std::uint64_t>(out, names_.size());
    put_string(out, provenance_.embedder_model);
    put_string(out, provenance_.template_version);
    for (std::size_t i = 0; i < names_.size(); ++i) {
        put_string(out, names_[i]);
        for (float v : vector(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

VectorIndex VectorIndex::deserialize(std::string_view bytes) {
    Reader r(bytes);
    if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
        throw ParseError("not an index file (bad magic)", 0);
    auto version = r.le<std::uint32_t>();
    if (version != kFormatVersion)
        throw ParseError("unsupported index format version " + std::to_string(version), 0);
    auto dim = r.le<std::uint32_t>();
    auto count = r.le<std::uint64_t>();
    IndexProvenance prov;
    prov.embedder_model = r.str();
    prov.template_version = r.str();
    VectorIndex index(dim, std::move(prov));
    std::vector<float> vec(dim);
    for (std::uint64_t e = 0; e < count; ++e) {
        std::string name = r.str();
        for (auto& v : vec) v = std::bit_cast<float>(r.le<std::uint32_t>());
        index.add(std::move(name), vec);
    }
    if (!r.done()) throw ParseError("trailing bytes after index entries", 0);
    return index;
}

void VectorIndex::save(const std::string& path) const { write_file_atomic(path, serialize()); }

VectorIndex VectorIndex::load(const std::string& path) { return deserialize(read_file(path)); }

// ---------------------------------------------------------------------------

VectorIndex build_index(std::span<const Passage> passages, EmbeddingProvider& embedder,
                        const std::string& template_version, const BuildOptions& options) {
    if (passages.empty()) throw PreconditionError("cannot build an index from zero passages");
    std::vector<std::vector<float>> vecs(passages.size());
    parallel_for(passages.size(), options.concurrency, [&](std::size_t i) {
        vecs[i] = with_retries(options.retries, [&] { return embedder.embed(passages[i].text); });
    });
    const std::size_t dim = vecs.front().size();
    if (dim == 0) throw DimensionMismatchError("embedder returned an empty vector for '" +
                                               passages.front().decl_name + "'");
    VectorIndex index(dim, {embedder.model_id(), template_version});
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (vecs[i].size() != dim)
            throw DimensionMismatchError("embedding for passage '" + passages[i].decl_name +
                                         "' has dimension " + std::to_string(vecs[i].size()) +
                                         ", expected " + std::to_string(dim));
        index.add(passages[i].decl_name, vecs[i]);
    }
    return index;
}

RankedList cosine_topk(const VectorIndex& index, std::span<const float> query_vec, std::size_t k,
                       std::string query) {
    if (k == 0) throw PreconditionError("k must be positive");
    if (query_vec.size() != index.dim())
        throw DimensionMismatchError("query has dimension " + std::to_string(query_vec.size()) +
                                     ", index expects " + std::to_string(index.dim()));
    double qnorm = 0.0;
    for (float v : query_vec) {
        if (!std::isfinite(v)) throw PreconditionError("query vector has a non-finite component");
        qnorm += static_cast<double>(v) * static_cast<double>(v);
    }
    if (qnorm == 0.0) throw PreconditionError("query vector is all zeros");
    qnorm = std::sqrt(qnorm);

    std::vector<Hit> all(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        auto vec = index.vector(i);
        double dot = 0.0;
        for (std::size_t d = 0; d < vec.size(); ++d)
            dot += static_cast<double>(vec[d]) * static_cast<double>(query_vec[d]);
        double n = index.norm(i);
        double score = n == 0.0 ? 0.0 : std::clamp(dot / (n * qnorm), -1.0, 1.0);
        all[i] = Hit{index.name(i), score, 0, false};
    }
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      [](const Hit& a, const Hit& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.decl_name < b.decl_name;
                      });
    all.resize(take);
    RankedList out{std::move(query), std::move(all), Stage::embed_only};
    out.renumber();
    return out;
}

}  // namespace leansearch
