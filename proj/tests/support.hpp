#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/evaluation.hpp"
#include "leansearch/prover.hpp"
#include "leansearch/reasoning.hpp"
#include "leansearch/retrieval.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

namespace testing {

using namespace leansearch;

inline DeclarationRecord decl(std::string name, std::string kind = "theorem",
                              std::vector<std::string> deps = {},
                              std::optional<std::string> value = std::nullopt,
                              std::optional<std::string> informal = std::nullopt,
                              std::string signature = "") {
    DeclarationRecord r;
    r.name = std::move(name);
    r.kind = DeclKind::parse(kind);
    r.signature = signature.empty() ? r.name + " : Prop" : std::move(signature);
    r.value = std::move(value);
    r.source = {"Test.lean", 1};
    r.deps = std::move(deps);
    r.informal = informal ? informal : std::optional<std::string>("about " + r.name);
    return r;
}

inline CorpusSnapshot corpus_of(const std::vector<std::string>& names) {
    CorpusSnapshot c("test");
    for (const auto& n : names) c.add(decl(n));
    return c;
}

inline RankedList list_of(const std::vector<std::string>& names, std::string query = "q") {
    RankedList l;
    l.query = std::move(query);
    l.stage = Stage::filtered;
    for (std::size_t i = 0; i < names.size(); ++i)
        l.hits.push_back({names[i], 1.0 - 0.01 * static_cast<double>(i), i, false});
    return l;
}

// Answers each query with a fixed list of names; unknown queries get the
// default list. Counts calls.
class TableRetriever final : public Retriever {
public:
    explicit TableRetriever(std::map<std::string, std::vector<std::string>> table = {},
                            std::vector<std::string> fallback = {})
        : table_(std::move(table)), fallback_(std::move(fallback)) {}

    RankedList retrieve(std::string_view query, std::size_t k) override {
        std::lock_guard lk(mu_);
        queries_.emplace_back(query);
        auto it = table_.find(std::string(query));
        auto names = it == table_.end() ? fallback_ : it->second;
        if (names.size() > k) names.resize(k);
        auto l = list_of(names, std::string(query));
        l.stage = Stage::reranked;
        return l;
    }
    std::vector<std::string> queries() const {
        std::lock_guard lk(mu_);
        return queries_;
    }
    std::size_t calls() const { return queries().size(); }

private:
    std::map<std::string, std::vector<std::string>> table_;
    std::vector<std::string> fallback_;
    mutable std::mutex mu_;
    std::vector<std::string> queries_;
};

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("leansearch-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string sketch_json(const std::vector<std::string>& queries) {
    json steps = json::array();
    for (const auto& q : queries) steps.push_back({{"description", "use " + q}, {"query", q}});
    return json{{"steps", steps}}.dump();
}

}  // namespace testing
