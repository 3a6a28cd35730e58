#pragma once

#include "leansearch/corpus.hpp"
#include "leansearch/providers.hpp"
#include "leansearch/retrieval.hpp"
#include "leansearch/util.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leansearch {

// ---------------------------------------------------------------------------
// Benchmark data

enum class Difficulty { easy, hard };
enum class QueryStyle { lean, latex, natural, slogan, nickname, special_case };

std::string to_string(Difficulty d);
std::string to_string(QueryStyle s);
QueryStyle query_style_from_string(std::string_view s);

struct QRQuery {
    QueryStyle style = QueryStyle::natural;
    std::string text;
};

// One ground-truth declaration with up to one query per style.
struct QRItem {
    std::string decl_name;
    Difficulty difficulty = Difficulty::easy;
    std::vector<QRQuery> queries;

    // "<decl_name>::<style>", the key used in run files.
    std::string query_id(QueryStyle style) const;
};

struct PremiseGroup {
    std::string group_id;
    std::set<std::string> members;  // interchangeable lemmas
};

enum class RoutingKind { original, alternative };

struct Routing {
    std::string routing_id;
    RoutingKind kind = RoutingKind::original;
    std::vector<std::string> group_ids;
};

struct MPRItem {
    std::string id;
    std::string informal;
    std::string formal;
    std::vector<PremiseGroup> groups;
    std::vector<Routing> routings;

    // Throws ParseError: exactly one original routing, references resolve,
    // no empty groups or routings.
    void validate() const;
    // 1..8 groups on the original routing.
    bool benchmark_conformant() const;
    const Routing& original() const;
    const PremiseGroup* group(std::string_view group_id) const;
};

QRItem qr_item_from_json(const json& j);
MPRItem mpr_item_from_json(const json& j);
json to_json(const QRItem& item);
json to_json(const MPRItem& item);
std::vector<QRItem> load_qr_benchmark(const std::string& path);
std::vector<MPRItem> load_mpr_benchmark(const std::string& path);

// query_id -> ranked list. Lines: {"query_id", "hits": [{"name", "score"}]}.
using RunFile = std::map<std::string, RankedList, std::less<>>;
RunFile load_run_file(const std::string& path);
std::string serialize_run_file(const RunFile& run);

// ---------------------------------------------------------------------------
// Metrics (binary single-document relevance for QR; premise groups for MPR)

double ndcg_at_k(const RankedList& ranked, std::string_view gt, std::size_t k);
int recall_at_k(const RankedList& ranked, std::string_view gt, std::size_t k);
double macro_mean(std::span<const double> values);

enum class GroupScope { original_groups, all_groups };
enum class CoveredVariant { main_only, main_or_alt };
std::string to_string(GroupScope s);
std::string to_string(CoveredVariant v);

// Throws PreconditionError when the item has no in-scope groups.
double group_recall_at_k(const RankedList& ranked, const MPRItem& item, std::size_t k,
                         GroupScope scope = GroupScope::original_groups);
int covered_at_k(const RankedList& ranked, const MPRItem& item, std::size_t k,
                 CoveredVariant variant);

enum class Perspective { fair, at_least_one, full };
Perspective perspective_from_string(std::string_view s);

std::vector<QRItem> fair_subset(std::span<const QRItem> items,
                                std::span<const std::set<std::string>> snapshots,
                                Perspective mode);

struct QRRow {
    std::string query_id;
    const QRItem* item;
    QueryStyle style;
};
std::vector<QRRow> qr_rows(std::span<const QRItem> items);

// {"metadata", "overall", "by_difficulty", "by_style"}; every number is a
// macro average over query rows. Missing runs score zero.
json evaluate_qr(std::span<const QRItem> items, const RunFile& run, std::span<const std::size_t> ks);
json evaluate_mpr(std::span<const MPRItem> items, const RunFile& run,
                  std::span<const std::size_t> ks, GroupScope scope);

// ---------------------------------------------------------------------------
// LLM-as-judge protocol

// permutation[s] = label index (0 = "A") assigned to system s.
using Permutation = std::vector<int>;

// `rounds` distinct permutations of `systems` items, drawn without
// replacement, a pure function of (query_id, global_seed).
std::vector<Permutation> sample_permutations(std::string_view query_id, std::uint64_t global_seed,
                                             int rounds = 3, int systems = 4);

struct JudgeBlock {
    std::string name;
    std::string kind;
    std::string informal_name;
    std::string signature;
    std::string value;
    std::string informal;
};

inline constexpr std::size_t kJudgeSignatureChars = 800;
inline constexpr std::size_t kJudgeValueChars = 400;
inline constexpr std::size_t kJudgeInformalChars = 600;

// Fills a block from the shared corpus; unknown names get only the name.
JudgeBlock hydrate_block(const CorpusSnapshot& corpus, std::string_view name);
std::string render_block(const JudgeBlock& block);

// `per_system[s]` are system s's top results. Systems appear only under their
// permuted labels, in label order.
std::string build_judge_prompt(std::string_view query,
                               std::span<const std::vector<JudgeBlock>> per_system,
                               const Permutation& permutation);

// Label indices from best to worst. Throws ParseError unless the ranking is a
// permutation of the first `systems` labels.
std::vector<int> parse_judge_response(std::string_view text, int systems = 4);

struct JudgeJudgment {
    std::string query_id;
    int round = 0;
    Permutation permutation;
    std::vector<int> ranking;  // label indices, best first

    // 1-based rank of system s.
    int rank_of_system(int s) const;
};

struct JudgeReport {
    std::vector<std::string> systems;
    std::size_t judgments = 0;
    std::vector<double> mean_rank;                        // [system]
    std::vector<std::vector<double>> position_mean_rank;  // [system][label]; NaN when empty
    std::vector<std::vector<std::size_t>> position_count; // [system][label]
    std::vector<std::vector<double>> round_mean_rank;     // [round][system]
    double cross_round_correlation = 0.0;  // mean pairwise Spearman between rounds

    json to_json() const;
};

JudgeReport judge_report(std::span<const JudgeJudgment> judgments,
                         std::vector<std::string> systems);

struct JudgeQuery {
    std::string query_id;
    std::string text;
};

struct JudgeProtocolOptions {
    std::uint64_t seed = 0;
    int rounds = 3;
    int retries = 2;  // re-requests after a malformed response
    std::size_t top_n = 5;
    std::size_t max_in_flight = 1;
};

struct JudgeProtocolResult {
    std::vector<JudgeJudgment> judgments;
    std::vector<std::pair<std::string, int>> missing;  // (query_id, round)
};

JudgeProtocolResult run_judge_protocol(std::span<const JudgeQuery> queries,
                                       std::span<const RunFile> runs, const CorpusSnapshot& corpus,
                                       TextProvider& judge, const JudgeProtocolOptions& options);

}  // namespace leansearch
