#include "leansearch/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

namespace leansearch {

std::string to_string(Difficulty d) { return d == Difficulty::easy ? "easy" : "hard"; }

namespace {

constexpr std::pair<QueryStyle, std::string_view> kStyles[] = {
    {QueryStyle::lean, "lean"},         {QueryStyle::latex, "latex"},
    {QueryStyle::natural, "natural"},   {QueryStyle::slogan, "slogan"},
    {QueryStyle::nickname, "nickname"}, {QueryStyle::special_case, "special_case"},
};

}  // namespace

std::string to_string(QueryStyle s) {
    for (const auto& [style, name] : kStyles)
        if (style == s) return std::string(name);
    return "natural";
}

QueryStyle query_style_from_string(std::string_view s) {
    for (const auto& [style, name] : kStyles)
        if (name == s) return style;
    throw Error("unknown query style '" + std::string(s) + "'");
}

std::string QRItem::query_id(QueryStyle style) const { return decl_name + "::" + to_string(style); }

// ---------------------------------------------------------------------------

void MPRItem::validate() const {
    std::set<std::string> ids;
    for (const auto& g : groups) {
        if (g.members.empty()) throw ParseError("item " + id + ": group " + g.group_id + " is empty", 0);
        if (!ids.insert(g.group_id).second)
            throw ParseError("item " + id + ": duplicate group id " + g.group_id, 0);
    }
    int originals = 0;
    for (const auto& r : routings) {
        if (r.kind == RoutingKind::original) ++originals;
        if (r.group_ids.empty())
            throw ParseError("item " + id + ": routing " + r.routing_id + " has no groups", 0);
        for (const auto& g : r.group_ids)
            if (!ids.count(g))
                throw ParseError("item " + id + ": routing " + r.routing_id +
                                     " references unknown group " + g, 0);
    }
    if (originals != 1)
        throw ParseError("item " + id + ": expected exactly one original routing, found " +
                             std::to_string(originals), 0);
}

bool MPRItem::benchmark_conformant() const {
    auto n = original().group_ids.size();
    return n >= 1 && n <= 8;
}

const Routing& MPRItem::original() const {
    for (const auto& r : routings)
        if (r.kind == RoutingKind::original) return r;
    throw PreconditionError("item " + id + " has no original routing");
}

const PremiseGroup* MPRItem::group(std::string_view group_id) const {
    for (const auto& g : groups)
        if (g.group_id == group_id) return &g;
    return nullptr;
}

QRItem qr_item_from_json(const json& j) {
    QRItem item;
    item.decl_name = j.at("decl_name").get<std::string>();
    auto diff = j.value("difficulty", "easy");
    if (diff != "easy" && diff != "hard") throw Error("unknown difficulty '" + diff + "'");
    item.difficulty = diff == "easy" ? Difficulty::easy : Difficulty::hard;
    std::set<QueryStyle> seen;
    for (const auto& q : j.at("queries")) {
        QRQuery query{query_style_from_string(q.at("style").get<std::string>()),
                      q.at("text").get<std::string>()};
        if (!seen.insert(query.style).second)
            throw Error("more than one " + to_string(query.style) + " query for " + item.decl_name);
        item.queries.push_back(std::move(query));
    }
    if (item.queries.empty()) throw Error("no queries for " + item.decl_name);
    return item;
}

json to_json(const QRItem& item) {
    json qs = json::array();
    for (const auto& q : item.queries) qs.push_back({{"style", to_string(q.style)}, {"text", q.text}});
    return {{"decl_name", item.decl_name}, {"difficulty", to_string(item.difficulty)}, {"queries", qs}};
}

MPRItem mpr_item_from_json(const json& j) {
    MPRItem item;
    item.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
    item.informal = j.value("informal", "");
    item.formal = j.value("formal", "");
    for (const auto& g : j.at("groups")) {
        PremiseGroup group;
        group.group_id = g.at("group_id").get<std::string>();
        auto members = g.at("members").get<std::vector<std::string>>();
        group.members.insert(members.begin(), members.end());
        item.groups.push_back(std::move(group));
    }
    for (const auto& r : j.at("routings")) {
        Routing routing;
        routing.routing_id = r.at("routing_id").get<std::string>();
        auto kind = r.at("kind").get<std::string>();
        if (kind != "original" && kind != "alternative")
            throw Error("unknown routing kind '" + kind + "'");
        routing.kind = kind == "original" ? RoutingKind::original : RoutingKind::alternative;
        routing.group_ids = r.at("group_ids").get<std::vector<std::string>>();
        item.routings.push_back(std::move(routing));
    }
    item.validate();
    return item;
}

json to_json(const MPRItem& item) {
    json groups = json::array();
    for (const auto& g : item.groups) groups.push_back({{"group_id", g.group_id}, {"members", g.members}});
    json routings = json::array();
    for (const auto& r : item.routings)
        routings.push_back({{"routing_id", r.routing_id},
                            {"kind", r.kind == RoutingKind::original ? "original" : "alternative"},
                            {"group_ids", r.group_ids}});
    return {{"id", item.id}, {"informal", item.informal}, {"formal", item.formal},
            {"groups", groups}, {"routings", routings}};
}

namespace {

template <class T, class F>
std::vector<T> load_jsonl(const std::string& path, F&& parse) {
    std::vector<T> out;
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            out.push_back(parse(json::parse(lines[i])));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), i + 1);
        } catch (const Error& e) {
            throw ParseError(e.what(), i + 1);
        }
    }
    return out;
}

}  // namespace

std::vector<QRItem> load_qr_benchmark(const std::string& path) {
    return load_jsonl<QRItem>(path, qr_item_from_json);
}

std::vector<MPRItem> load_mpr_benchmark(const std::string& path) {
    return load_jsonl<MPRItem>(path, mpr_item_from_json);
}

RunFile load_run_file(const std::string& path) {
    RunFile run;
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            json j = json::parse(lines[i]);
            RankedList list;
            list.query = j.at("query_id").get<std::string>();
            list.stage = Stage::embed_only;
            std::unordered_set<std::string> seen;
            for (const auto& h : j.at("hits")) {
                auto name = h.is_string() ? h.get<std::string>() : h.at("name").get<std::string>();
                if (!seen.insert(name).second) continue;
                double score = h.is_object() ? h.value("score", 0.0) : 0.0;
                list.hits.push_back({name, score, list.hits.size(), false});
            }
            auto key = list.query;
            if (!run.emplace(key, std::move(list)).second)
                throw Error("duplicate query_id " + key);
        } catch (const json::exception& e) {
            throw ParseError(e.what(), i + 1);
        } catch (const Error& e) {
            throw ParseError(e.what(), i + 1);
        }
    }
    return run;
}

std::string serialize_run_file(const RunFile& run) {
    std::string out;
    for (const auto& [qid, list] : run) {
        json hits = json::array();
        for (const auto& h : list.hits) hits.push_back({{"name", h.decl_name}, {"score", h.score}});
        out += json{{"query_id", qid}, {"hits", hits}}.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

double ndcg_at_k(const RankedList& ranked, std::string_view gt, std::size_t k) {
    const std::size_t limit = std::min(k, ranked.hits.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (ranked.hits[i].decl_name == gt) return 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return 0.0;
}

int recall_at_k(const RankedList& ranked, std::string_view gt, std::size_t k) {
    const std::size_t limit = std::min(k, ranked.hits.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (ranked.hits[i].decl_name == gt) return 1;
    return 0;
}

double macro_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::string to_string(GroupScope s) {
    return s == GroupScope::original_groups ? "original_groups" : "all_groups";
}

std::string to_string(CoveredVariant v) {
    return v == CoveredVariant::main_only ? "main_only" : "main_or_alt";
}

namespace {

std::unordered_set<std::string> top_k_names(const RankedList& ranked, std::size_t k) {
    std::unordered_set<std::string> out;
    const std::size_t limit = std::min(k, ranked.hits.size());
    for (std::size_t i = 0; i < limit; ++i) out.insert(ranked.hits[i].decl_name);
    return out;
}

bool group_hit(const PremiseGroup& g, const std::unordered_set<std::string>& top) {
    return std::any_of(g.members.begin(), g.members.end(),
                       [&](const std::string& m) { return top.count(m) > 0; });
}

bool routing_covered(const MPRItem& item, const Routing& r, const std::unordered_set<std::string>& top) {
    return std::all_of(r.group_ids.begin(), r.group_ids.end(), [&](const std::string& gid) {
        const auto* g = item.group(gid);
        return g && group_hit(*g, top);
    });
}

}  // namespace

double group_recall_at_k(const RankedList& ranked, const MPRItem& item, std::size_t k,
                         GroupScope scope) {
    std::vector<const PremiseGroup*> in_scope;
    if (scope == GroupScope::all_groups) {
        for (const auto& g : item.groups) in_scope.push_back(&g);
    } else {
        std::set<std::string> seen;
        for (const auto& gid : item.original().group_ids)
            if (seen.insert(gid).second)
                if (const auto* g = item.group(gid)) in_scope.push_back(g);
    }
    if (in_scope.empty()) throw PreconditionError("item " + item.id + " has no in-scope premise groups");
    auto top = top_k_names(ranked, k);
    std::size_t hit = 0;
    for (const auto* g : in_scope) hit += group_hit(*g, top) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(in_scope.size());
}

int covered_at_k(const RankedList& ranked, const MPRItem& item, std::size_t k,
                 CoveredVariant variant) {
    auto top = top_k_names(ranked, k);
    if (variant == CoveredVariant::main_only) return routing_covered(item, item.original(), top) ? 1 : 0;
    for (const auto& r : item.routings)
        if (routing_covered(item, r, top)) return 1;
    return 0;
}

Perspective perspective_from_string(std::string_view s) {
    if (s == "fair") return Perspective::fair;
    if (s == "at_least_one" || s == "at-least-one") return Perspective::at_least_one;
    if (s == "full") return Perspective::full;
    throw Error("unknown perspective '" + std::string(s) + "'");
}

std::vector<QRItem> fair_subset(std::span<const QRItem> items,
                                std::span<const std::set<std::string>> snapshots,
                                Perspective mode) {
    std::vector<QRItem> out;
    for (const auto& item : items) {
        std::size_t present = 0;
        for (const auto& snap : snapshots) present += snap.count(item.decl_name);
        bool keep = mode == Perspective::full ||
                    (mode == Perspective::fair && present == snapshots.size()) ||
                    (mode == Perspective::at_least_one && present >= 1);
        if (keep) out.push_back(item);
    }
    return out;
}

std::vector<QRRow> qr_rows(std::span<const QRItem> items) {
    std::vector<QRRow> rows;
    for (const auto& item : items)
        for (const auto& q : item.queries) rows.push_back({item.query_id(q.style), &item, q.style});
    return rows;
}

namespace {

const RankedList& lookup(const RunFile& run, const std::string& qid) {
    static const RankedList empty;
    auto it = run.find(qid);
    return it == run.end() ? empty : it->second;
}

json qr_cell(const std::vector<const QRRow*>& rows, const RunFile& run,
             std::span<const std::size_t> ks) {
    json cell = {{"n", rows.size()}};
    for (auto k : ks) {
        std::vector<double> ndcg, recall;
        for (const auto* r : rows) {
            const auto& list = lookup(run, r->query_id);
            ndcg.push_back(ndcg_at_k(list, r->item->decl_name, k));
            recall.push_back(recall_at_k(list, r->item->decl_name, k));
        }
        cell["ndcg@" + std::to_string(k)] = macro_mean(ndcg);
        cell["recall@" + std::to_string(k)] = macro_mean(recall);
    }
    return cell;
}

}  // namespace

json evaluate_qr(std::span<const QRItem> items, const RunFile& run, std::span<const std::size_t> ks) {
    auto rows = qr_rows(items);
    std::vector<const QRRow*> all;
    std::map<std::string, std::vector<const QRRow*>> by_diff, by_style;
    std::size_t missing = 0;
    for (const auto& r : rows) {
        all.push_back(&r);
        by_diff[to_string(r.item->difficulty)].push_back(&r);
        by_style[to_string(r.style)].push_back(&r);
        if (!run.count(r.query_id)) ++missing;
    }
    json out;
    out["metadata"] = {{"task", "qr"},
                       {"relevance", "binary single-document"},
                       {"averaging", "macro (unweighted mean over query rows)"},
                       {"ks", std::vector<std::size_t>(ks.begin(), ks.end())},
                       {"rows_without_run", missing}};
    out["overall"] = qr_cell(all, run, ks);
    out["by_difficulty"] = json::object();
    for (const auto& [d, rs] : by_diff) out["by_difficulty"][d] = qr_cell(rs, run, ks);
    out["by_style"] = json::object();
    for (const auto& [s, rs] : by_style) out["by_style"][s] = qr_cell(rs, run, ks);
    return out;
}

json evaluate_mpr(std::span<const MPRItem> items, const RunFile& run,
                  std::span<const std::size_t> ks, GroupScope scope) {
    json out;
    std::size_t missing = 0;
    for (const auto& item : items)
        if (!run.count(item.id)) ++missing;
    out["metadata"] = {
        {"task", "mpr"},
        {"averaging", "macro (unweighted mean over items)"},
        {"group_scope", to_string(scope)},
        {"group_scope_note",
         "group recall counts the original routing's groups (original_groups) or every "
         "annotated group (all_groups)"},
        {"ks", std::vector<std::size_t>(ks.begin(), ks.end())},
        {"items_without_run", missing}};
    json cell = {{"n", items.size()}};
    for (auto k : ks) {
        std::vector<double> gr, main_only, main_or_alt;
        for (const auto& item : items) {
            const auto& list = lookup(run, item.id);
            gr.push_back(group_recall_at_k(list, item, k, scope));
            main_only.push_back(covered_at_k(list, item, k, CoveredVariant::main_only));
            main_or_alt.push_back(covered_at_k(list, item, k, CoveredVariant::main_or_alt));
        }
        cell["group_recall@" + std::to_string(k)] = macro_mean(gr);
        cell["covered_main_only@" + std::to_string(k)] = macro_mean(main_only);
        cell["covered_main_or_alt@" + std::to_string(k)] = macro_mean(main_or_alt);
    }
    out["overall"] = cell;
    return out;
}

}  // namespace leansearch
