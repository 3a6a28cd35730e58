#pragma once

#include "support.hpp"

#include <cmath>
#include <random>
#include <set>

namespace testing {

// Small random MPR/QR instances and brute-force metric definitions that share
// no code with the library.
struct MetricInstance {
    RankedList ranked;
    MPRItem item;
    std::string gt;
    std::size_t k = 1;
};

inline MetricInstance random_instance(std::mt19937_64& rng) {
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    MetricInstance inst;
    std::vector<std::string> pool;
    for (int d = 0; d < 10; ++d) pool.push_back("d" + std::to_string(d));

    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t n_docs = pick(9);  // 0..8 ranked docs
    std::vector<std::string> docs(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_docs));
    inst.ranked = list_of(docs);
    inst.k = 1 + pick(8);
    inst.gt = "d" + std::to_string(pick(10));

    inst.item.id = "item";
    std::size_t n_groups = 1 + pick(4);
    for (std::size_t g = 0; g < n_groups; ++g) {
        PremiseGroup grp{"g" + std::to_string(g), {}};
        std::size_t members = 1 + pick(3);
        while (grp.members.size() < members) grp.members.insert("d" + std::to_string(pick(10)));
        inst.item.groups.push_back(grp);
    }
    std::size_t n_routings = 1 + pick(3);
    for (std::size_t r = 0; r < n_routings; ++r) {
        Routing rt{"r" + std::to_string(r), r == 0 ? RoutingKind::original : RoutingKind::alternative, {}};
        std::size_t want = 1 + pick(n_groups);
        std::set<std::string> ids;
        while (ids.size() < want) ids.insert("g" + std::to_string(pick(n_groups)));
        rt.group_ids.assign(ids.begin(), ids.end());
        std::shuffle(rt.group_ids.begin(), rt.group_ids.end(), rng);
        inst.item.routings.push_back(rt);
    }
    return inst;
}

inline std::set<std::string> oracle_topk(const RankedList& l, std::size_t k) {
    std::set<std::string> s;
    for (std::size_t i = 0; i < l.hits.size() && i < k; ++i) s.insert(l.hits[i].decl_name);
    return s;
}

inline double oracle_ndcg(const RankedList& l, const std::string& gt, std::size_t k) {
    for (std::size_t r = 1; r <= l.hits.size(); ++r)
        if (l.hits[r - 1].decl_name == gt) return r <= k ? 1.0 / std::log2(double(r) + 1.0) : 0.0;
    return 0.0;
}

inline int oracle_recall(const RankedList& l, const std::string& gt, std::size_t k) {
    return oracle_topk(l, k).count(gt) ? 1 : 0;
}

inline bool oracle_group_hit(const MPRItem& item, const std::string& gid, const std::set<std::string>& top) {
    for (const auto& g : item.groups)
        if (g.group_id == gid)
            for (const auto& m : g.members)
                if (top.count(m)) return true;
    return false;
}

inline double oracle_group_recall(const RankedList& l, const MPRItem& item, std::size_t k, bool all_groups) {
    auto top = oracle_topk(l, k);
    std::set<std::string> scope;
    if (all_groups) {
        for (const auto& g : item.groups) scope.insert(g.group_id);
    } else {
        for (const auto& r : item.routings)
            if (r.kind == RoutingKind::original) scope.insert(r.group_ids.begin(), r.group_ids.end());
    }
    double hit = 0;
    for (const auto& gid : scope) hit += oracle_group_hit(item, gid, top) ? 1 : 0;
    return hit / double(scope.size());
}

inline int oracle_covered(const RankedList& l, const MPRItem& item, std::size_t k, bool allow_alt) {
    auto top = oracle_topk(l, k);
    for (const auto& r : item.routings) {
        if (!allow_alt && r.kind != RoutingKind::original) continue;
        bool all = true;
        for (const auto& gid : r.group_ids) all = all && oracle_group_hit(item, gid, top);
        if (all) return 1;
    }
    return 0;
}

}  // namespace testing
