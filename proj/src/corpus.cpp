#include "leansearch/corpus.hpp"

#include <filesystem>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

namespace leansearch {

namespace {

struct KindName {
    KindTag tag;
    std::string_view label;
};

constexpr KindName kKindNames[] = {
    {KindTag::theorem, "theorem"},     {KindTag::def, "def"},
    {KindTag::instance, "instance"},   {KindTag::class_, "class"},
    {KindTag::structure, "structure"}, {KindTag::abbrev, "abbrev"},
};

}  // namespace

DeclKind DeclKind::parse(std::string_view label) {
    for (const auto& k : kKindNames)
        if (k.label == label) return DeclKind{k.tag, {}};
    return DeclKind{KindTag::other, std::string(label)};
}

std::string DeclKind::label() const {
    if (tag == KindTag::other) return other_tag;
    for (const auto& k : kKindNames)
        if (k.tag == tag) return std::string(k.label);
    return {};
}

bool DeclKind::carries_value() const {
    switch (tag) {
        case KindTag::def:
        case KindTag::class_:
        case KindTag::instance:
        case KindTag::structure:
        case KindTag::abbrev:
            return true;
        default:
            return false;
    }
}

CycleError::CycleError(std::vector<std::string> members)
    : Error([&] {
          std::string msg = "dependency cycle:";
          for (const auto& m : members) msg += " " + m;
          return msg;
      }()),
      members_(std::move(members)) {}

json to_json(const DeclarationRecord& r) {
    json j = {
        {"name", r.name},
        {"kind", r.kind.label()},
        {"signature", r.signature},
        {"value", r.value ? json(*r.value) : json(nullptr)},
        {"source", {{"file", r.source.file}, {"line", r.source.line}}},
        {"deps", r.deps},
        {"informal", r.informal ? json(*r.informal) : json(nullptr)},
    };
    return j;
}

DeclarationRecord record_from_json(const json& j) {
    if (!j.is_object()) throw Error("record is not an object");
    DeclarationRecord r;
    r.name = trim(j.at("name").get<std::string>());
    if (r.name.empty()) throw Error("record has an empty name");
    r.kind = DeclKind::parse(j.at("kind").get<std::string>());
    r.signature = j.at("signature").get<std::string>();
    if (j.contains("value") && !j["value"].is_null()) r.value = j["value"].get<std::string>();
    const auto& src = j.at("source");
    r.source.file = src.at("file").get<std::string>();
    auto line = src.at("line").get<std::int64_t>();
    if (line < 1) throw Error("source line must be >= 1");
    r.source.line = static_cast<std::uint32_t>(line);
    if (j.contains("deps")) r.deps = j["deps"].get<std::vector<std::string>>();
    if (j.contains("informal") && !j["informal"].is_null())
        r.informal = j["informal"].get<std::string>();
    return r;
}

void CorpusSnapshot::add(DeclarationRecord record) {
    record.name = trim(record.name);
    if (record.name.empty()) throw Error("record has an empty name");
    if (records_.count(record.name)) throw DuplicateNameError(record.name);
    std::string key = record.name;
    records_.emplace(std::move(key), std::move(record));
}

const DeclarationRecord* CorpusSnapshot::find(std::string_view name) const {
    auto it = records_.find(name);
    return it == records_.end() ? nullptr : &it->second;
}

DeclarationRecord* CorpusSnapshot::find_mutable(std::string_view name) {
    auto it = records_.find(name);
    return it == records_.end() ? nullptr : &it->second;
}

CorpusSnapshot parse_corpus(const std::vector<std::string>& lines, std::string version_tag) {
    CorpusSnapshot snap(std::move(version_tag));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        DeclarationRecord record;
        try {
            record = record_from_json(json::parse(lines[i]));
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), i + 1);
        } catch (const Error& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), i + 1);
        }
        snap.add(std::move(record));
    }
    return snap;
}

CorpusSnapshot load_corpus(const std::string& path, std::string version_tag) {
    if (version_tag.empty()) version_tag = std::filesystem::path(path).stem().string();
    return parse_corpus(read_lines(path), std::move(version_tag));
}

void save_corpus(const CorpusSnapshot& snapshot, const std::string& path) {
    std::string out;
    for (const auto& [name, record] : snapshot.records()) {
        out += to_json(record).dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

namespace {

// One cycle among `remaining` (nodes Kahn's algorithm could not emit).
std::vector<std::string> find_cycle(const CorpusSnapshot& snap, const std::set<std::string>& remaining) {
    std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::vector<std::string> cycle;
    std::function<bool(const std::string&)> dfs = [&](const std::string& n) {
        state[n] = 1;
        stack.push_back(n);
        const auto* rec = snap.find(n);
        std::vector<std::string> deps(rec->deps.begin(), rec->deps.end());
        std::sort(deps.begin(), deps.end());
        for (const auto& d : deps) {
            if (!remaining.count(d)) continue;
            if (state[d] == 1) {
                auto it = std::find(stack.begin(), stack.end(), d);
                cycle.assign(it, stack.end());
                return true;
            }
            if (state[d] == 0 && dfs(d)) return true;
        }
        stack.pop_back();
        state[n] = 2;
        return false;
    };
    for (const auto& n : remaining)
        if (state[n] == 0 && dfs(n)) break;
    return cycle;
}

}  // namespace

std::vector<std::string> topological_order(const CorpusSnapshot& snapshot) {
    std::map<std::string, std::size_t, std::less<>> pending;  // unmet internal deps
    std::map<std::string, std::vector<std::string>, std::less<>> dependents;
    for (const auto& [name, rec] : snapshot.records()) {
        std::set<std::string> internal;
        for (const auto& d : rec.deps)
            if (snapshot.contains(d)) internal.insert(d);
        pending[name] = internal.size();
        for (const auto& d : internal) dependents[d].push_back(name);
    }

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [name, n] : pending)
        if (n == 0) ready.push(name);

    std::vector<std::string> order;
    order.reserve(snapshot.size());
    while (!ready.empty()) {
        std::string n = ready.top();
        ready.pop();
        order.push_back(n);
        auto it = dependents.find(n);
        if (it == dependents.end()) continue;
        for (const auto& dep : it->second)
            if (--pending[dep] == 0) ready.push(dep);
    }

    if (order.size() != snapshot.size()) {
        std::set<std::string> remaining;
        for (const auto& [name, n] : pending)
            if (n > 0) remaining.insert(name);
        throw CycleError(find_cycle(snapshot, remaining));
    }
    return order;
}

}  // namespace leansearch
