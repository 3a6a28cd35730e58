#include "leansearch/reasoning.hpp"

#include <cmath>
#include <sstream>

namespace leansearch {

AggregatedRanking aggregate(std::span<const RankedList> lists) {
    AggregatedRanking out;
    std::map<std::string, double> score;
    for (std::size_t j = 0; j < lists.size(); ++j) {
        for (std::size_t i = 0; i < lists[j].hits.size(); ++i) {
            const auto& name = lists[j].hits[i].decl_name;
            score[name] += 1.0 / std::log2(static_cast<double>(i) + 2.0);
            out.sources[name].emplace_back(j, i);
        }
    }
    out.entries.reserve(score.size());
    for (auto& [name, s] : score) out.entries.push_back({name, s});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const AggregatedEntry& a, const AggregatedEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.decl_name < b.decl_name;
                     });
    return out;
}

RankedList AggregatedRanking::to_ranked_list(std::string query) const {
    RankedList out{std::move(query), {}, Stage::aggregated};
    out.hits.reserve(entries.size());
    for (const auto& e : entries) out.hits.push_back({e.decl_name, e.score, out.hits.size(), false});
    return out;
}

// ---------------------------------------------------------------------------

json to_json(const TraceEvent& e) {
    return {{"seq", e.seq}, {"branch", e.branch}, {"type", e.type}, {"payload", e.payload}};
}

TraceLog::TraceLog(const TraceLog& other) {
    std::lock_guard lk(other.mu_);
    events_ = other.events_;
}

TraceLog& TraceLog::operator=(const TraceLog& other) {
    if (this == &other) return *this;
    std::vector<TraceEvent> copy = other.events();
    std::lock_guard lk(mu_);
    events_ = std::move(copy);
    return *this;
}

void TraceLog::set_listener(Listener listener) {
    std::lock_guard lk(mu_);
    listener_ = std::move(listener);
}

void TraceLog::append(int branch, std::string type, json payload) {
    TraceEvent e;
    Listener listener;
    {
        std::lock_guard lk(mu_);
        e = TraceEvent{events_.size(), branch, std::move(type), std::move(payload)};
        events_.push_back(e);
        listener = listener_;
    }
    if (listener) listener(e);
}

std::vector<TraceEvent> TraceLog::events() const {
    std::lock_guard lk(mu_);
    return events_;
}

std::vector<TraceEvent> TraceLog::events_since(std::size_t seq) const {
    std::lock_guard lk(mu_);
    if (seq >= events_.size()) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

std::size_t TraceLog::size() const {
    std::lock_guard lk(mu_);
    return events_.size();
}

std::string TraceLog::to_jsonl() const {
    std::string out;
    for (const auto& e : events()) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

}  // namespace leansearch
