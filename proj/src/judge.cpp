#include "leansearch/evaluation.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

namespace leansearch {

namespace {

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

// Uniform draw in [0, bound) by rejection, so no modulo bias.
std::uint64_t uniform_below(std::uint64_t& state, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        std::uint64_t x = splitmix64(state);
        if (x < limit) return x % bound;
    }
}

// Lexicographic unranking via the factorial number system.
Permutation unrank(std::uint64_t index, int n) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    Permutation out;
    for (int i = n; i >= 1; --i) {
        std::uint64_t f = factorial(i - 1);
        auto pos = static_cast<std::size_t>(index / f);
        index %= f;
        out.push_back(pool[pos]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    return out;
}

char label_char(int label) { return static_cast<char>('A' + label); }

std::string informal_name_of(std::string_view decl) {
    auto dot = decl.rfind('.');
    std::string tail(dot == std::string_view::npos ? decl : decl.substr(dot + 1));
    std::replace(tail.begin(), tail.end(), '_', ' ');
    return tail;
}

}  // namespace

std::vector<Permutation> sample_permutations(std::string_view query_id, std::uint64_t global_seed,
                                             int rounds, int systems) {
    if (systems < 1 || systems > 8) throw PreconditionError("systems must be in 1..8");
    const std::uint64_t total = factorial(systems);
    if (rounds < 0 || static_cast<std::uint64_t>(rounds) > total)
        throw PreconditionError("cannot draw " + std::to_string(rounds) + " distinct permutations of " +
                                std::to_string(systems) + " systems");

    std::uint64_t state = fnv1a64(query_id) ^ (global_seed * 0x9e3779b97f4a7c15ULL);
    std::vector<std::uint64_t> indices(static_cast<std::size_t>(total));
    for (std::uint64_t i = 0; i < total; ++i) indices[static_cast<std::size_t>(i)] = i;

    std::vector<Permutation> out;
    for (int r = 0; r < rounds; ++r) {
        auto i = static_cast<std::size_t>(r);
        auto j = i + static_cast<std::size_t>(uniform_below(state, total - i));
        std::swap(indices[i], indices[j]);
        out.push_back(unrank(indices[i], systems));
    }
    return out;
}

JudgeBlock hydrate_block(const CorpusSnapshot& corpus, std::string_view name) {
    JudgeBlock b;
    b.name = std::string(name);
    b.informal_name = informal_name_of(name);
    const auto* rec = corpus.find(name);
    if (!rec) return b;
    b.kind = rec->kind.label();
    b.signature = utf8_prefix(rec->signature, kJudgeSignatureChars);
    if (rec->value) b.value = utf8_prefix(*rec->value, kJudgeValueChars);
    if (rec->informal) b.informal = utf8_prefix(*rec->informal, kJudgeInformalChars);
    return b;
}

std::string render_block(const JudgeBlock& b) {
    std::string out;
    out += "Name: " + b.name + "\n";
    out += "Kind: " + (b.kind.empty() ? std::string("unknown") : b.kind) + "\n";
    out += "Informal name: " + b.informal_name + "\n";
    out += "Signature: " + b.signature + "\n";
    out += "Value: " + b.value + "\n";
    out += "Informal statement: " + b.informal + "\n";
    return out;
}

std::string build_judge_prompt(std::string_view query,
                               std::span<const std::vector<JudgeBlock>> per_system,
                               const Permutation& permutation) {
    const int n = static_cast<int>(per_system.size());
    if (permutation.size() != per_system.size())
        throw PreconditionError("permutation size does not match the number of systems");
    std::vector<int> system_at(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        int label = permutation[static_cast<std::size_t>(s)];
        if (label < 0 || label >= n || system_at[static_cast<std::size_t>(label)] != -1)
            throw PreconditionError("permutation is not a bijection onto the labels");
        system_at[static_cast<std::size_t>(label)] = s;
    }

    std::string labels;
    for (int l = 0; l < n; ++l) {
        if (l) labels += ", ";
        labels += label_char(l);
    }

    std::string out;
    out += "You are comparing search systems for a library of formal mathematics.\n";
    out += "Each system returned its top results for the query below. Rank the systems from most "
           "to least useful for the query.\n";
    out += "Ties are forbidden: produce a strict total order over all systems.\n\n";
    out += "Query: " + std::string(query) + "\n";
    for (int l = 0; l < n; ++l) {
        const auto& blocks = per_system[static_cast<std::size_t>(system_at[static_cast<std::size_t>(l)])];
        out += "\n### System ";
        out += label_char(l);
        out += "\n";
        if (blocks.empty()) {
            out += "(no results)\n";
            continue;
        }
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            out += "\n[" + std::to_string(i + 1) + "]\n";
            out += render_block(blocks[i]);
        }
    }
    out += "\nRespond with JSON only: {\"ranking\": [...]} where ranking lists every label (" + labels +
           ") exactly once, best first.\n";
    return out;
}

std::vector<int> parse_judge_response(std::string_view text, int systems) {
    json doc = extract_json_object(text);
    if (!doc.contains("ranking") || !doc["ranking"].is_array())
        throw ParseError("judge response has no ranking array", 0);
    std::vector<int> ranking;
    std::vector<bool> seen(static_cast<std::size_t>(systems), false);
    for (const auto& v : doc["ranking"]) {
        if (!v.is_string()) throw ParseError("ranking entries must be labels", 0);
        auto s = trim(v.get<std::string>());
        if (starts_with_ci(s, "system ")) s = trim(s.substr(7));
        if (s.size() != 1) throw ParseError("bad label '" + s + "'", 0);
        int label = std::toupper(static_cast<unsigned char>(s[0])) - 'A';
        if (label < 0 || label >= systems) throw ParseError("unknown label '" + s + "'", 0);
        if (seen[static_cast<std::size_t>(label)]) throw ParseError("duplicate label '" + s + "'", 0);
        seen[static_cast<std::size_t>(label)] = true;
        ranking.push_back(label);
    }
    if (ranking.size() != static_cast<std::size_t>(systems))
        throw ParseError("ranking lists " + std::to_string(ranking.size()) + " of " +
                             std::to_string(systems) + " labels", 0);
    return ranking;
}

int JudgeJudgment::rank_of_system(int s) const {
    int label = permutation.at(static_cast<std::size_t>(s));
    for (std::size_t i = 0; i < ranking.size(); ++i)
        if (ranking[i] == label) return static_cast<int>(i) + 1;
    throw PreconditionError("label missing from ranking");
}

namespace {

json nan_safe(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double spearman(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

JudgeReport judge_report(std::span<const JudgeJudgment> judgments, std::vector<std::string> systems) {
    if (judgments.empty()) throw PreconditionError("judge_report needs at least one judgment");
    const std::size_t n = systems.size();
    JudgeReport r;
    r.systems = std::move(systems);
    r.judgments = judgments.size();

    int max_round = 0;
    for (const auto& j : judgments) {
        if (j.permutation.size() != n || j.ranking.size() != n)
            throw PreconditionError("judgment " + j.query_id + " does not cover every system");
        max_round = std::max(max_round, j.round);
    }
    const auto rounds = static_cast<std::size_t>(max_round) + 1;

    std::vector<double> sum(n, 0.0);
    std::vector<std::vector<double>> pos_sum(n, std::vector<double>(n, 0.0));
    r.position_count.assign(n, std::vector<std::size_t>(n, 0));
    std::vector<std::vector<double>> round_sum(rounds, std::vector<double>(n, 0.0));
    std::vector<std::size_t> round_count(rounds, 0);
    std::map<std::string, std::map<int, std::vector<int>>> by_query;

    for (const auto& j : judgments) {
        std::vector<int> ranks(n);
        for (std::size_t s = 0; s < n; ++s) {
            int rank = j.rank_of_system(static_cast<int>(s));
            ranks[s] = rank;
            sum[s] += rank;
            auto label = static_cast<std::size_t>(j.permutation[s]);
            pos_sum[s][label] += rank;
            ++r.position_count[s][label];
            round_sum[static_cast<std::size_t>(j.round)][s] += rank;
        }
        ++round_count[static_cast<std::size_t>(j.round)];
        by_query[j.query_id][j.round] = std::move(ranks);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.mean_rank.resize(n);
    r.position_mean_rank.assign(n, std::vector<double>(n, nan));
    for (std::size_t s = 0; s < n; ++s) {
        r.mean_rank[s] = sum[s] / static_cast<double>(judgments.size());
        for (std::size_t l = 0; l < n; ++l)
            if (r.position_count[s][l])
                r.position_mean_rank[s][l] = pos_sum[s][l] / static_cast<double>(r.position_count[s][l]);
    }
    r.round_mean_rank.assign(rounds, std::vector<double>(n, nan));
    for (std::size_t k = 0; k < rounds; ++k)
        if (round_count[k])
            for (std::size_t s = 0; s < n; ++s)
                r.round_mean_rank[k][s] = round_sum[k][s] / static_cast<double>(round_count[k]);

    double corr_sum = 0;
    std::size_t corr_n = 0;
    for (const auto& [qid, per_round] : by_query) {
        for (auto a = per_round.begin(); a != per_round.end(); ++a) {
            for (auto b = std::next(a); b != per_round.end(); ++b) {
                double c = spearman(a->second, b->second);
                if (std::isnan(c)) continue;
                corr_sum += c;
                ++corr_n;
            }
        }
    }
    r.cross_round_correlation = corr_n ? corr_sum / static_cast<double>(corr_n) : nan;
    return r;
}

json JudgeReport::to_json() const {
    const std::size_t n = systems.size();
    json out;
    out["metadata"] = {
        {"judgments", judgments},
        {"rank", "1 is best; lower mean rank is better"},
        {"cross_round_statistic",
         "mean pairwise Spearman rank correlation between rounds, over per-query system rank vectors"}};
    json mean = json::object();
    for (std::size_t s = 0; s < n; ++s) mean[systems[s]] = mean_rank[s];
    out["mean_rank"] = mean;

    json table = json::object();
    for (std::size_t s = 0; s < n; ++s) {
        json row = json::object();
        for (std::size_t l = 0; l < n; ++l)
            row[std::string(1, label_char(static_cast<int>(l)))] = {
                {"mean_rank", nan_safe(position_mean_rank[s][l])}, {"count", position_count[s][l]}};
        table[systems[s]] = row;
    }
    out["position_mean_rank"] = table;

    json rounds = json::array();
    for (const auto& rr : round_mean_rank) {
        json row = json::object();
        for (std::size_t s = 0; s < n; ++s) row[systems[s]] = nan_safe(rr[s]);
        rounds.push_back(row);
    }
    out["round_mean_rank"] = rounds;
    out["cross_round_correlation"] = nan_safe(cross_round_correlation);
    return out;
}

JudgeProtocolResult run_judge_protocol(std::span<const JudgeQuery> queries,
                                       std::span<const RunFile> runs, const CorpusSnapshot& corpus,
                                       TextProvider& judge, const JudgeProtocolOptions& options) {
    const int systems = static_cast<int>(runs.size());
    if (systems < 2 || systems > 4) throw PreconditionError("the judge protocol compares 2 to 4 systems");

    struct Task {
        std::size_t query;
        int round;
        Permutation permutation;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<std::vector<JudgeBlock>>> blocks(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (const auto& run : runs) {
            std::vector<JudgeBlock> sys;
            auto it = run.find(queries[q].query_id);
            if (it != run.end())
                for (std::size_t i = 0; i < it->second.hits.size() && i < options.top_n; ++i)
                    sys.push_back(hydrate_block(corpus, it->second.hits[i].decl_name));
            blocks[q].push_back(std::move(sys));
        }
        auto perms = sample_permutations(queries[q].query_id, options.seed, options.rounds, systems);
        for (int r = 0; r < options.rounds; ++r)
            tasks.push_back({q, r, std::move(perms[static_cast<std::size_t>(r)])});
    }

    std::vector<std::optional<JudgeJudgment>> slots(tasks.size());
    parallel_for(tasks.size(), std::max<std::size_t>(1, options.max_in_flight), [&](std::size_t t) {
        const auto& task = tasks[t];
        const auto& query = queries[task.query];
        TextRequest req;
        req.role = "ranking_judge";
        req.prompt = build_judge_prompt(query.text, blocks[task.query], task.permutation);
        req.params.seed = options.seed;
        for (int attempt = 0; attempt <= options.retries; ++attempt) {
            try {
                auto ranking = parse_judge_response(judge.generate(req), systems);
                slots[t] = JudgeJudgment{query.query_id, task.round, task.permutation, std::move(ranking)};
                return;
            } catch (const ProviderError&) {
            } catch (const ParseError&) {
            }
        }
    });

    JudgeProtocolResult out;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (slots[t])
            out.judgments.push_back(std::move(*slots[t]));
        else
            out.missing.emplace_back(queries[tasks[t].query].query_id, tasks[t].round);
    }
    return out;
}

}  // namespace leansearch
