#include "leansearch/service.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>

namespace leansearch {

namespace fs = std::filesystem;

namespace {

const std::vector<std::size_t> kDefaultKs = {1, 5, 10, 20, 30, 50, 100};

std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }

struct Globals {
    std::string config_path;
    std::uint64_t seed = 0;
};

ServiceConfig load_config(const Globals& g, bool required = true) {
    std::string path = g.config_path;
    if (path.empty())
        if (const char* env = std::getenv("LEANSEARCH_CONFIG")) path = env;
    if (path.empty()) {
        if (required) throw ConfigError("this command needs --config (or LEANSEARCH_CONFIG)");
        ServiceConfig c = ServiceConfig::from_json(json::object(), fs::current_path().string());
        c.apply_env_overrides();
        return c;
    }
    auto c = ServiceConfig::load(path);
    c.reasoning.seed = g.seed;
    return c;
}

// Paths given on the command line are relative to the working directory.
std::string cli_path(const std::string& p) { return p.empty() ? p : fs::absolute(p).string(); }

void write_output(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-")
        std::cout << contents;
    else
        write_file_atomic(path, contents);
}

std::string ranked_lines(const RankedList& list) {
    std::string out;
    for (const auto& h : list.hits)
        out += std::to_string(h.rank + 1) + "\t" + format_fixed(h.score, 6) + "\t" + h.decl_name + "\n";
    return out;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Globals& g, const std::string& corpus_arg, const std::string& out) {
    auto config = load_config(g, corpus_arg.empty());
    auto path = corpus_arg.empty() ? config.resolve(config.corpus_path) : cli_path(corpus_arg);
    auto snapshot = load_corpus(path);
    auto order = topological_order(snapshot);
    std::size_t internal = 0, external = 0;
    for (const auto& [name, rec] : snapshot.records()) {
        std::set<std::string> deps(rec.deps.begin(), rec.deps.end());
        for (const auto& d : deps) (snapshot.is_external(d) ? external : internal)++;
    }
    std::cout << "ingested " << snapshot.size() << " declarations (" << internal
              << " internal dependency edges, " << external << " external references)\n";
    if (!out.empty()) save_corpus(snapshot, cli_path(out));
    return 0;
}

int cmd_informalize(const Globals& g, const std::string& corpus_arg, const std::string& out,
                    std::size_t concurrency) {
    auto config = load_config(g);
    Engine engine(config);
    auto path = corpus_arg.empty() ? config.resolve(config.corpus_path) : cli_path(corpus_arg);
    auto snapshot = load_corpus(path);
    auto& primary = engine.text_provider("informalizer");
    auto& fallback = config.has_role("informalizer_fallback") ? engine.text_provider("informalizer_fallback")
                                                              : primary;
    InformalizeOptions opts;
    opts.concurrency = concurrency;
    opts.params.seed = g.seed;
    auto result = informalize(snapshot, primary, fallback, opts);
    save_corpus(result.snapshot, cli_path(out));
    for (const auto& f : result.failures) std::cerr << "failed: " << f.name << ": " << f.reason << "\n";
    std::cout << "informalized " << result.snapshot.size() - result.failures.size() << " of "
              << result.snapshot.size() << " declarations; " << result.failures.size() << " failures\n";
    return 0;
}

int cmd_index(const Globals& g, const std::string& corpus_arg, const std::string& out_arg,
              bool kind_blind, std::size_t concurrency) {
    auto config = load_config(g);
    if (kind_blind) config.kind_aware_template = false;
    Engine engine(config);
    auto path = corpus_arg.empty() ? config.resolve(config.corpus_path) : cli_path(corpus_arg);
    auto out = out_arg.empty() ? config.resolve(config.index_path) : cli_path(out_arg);
    if (out.empty()) throw ConfigError("no index output path (use --out or set \"index\" in the config)");
    auto snapshot = load_corpus(path);
    auto tmpl = config.template_config();
    std::vector<Passage> passages;
    for (const auto& [name, rec] : snapshot.records()) passages.push_back(compose_passage(rec, tmpl));
    BuildOptions opts;
    opts.concurrency = concurrency;
    auto index = build_index(passages, engine.embedder(), tmpl.version, opts);
    index.save(out);
    std::cout << "indexed " << index.size() << " passages (dim " << index.dim() << ", embedder "
              << index.provenance().embedder_model << ", template " << tmpl.version << ")\n";
    return 0;
}

struct SearchArgs {
    std::string query;
    std::string queries;
    std::string out;
    std::size_t k = 10;
    bool no_rerank = false;
    bool kind_agnostic = false;
    bool as_json = false;
};

int cmd_search(const Globals& g, const SearchArgs& a) {
    auto config = load_config(g);
    Engine engine(config);
    SearchOptions opts = config.search;
    if (a.no_rerank) opts.rerank = false;
    if (a.kind_agnostic) opts.kind_aware = false;

    if (!a.queries.empty()) {
        auto items = load_qr_benchmark(cli_path(a.queries));
        RunFile run;
        for (const auto& row : qr_rows(items)) {
            const QRQuery* q = nullptr;
            for (const auto& qq : row.item->queries)
                if (qq.style == row.style) q = &qq;
            run[row.query_id] = engine.search(q->text, a.k, opts);
        }
        write_output(cli_path(a.out), serialize_run_file(run));
        if (!a.out.empty()) std::cout << "wrote " << run.size() << " ranked lists to " << a.out << "\n";
        return 0;
    }
    if (a.query.empty()) throw PreconditionError("give --query or --queries");
    auto list = engine.search(a.query, a.k, opts);
    if (a.as_json) {
        json hits = json::array();
        for (const auto& h : list.hits)
            hits.push_back({{"name", h.decl_name}, {"score", h.score}, {"rank", h.rank + 1}});
        std::cout << json{{"query", a.query}, {"stage", to_string(list.stage)}, {"hits", hits}}.dump(2) << "\n";
    } else {
        std::cout << ranked_lines(list);
    }
    return 0;
}

struct ReasonArgs {
    std::string informal;
    std::string formal;
    std::string bench;
    std::string out;
    std::string trace;
    std::optional<int> budget;
    std::optional<int> max_revisions;
    bool no_reflection = false;
    std::size_t k = 100;
    bool as_json = false;
};

int cmd_reason(const Globals& g, const ReasonArgs& a) {
    auto config = load_config(g);
    ReasoningConfig cfg = config.reasoning;
    if (a.budget) cfg.budget = *a.budget;
    if (a.max_revisions) cfg.max_revisions = *a.max_revisions;
    if (a.no_reflection) cfg.reflection_enabled = false;
    Engine engine(config);

    auto capped = [&](const ReasoningResult& r, const std::string& query) {
        auto list = r.ranking.to_ranked_list(query);
        list.truncate(a.k);
        return list;
    };

    if (!a.bench.empty()) {
        auto items = load_mpr_benchmark(cli_path(a.bench));
        RunFile run;
        std::size_t accepted = 0;
        for (const auto& item : items) {
            auto result = engine.reason({item.informal, item.formal}, cfg);
            accepted += result.status == RunStatus::accepted ? 1 : 0;
            run[item.id] = capped(result, item.id);
        }
        write_output(cli_path(a.out), serialize_run_file(run));
        if (!a.out.empty())
            std::cout << "reasoned over " << items.size() << " items (" << accepted << " accepted); wrote "
                      << a.out << "\n";
        return 0;
    }
    if (a.formal.empty()) throw PreconditionError("give --formal or --bench");
    auto result = engine.reason({a.informal, a.formal}, cfg);
    if (!a.trace.empty()) write_file_atomic(cli_path(a.trace), result.trace.to_jsonl());
    if (a.as_json) {
        std::cout << to_json(result).dump(2) << "\n";
    } else {
        std::cout << "status: " << to_string(result.status) << "\n" << ranked_lines(capped(result, a.formal));
    }
    return 0;
}

std::string qr_table(const json& report, std::span<const std::size_t> ks) {
    std::string out = "group\tn";
    for (auto k : ks) out += "\tnDCG@" + std::to_string(k) + "\tRecall@" + std::to_string(k);
    out += "\n";
    auto row = [&](const std::string& label, const json& cell) {
        out += label + "\t" + std::to_string(cell.at("n").get<std::size_t>());
        for (auto k : ks)
            out += "\t" + format_fixed(cell.at("ndcg@" + std::to_string(k)).get<double>(), 4) + "\t" +
                   format_fixed(cell.at("recall@" + std::to_string(k)).get<double>(), 4);
        out += "\n";
    };
    row("overall", report["overall"]);
    for (auto it = report["by_difficulty"].begin(); it != report["by_difficulty"].end(); ++it)
        row("difficulty:" + it.key(), it.value());
    for (auto it = report["by_style"].begin(); it != report["by_style"].end(); ++it)
        row("style:" + it.key(), it.value());
    return out;
}

std::string mpr_table(const json& report, std::span<const std::size_t> ks) {
    std::string out = "k\tn\tgroup_recall\tcovered_main_only\tcovered_main_or_alt\n";
    const auto& cell = report["overall"];
    for (auto k : ks) {
        auto ks_ = std::to_string(k);
        out += ks_ + "\t" + std::to_string(cell.at("n").get<std::size_t>()) + "\t" +
               format_fixed(cell.at("group_recall@" + ks_).get<double>(), 4) + "\t" +
               format_fixed(cell.at("covered_main_only@" + ks_).get<double>(), 4) + "\t" +
               format_fixed(cell.at("covered_main_or_alt@" + ks_).get<double>(), 4) + "\n";
    }
    return out;
}

struct EvalArgs {
    std::string runs;
    std::string bench;
    std::vector<std::size_t> ks;
    std::string out;
    std::string scope = "original_groups";
    std::string perspective = "full";
    std::vector<std::string> snapshots;
};

void check_ks(const std::vector<std::size_t>& ks) {
    for (auto k : ks)
        if (k == 0) throw PreconditionError("--k values must be at least 1");
}

int cmd_eval_qr(const EvalArgs& a) {
    auto ks = a.ks.empty() ? kDefaultKs : a.ks;
    check_ks(ks);
    auto items = load_qr_benchmark(cli_path(a.bench));
    auto mode = perspective_from_string(a.perspective);
    if (mode != Perspective::full) {
        if (a.snapshots.empty()) throw PreconditionError("--perspective " + a.perspective + " needs --snapshot files");
        std::vector<std::set<std::string>> names;
        for (const auto& s : a.snapshots) {
            std::set<std::string> n;
            for (const auto& [name, rec] : load_corpus(cli_path(s)).records()) n.insert(name);
            names.push_back(std::move(n));
        }
        items = fair_subset(items, names, mode);
    }
    auto run = load_run_file(cli_path(a.runs));
    auto report = evaluate_qr(items, run, ks);
    report["metadata"]["perspective"] = a.perspective;
    if (!a.out.empty()) write_file_atomic(cli_path(a.out), report.dump(2) + "\n");
    std::cout << qr_table(report, ks);
    return 0;
}

int cmd_eval_mpr(const EvalArgs& a) {
    auto ks = a.ks.empty() ? kDefaultKs : a.ks;
    check_ks(ks);
    GroupScope scope;
    if (a.scope == "original_groups") scope = GroupScope::original_groups;
    else if (a.scope == "all_groups") scope = GroupScope::all_groups;
    else throw PreconditionError("--scope must be original_groups or all_groups");
    auto items = load_mpr_benchmark(cli_path(a.bench));
    auto run = load_run_file(cli_path(a.runs));
    auto report = evaluate_mpr(items, run, ks, scope);
    if (!a.out.empty()) write_file_atomic(cli_path(a.out), report.dump(2) + "\n");
    std::cout << mpr_table(report, ks);
    return 0;
}

struct JudgeArgs {
    std::vector<std::string> runs;
    std::vector<std::string> names;
    std::string bench;
    std::string task = "qr";
    int rounds = 3;
    std::size_t top_n = 5;
    std::size_t concurrency = 1;
    std::string out;
    std::string assignments;
    bool dry_run = false;
};

int cmd_judge(const Globals& g, const JudgeArgs& a) {
    if (a.runs.size() < 2 || a.runs.size() > 4) throw PreconditionError("judge compares 2 to 4 run files");
    std::vector<std::string> names = a.names;
    if (names.empty())
        for (const auto& r : a.runs) names.push_back(fs::path(r).stem().string());
    if (names.size() != a.runs.size()) throw PreconditionError("--names must match --runs");
    const int systems = static_cast<int>(a.runs.size());

    std::vector<JudgeQuery> queries;
    if (a.task == "qr") {
        auto items = load_qr_benchmark(cli_path(a.bench));
        for (const auto& row : qr_rows(items))
            for (const auto& q : row.item->queries)
                if (q.style == row.style) queries.push_back({row.query_id, q.text});
    } else if (a.task == "mpr") {
        for (const auto& item : load_mpr_benchmark(cli_path(a.bench)))
            queries.push_back({item.id, item.informal.empty() ? item.formal : item.informal});
    } else {
        throw PreconditionError("--task must be qr or mpr");
    }

    std::string assignment_lines;
    for (const auto& q : queries) {
        auto perms = sample_permutations(q.query_id, g.seed, a.rounds, systems);
        for (std::size_t r = 0; r < perms.size(); ++r) {
            json labels = json::object();
            for (int s = 0; s < systems; ++s)
                labels[names[static_cast<std::size_t>(s)]] =
                    std::string(1, static_cast<char>('A' + perms[r][static_cast<std::size_t>(s)]));
            assignment_lines += json{{"query_id", q.query_id}, {"round", r}, {"labels", labels}}.dump() + "\n";
        }
    }
    if (!a.assignments.empty()) write_file_atomic(cli_path(a.assignments), assignment_lines);
    if (a.dry_run) {
        if (a.assignments.empty()) std::cout << assignment_lines;
        return 0;
    }

    auto config = load_config(g);
    Engine engine(config);
    std::vector<RunFile> runs;
    for (const auto& r : a.runs) runs.push_back(load_run_file(cli_path(r)));
    JudgeProtocolOptions opts;
    opts.seed = g.seed;
    opts.rounds = a.rounds;
    opts.top_n = a.top_n;
    opts.max_in_flight = a.concurrency;
    CorpusSnapshot empty;
    const CorpusSnapshot& corpus = config.corpus_path.empty() ? empty : engine.corpus();
    auto result = run_judge_protocol(queries, runs, corpus, engine.text_provider("ranking_judge"), opts);
    if (result.judgments.empty()) throw Error("every judgment was malformed; no report");
    auto report = judge_report(result.judgments, names);
    json doc = report.to_json();
    doc["metadata"]["seed"] = g.seed;
    doc["metadata"]["rounds"] = a.rounds;
    json missing = json::array();
    for (const auto& [qid, round] : result.missing) missing.push_back({{"query_id", qid}, {"round", round}});
    doc["missing"] = missing;
    if (!a.out.empty()) write_file_atomic(cli_path(a.out), doc.dump(2) + "\n");

    std::cout << "system\tmean_rank";
    for (int l = 0; l < systems; ++l) std::cout << "\tpos_" << static_cast<char>('A' + l);
    std::cout << "\n";
    for (std::size_t s = 0; s < names.size(); ++s) {
        std::cout << names[s] << "\t" << format_fixed(report.mean_rank[s], 4);
        for (int l = 0; l < systems; ++l) {
            double v = report.position_mean_rank[s][static_cast<std::size_t>(l)];
            std::cout << "\t" << (std::isnan(v) ? std::string("-") : format_fixed(v, 4));
        }
        std::cout << "\n";
    }
    std::cout << "judgments " << result.judgments.size() << ", missing " << result.missing.size()
              << ", cross-round spearman "
              << (std::isnan(report.cross_round_correlation) ? std::string("-")
                                                             : format_fixed(report.cross_round_correlation, 4))
              << "\n";
    return 0;
}

struct ProveArgs {
    std::string problems;
    std::string mode;
    std::string out;
    std::optional<int> rounds;
    std::optional<double> verifier_wait;
    std::size_t concurrency = 1;
    std::size_t verifier_concurrency = 4;
};

int cmd_prove(const Globals& g, const ProveArgs& a) {
    auto config = load_config(g);
    LoopConfig loop = config.loop;
    if (!a.mode.empty()) loop.retrieval_mode = retrieval_mode_from_string(a.mode);
    if (a.rounds) loop.reflection_rounds = *a.rounds;
    if (a.verifier_wait) loop.verifier_wait_seconds = *a.verifier_wait;
    loop.validate();
    Engine engine(config);
    auto problems = load_problems(cli_path(a.problems));
    auto providers = engine.prover_providers(loop);
    GatedVerifier gate(*providers.verifier, static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, a.verifier_concurrency)));
    providers.verifier = &gate;

    std::vector<LoopOutcome> outcomes(problems.size());
    parallel_for(problems.size(), std::max<std::size_t>(1, a.concurrency),
                 [&](std::size_t i) { outcomes[i] = run_reflection_loop(problems[i], loop, providers); });

    std::string lines;
    std::size_t solved = 0;
    for (const auto& o : outcomes) {
        lines += to_json(o).dump() + "\n";
        solved += o.solved ? 1 : 0;
        std::cout << o.problem_id << "\t" << (o.solved ? "solved" : "unsolved") << "\tattempts "
                  << o.attempts.size() << (o.error ? "\terror: " + *o.error : "") << "\n";
    }
    if (!a.out.empty()) write_file_atomic(cli_path(a.out), lines);
    std::cout << "solved " << solved << " of " << outcomes.size() << " (mode " << to_string(loop.retrieval_mode)
              << ")\n";
    return 0;
}

int cmd_serve(const Globals& g, const std::string& host, std::optional<int> port, const std::string& ui_dir) {
    auto config = load_config(g);
    if (!host.empty()) config.server.host = host;
    if (port) config.server.port = *port;
    if (!ui_dir.empty()) config.server.ui_dir = cli_path(ui_dir);
    else if (!config.server.ui_dir.empty()) config.server.ui_dir = config.resolve(config.server.ui_dir);
    Engine engine(config);
    HttpServer server(engine, config.server);
    int bound = server.start();
    std::cout << "listening on http://" << config.server.host << ":" << bound << std::endl;
    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::cout << "shutting down; draining jobs" << std::endl;
    server.stop();
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"leansearch: declaration search, reasoning-mode premise retrieval and evaluation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "configuration file");
    app.add_option("--seed", g.seed, "seed for every random choice");

    std::function<int()> action;

    std::string corpus, out;
    std::size_t concurrency = 1;

    auto* ingest = app.add_subcommand("ingest", "load and validate a corpus");
    ingest->add_option("--corpus", corpus, "corpus file (defaults to the configured one)");
    ingest->add_option("--out", out, "write the normalized corpus here");
    ingest->callback([&] { action = [&] { return cmd_ingest(g, corpus, out); }; });

    auto* inf = app.add_subcommand("informalize", "generate descriptions bottom-up along the dependency graph");
    inf->add_option("--corpus", corpus, "input corpus");
    inf->add_option("--out", out, "output corpus")->required();
    inf->add_option("--concurrency", concurrency, "parallel provider calls");
    inf->callback([&] { action = [&] { return cmd_informalize(g, corpus, out, concurrency); }; });

    bool kind_blind = false;
    auto* idx = app.add_subcommand("index", "embed every passage and save the vector index");
    idx->add_option("--corpus", corpus, "informalized corpus");
    idx->add_option("--out", out, "index file (defaults to the configured one)");
    idx->add_flag("--kind-blind", kind_blind, "render every declaration with the theorem template");
    idx->add_option("--concurrency", concurrency, "parallel embedding calls");
    idx->callback([&] { action = [&] { return cmd_index(g, corpus, out, kind_blind, concurrency); }; });

    SearchArgs sa;
    auto* search = app.add_subcommand("search", "standard-mode search");
    auto* sq = search->add_option("--query", sa.query, "query text");
    search->add_option("--queries", sa.queries, "QR benchmark file; writes a run file")->excludes(sq);
    search->add_option("--out", sa.out, "run file output for --queries");
    search->add_option("--k", sa.k, "number of results")->check(CLI::PositiveNumber);
    search->add_flag("--no-rerank", sa.no_rerank, "embedding similarity only");
    search->add_flag("--no-kind-aware", sa.kind_agnostic, "kind-agnostic rerank instruction");
    search->add_flag("--json", sa.as_json, "JSON output");
    search->callback([&] { action = [&] { return cmd_search(g, sa); }; });

    ReasonArgs ra;
    auto* reason = app.add_subcommand("reason", "reasoning-mode premise retrieval");
    reason->add_option("--informal", ra.informal, "informal statement");
    auto* rf = reason->add_option("--formal", ra.formal, "formal statement");
    reason->add_option("--bench", ra.bench, "MPR benchmark file; writes a run file")->excludes(rf);
    reason->add_option("--out", ra.out, "run file output for --bench");
    reason->add_option("--trace", ra.trace, "write the trace log here");
    reason->add_option("--budget", ra.budget, "parallel branches")->check(CLI::PositiveNumber);
    reason->add_option("--max-revisions", ra.max_revisions, "revision cap")->check(CLI::NonNegativeNumber);
    reason->add_flag("--no-reflection", ra.no_reflection, "skip the judge and reviser");
    reason->add_option("--k", ra.k, "ranking length")->check(CLI::PositiveNumber);
    reason->add_flag("--json", ra.as_json, "JSON output");
    reason->callback([&] { action = [&] { return cmd_reason(g, ra); }; });

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "score run files against a benchmark");
    eval->require_subcommand(1);
    auto add_eval_common = [&](CLI::App* c) {
        c->add_option("--runs", ea.runs, "run file")->required();
        c->add_option("--bench", ea.bench, "benchmark file")->required();
        c->add_option("--k", ea.ks, "cutoffs (repeatable)");
        c->add_option("--out", ea.out, "write the JSON report here");
    };
    auto* eqr = eval->add_subcommand("qr", "nDCG@k and Recall@k");
    add_eval_common(eqr);
    eqr->add_option("--perspective", ea.perspective, "fair, at_least_one or full");
    eqr->add_option("--snapshot", ea.snapshots, "corpus snapshot for the fair subset (repeatable)");
    eqr->callback([&] { action = [&] { return cmd_eval_qr(ea); }; });
    auto* empr = eval->add_subcommand("mpr", "group recall and Covered@k");
    add_eval_common(empr);
    empr->add_option("--scope", ea.scope, "original_groups or all_groups");
    empr->callback([&] { action = [&] { return cmd_eval_mpr(ea); }; });

    JudgeArgs ja;
    auto* judge = app.add_subcommand("judge", "blind LLM ranking of 2 to 4 systems");
    judge->add_option("--runs", ja.runs, "run files")->required()->expected(2, 4);
    judge->add_option("--names", ja.names, "system names (default: run file stems)");
    judge->add_option("--bench", ja.bench, "benchmark file with the query texts")->required();
    judge->add_option("--task", ja.task, "qr or mpr");
    judge->add_option("--rounds", ja.rounds, "label permutations per query")->check(CLI::PositiveNumber);
    judge->add_option("--top-n", ja.top_n, "results shown per system")->check(CLI::PositiveNumber);
    judge->add_option("--concurrency", ja.concurrency, "judge calls in flight");
    judge->add_option("--out", ja.out, "write the JSON report here");
    judge->add_option("--assignments", ja.assignments, "write the label assignments here");
    judge->add_flag("--dry-run", ja.dry_run, "only draw the label assignments");
    judge->callback([&] { action = [&] { return cmd_judge(g, ja); }; });

    ProveArgs pa;
    auto* prove = app.add_subcommand("prove", "reflection-loop prover harness");
    prove->add_option("--problems", pa.problems, "problem file")->required();
    prove->add_option("--mode", pa.mode, "none, standard_reflect, finder_like_reflect, state_based, "
                                         "statement_based or reasoning_sketch");
    prove->add_option("--out", pa.out, "write outcomes here");
    prove->add_option("--rounds", pa.rounds, "reflection rounds")->check(CLI::NonNegativeNumber);
    prove->add_option("--verifier-wait", pa.verifier_wait, "seconds between verifier retries")
        ->check(CLI::NonNegativeNumber);
    prove->add_option("--concurrency", pa.concurrency, "problems in flight");
    prove->add_option("--verifier-concurrency", pa.verifier_concurrency, "verifier checks in flight");
    prove->callback([&] { action = [&] { return cmd_prove(g, pa); }; });

    std::string host, ui_dir;
    std::optional<int> port;
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port (0 picks a free one)");
    serve->add_option("--ui-dir", ui_dir, "static files served under /ui");
    serve->callback([&] { action = [&] { return cmd_serve(g, host, port, ui_dir); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}

}  // namespace leansearch
