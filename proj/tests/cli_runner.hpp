#pragma once

#include "leansearch/util.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace testing {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

// Runs the CLI binary in `cwd` with extra environment variables.
inline CliRun run_cli(const std::vector<std::string>& args, const std::filesystem::path& cwd,
                      const std::map<std::string, std::string>& env = {}) {
    static int counter = 0;
    auto out_path = cwd / (".cli-out-" + std::to_string(counter));
    auto err_path = cwd / (".cli-err-" + std::to_string(counter++));
    std::string cmd = "cd " + shell_quote(cwd.string()) + " && env";
    for (const auto& [k, v] : env) cmd += " " + k + "=" + shell_quote(v);
    cmd += " " + shell_quote(LEANSEARCH_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " > " + shell_quote(out_path.string()) + " 2> " + shell_quote(err_path.string());
    int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = leansearch::read_file(out_path.string());
    r.err = leansearch::read_file(err_path.string());
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return r;
}

inline std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

// The full offline pipeline in `dir`. Returns the outputs keyed by step, each
// holding stdout followed by any file the step wrote.
inline std::map<std::string, std::string> run_pipeline(const std::filesystem::path& dir, std::string& failure) {
    const std::string fx = LEANSEARCH_FIXTURES_DIR;
    const std::string cfg = fx + "/mock_config.json";
    std::map<std::string, std::string> env = {{"LEANSEARCH_CORPUS", (dir / "corpus.informal.jsonl").string()},
                                              {"LEANSEARCH_INDEX", (dir / "index.bin").string()}};
    struct Step {
        std::string name;
        std::vector<std::string> args;
        std::vector<std::string> files;
    };
    std::vector<Step> steps = {
        {"ingest", {"--config", cfg, "ingest", "--corpus", fx + "/corpus.jsonl", "--out", "corpus.jsonl"}, {"corpus.jsonl"}},
        {"informalize", {"--config", cfg, "informalize", "--corpus", "corpus.jsonl", "--out", "corpus.informal.jsonl"},
         {"corpus.informal.jsonl"}},
        {"index", {"--config", cfg, "index"}, {"index.bin"}},
        {"search", {"--config", cfg, "search", "--queries", fx + "/qr_bench.jsonl", "--out", "qr_runs.jsonl"},
         {"qr_runs.jsonl"}},
        {"search_embed", {"--config", cfg, "search", "--queries", fx + "/qr_bench.jsonl", "--no-rerank", "--out",
                          "qr_embed.jsonl"},
         {"qr_embed.jsonl"}},
        {"eval_qr", {"--config", cfg, "eval", "qr", "--runs", "qr_runs.jsonl", "--bench", fx + "/qr_bench.jsonl",
                     "--out", "qr_report.json"},
         {"qr_report.json"}},
        {"reason", {"--config", cfg, "--seed", "3", "reason", "--bench", fx + "/mpr_bench.jsonl", "--budget", "1",
                    "--out", "mpr_runs.jsonl"},
         {"mpr_runs.jsonl"}},
        {"eval_mpr", {"--config", cfg, "eval", "mpr", "--runs", "mpr_runs.jsonl", "--bench", fx + "/mpr_bench.jsonl",
                      "--out", "mpr_report.json"},
         {"mpr_report.json"}},
        {"judge", {"--config", cfg, "--seed", "7", "judge", "--runs", "qr_runs.jsonl", "qr_embed.jsonl", "--rounds", "2",
                   "--bench", fx + "/qr_bench.jsonl", "--out", "judge.json", "--assignments", "assignments.jsonl"},
         {"judge.json", "assignments.jsonl"}},
        {"prove", {"--config", cfg, "prove", "--problems", fx + "/problems.jsonl", "--out", "outcomes.jsonl"},
         {"outcomes.jsonl"}},
    };
    std::map<std::string, std::string> outputs;
    for (const auto& s : steps) {
        auto r = run_cli(s.args, dir, env);
        if (r.exit_code != 0) {
            failure = s.name + " exited " + std::to_string(r.exit_code) + ": " + r.err;
            return outputs;
        }
        std::string all = r.out;
        for (const auto& f : s.files) all += "\n--- " + f + "\n" + leansearch::read_file((dir / f).string());
        outputs[s.name] = std::move(all);
    }
    return outputs;
}

}  // namespace testing
