#include "cli_runner.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace leansearch;

namespace {

const std::string kFixtures = LEANSEARCH_FIXTURES_DIR;

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
    testing::TempDir dir;
    CHECK(testing::run_cli({"frobnicate"}, dir.path()).exit_code == 2);
    CHECK(testing::run_cli({}, dir.path()).exit_code == 2);
    CHECK(testing::run_cli({"search", "--k", "0", "--query", "x"}, dir.path()).exit_code == 2);
    auto help = testing::run_cli({"--help"}, dir.path());
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("reason") != std::string::npos);
}

TEST_CASE("runtime errors exit with 1 and a message") {
    testing::TempDir dir;
    auto r = testing::run_cli({"search", "--query", "x"}, dir.path());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("--config") != std::string::npos);
    auto missing = testing::run_cli({"ingest", "--corpus", "nope.jsonl"}, dir.path());
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("error: ") == 0);
}

TEST_CASE("full offline pipeline") {
    testing::TempDir dir;
    std::string failure;
    auto out = testing::run_pipeline(dir.path(), failure);
    REQUIRE_MESSAGE(failure.empty(), failure);
    CHECK(out["ingest"].rfind("ingested 50 declarations", 0) == 0);
    CHECK(out["informalize"].rfind("informalized 50 of 50", 0) == 0);
    CHECK(out["index"].find("hash-embedder-64") != std::string::npos);
    CHECK(out["eval_qr"].find("nDCG") != std::string::npos);
    CHECK(out["prove"].find("solved 2 of 3 (mode none)") != std::string::npos);

    std::map<std::string, std::string> env = {{"LEANSEARCH_CORPUS", dir.file("corpus.informal.jsonl")},
                                              {"LEANSEARCH_INDEX", dir.file("index.bin")}};
    const std::string cfg = kFixtures + "/mock_config.json";
    auto top5 = testing::run_cli({"--config", cfg, "search", "--query", "commutative addition", "--k", "5", "--no-rerank"},
                                 dir.path(), env);
    REQUIRE(top5.exit_code == 0);
    CHECK(testing::count_lines(top5.out) == 5);
    CHECK(top5.out.rfind("1\t", 0) == 0);

    auto as_json = testing::run_cli({"--config", cfg, "search", "--query", "commutative addition", "--k", "3", "--json"},
                                    dir.path(), env);
    REQUIRE(as_json.exit_code == 0);
    auto j = json::parse(as_json.out);
    CHECK(j["hits"].size() == 3);
    CHECK(j["stage"] == "reranked");

    auto reason = testing::run_cli({"--config", cfg, "reason", "--formal", "theorem t (a b : ℕ) : a + b = b + a",
                                    "--budget", "1", "--json", "--trace", "trace.jsonl"},
                                   dir.path(), env);
    REQUIRE(reason.exit_code == 0);
    CHECK(json::parse(reason.out).contains("ranking"));
    CHECK(read_file(dir.file("trace.jsonl")).find("\"sketch\"") != std::string::npos);

    auto outcomes = read_lines(dir.file("outcomes.jsonl"));
    CHECK(outcomes.size() == 3);
}

TEST_CASE("judge label assignments are reproducible") {
    testing::TempDir dir;
    const std::string bench = kFixtures + "/qr_bench.jsonl";
    auto draw = [&](const std::string& seed) {
        return testing::run_cli({"--seed", seed, "judge", "--dry-run", "--runs", "a.jsonl", "b.jsonl", "c.jsonl",
                                 "--bench", bench},
                                dir.path());
    };
    auto a = draw("7");
    auto b = draw("7");
    auto c = draw("8");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(testing::count_lines(a.out) == 3 * 28);
    auto first = json::parse(a.out.substr(0, a.out.find('\n')));
    CHECK(first["labels"].size() == 3);
    CHECK(first["round"] == 0);
}

}  // TEST_SUITE
