#include "tagseek/config.hpp"
#include "tagseek/error.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace tagseek {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.path().string() + "' && '" + TAGSEEK_CLI_PATH + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const std::string kEnvFlags = "--corpus env/corpus.jsonl --embeddings env/embeddings.txt --scorer env/scorer.json";

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        auto r = run_cli(dir, "synth --out env --n-items 300 --n-tags 60 --dim 8 --seed 4");
        ASSERT_EQ(r.status, 0) << r.err;
    }
    TempDir dir;
};

TEST_F(Cli, UnknownPolicyListsValidNames) {
    auto r = run_cli(dir, "run " + kEnvFlags + " --policy thompson");
    EXPECT_NE(r.status, 0);
    for (const char* name : {"random", "egreedy", "ucb", "ada-egreedy", "ada-ucb", "tiara", "tiara-s"})
        EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
}

TEST_F(Cli, MinimalRunWritesOneLineLog) {
    auto r = run_cli(dir, "run " + kEnvFlags + " --budget 1 --seeds 1 --out o");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(count_lines(read_file(dir / "o" / "trial_0.jsonl")), 1u);
    EXPECT_EQ(count_lines(read_file(dir / "o" / "summary.csv")), 2u);
    EXPECT_EQ(count_lines(read_file(dir / "o" / "curve.csv")), 2u);
    auto echoed = parse_experiment_config(read_file(dir / "o" / "config.json"), dir.path());
    EXPECT_EQ(echoed.run.budget, 1u);
    EXPECT_EQ(echoed.run.n_seeds, 1u);
}

TEST_F(Cli, TenSeedSummary) {
    auto r = run_cli(dir, "run " + kEnvFlags + " --policy tiara --budget 40 --seeds 10 --jobs 3 --out o");
    ASSERT_EQ(r.status, 0) << r.err;
    std::stringstream summary(read_file(dir / "o" / "summary.csv"));
    std::string header, row;
    std::getline(summary, header);
    std::getline(summary, row);
    EXPECT_EQ(header, "policy,trials,failed,mean,sd");
    EXPECT_EQ(row.substr(0, 11), "tiara,10,0,");
    for (int s = 0; s < 10; ++s) EXPECT_TRUE(std::filesystem::exists(dir / "o" / ("trial_" + std::to_string(s) + ".jsonl")));
}

TEST_F(Cli, FlagsOverrideConfigAndEchoReproduces) {
    write_file(dir / "exp.json", R"({"corpus":"env/corpus.jsonl","embeddings":"env/embeddings.txt",
        "scorer":"env/scorer.json","budget":5,"seeds":2,"policy":{"name":"ucb","alpha":0.5}})");
    auto r = run_cli(dir, "run --config exp.json --budget 3 --out a");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(count_lines(read_file(dir / "a" / "trial_1.jsonl")), 3u);
    auto echoed = parse_experiment_config(read_file(dir / "a" / "config.json"), dir.path());
    EXPECT_EQ(echoed.run.budget, 3u);
    EXPECT_EQ(echoed.run.policy.kind, PolicyKind::ucb);
    EXPECT_EQ(echoed.run.policy.alpha, 0.5);

    r = run_cli(dir, "run --config a/config.json --out b");
    ASSERT_EQ(r.status, 0) << r.err;
    for (const char* f : {"config.json", "trial_0.jsonl", "trial_1.jsonl", "curve.csv", "summary.csv", "tag_scores.csv"})
        EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
}

TEST_F(Cli, SynthIsDeterministic) {
    auto r = run_cli(dir, "synth --out again --n-items 300 --n-tags 60 --dim 8 --seed 4");
    ASSERT_EQ(r.status, 0) << r.err;
    for (const char* f : {"corpus.jsonl", "embeddings.txt", "scorer.json", "config.json"})
        EXPECT_EQ(read_file(dir / "env" / f), read_file(dir / "again" / f)) << f;
    r = run_cli(dir, "synth --out other --n-items 300 --n-tags 60 --dim 8 --seed 5");
    EXPECT_NE(read_file(dir / "env" / "corpus.jsonl"), read_file(dir / "other" / "corpus.jsonl"));
}

TEST_F(Cli, SynthItemCountAndValidation) {
    auto r = run_cli(dir, "synth --out big --n-items 1000");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto corpus = read_file(dir / "big" / "corpus.jsonl");
    EXPECT_EQ(count_lines(corpus), 1000u);

    r = run_cli(dir, "validate --corpus big/corpus.jsonl --embeddings big/embeddings.txt");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("violations: 0\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("items: 1000\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("coverage: 1 (200/200)\n"), std::string::npos) << r.out;

    // Direct scan of the file for the longest tag list.
    std::size_t t_max = 0;
    std::stringstream lines(corpus);
    for (std::string line; std::getline(lines, line);)
        t_max = std::max(t_max, nlohmann::json::parse(line)["tags"].size());
    EXPECT_NE(r.out.find("T_max: " + std::to_string(t_max) + "\n"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateReportsTmax) {
    std::string tags;
    for (int i = 0; i < 34; ++i) tags += std::string(i ? "," : "") + "\"tag" + std::string(1, static_cast<char>('a' + i % 26)) + std::string(1, static_cast<char>('a' + i / 26)) + "\"";
    write_file(dir / "c.jsonl", R"({"id":"a","tags":["x"],"score":1})"
                                "\n"
                                R"({"id":"b","tags":[)" + tags + R"(],"score":2})" "\n");
    auto r = run_cli(dir, "validate --corpus c.jsonl");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("T_max: 34\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("tags: 35\n"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateReportsCorruptLine) {
    write_file(dir / "c.jsonl", R"({"id":"a","tags":["x"],"score":1})"
                                "\n"
                                R"({"id":"b","tags":["y"],"score":2})"
                                "\n"
                                "{\"id\": \"c\", \"tags\": [\n");
    auto r = run_cli(dir, "validate --corpus c.jsonl");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("line 3: invalid JSON"), std::string::npos) << r.err;
    EXPECT_NE(r.out.find("violations: 1\n"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateCoverageCountsPartialTags) {
    write_file(dir / "c.jsonl", R"({"id":"a","tags":["black swan","zzqx","Swan"],"score":1})" "\n");
    write_file(dir / "e.txt", "swan 1 0\ncat 0 1\n");
    auto r = run_cli(dir, "validate --corpus c.jsonl --embeddings e.txt");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("coverage: 0.6666666666666666 (2/3)\n"), std::string::npos) << r.out;
}

TEST_F(Cli, DistinctErrorsForBadInputs) {
    auto missing = run_cli(dir, "run --corpus nope.jsonl --embeddings env/embeddings.txt --scorer env/scorer.json");
    EXPECT_NE(missing.status, 0);
    EXPECT_NE(missing.err.find("nope.jsonl"), std::string::npos) << missing.err;

    write_file(dir / "w.json", R"({"kind":"linear","weights":[1,2,3]})");
    auto mismatch = run_cli(dir, "run --corpus env/corpus.jsonl --embeddings env/embeddings.txt --scorer w.json");
    EXPECT_NE(mismatch.status, 0);
    EXPECT_NE(mismatch.err.find("dimension mismatch"), std::string::npos) << mismatch.err;

    auto bad_budget = run_cli(dir, "run " + kEnvFlags + " --budget 0");
    EXPECT_NE(bad_budget.status, 0);
    EXPECT_NE(bad_budget.err.find("budget"), std::string::npos) << bad_budget.err;

    EXPECT_NE(missing.err, mismatch.err);
}

TEST_F(Cli, ExportScoresTopK) {
    auto r = run_cli(dir, "export-scores " + kEnvFlags + " --budget 30 --top-k 5 --out x");
    ASSERT_EQ(r.status, 0) << r.err;
    std::stringstream csv(read_file(dir / "x" / "tag_scores.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "tag,score");
    std::vector<double> scores;
    while (std::getline(csv, line)) scores.push_back(std::stod(line.substr(line.find(',') + 1)));
    ASSERT_EQ(scores.size(), 5u);
    EXPECT_TRUE(std::is_sorted(scores.rbegin(), scores.rend()));
}

TEST_F(Cli, SweepWritesGrid) {
    auto r = run_cli(dir, "sweep " + kEnvFlags + " --budget 20 --seeds 2 --grid alpha=0.001,0.1,1 --out s");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto csv = read_file(dir / "s" / "sweep.csv");
    EXPECT_EQ(count_lines(csv), 4u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,trials,failed,mean,sd,error");

    auto bad = run_cli(dir, "sweep " + kEnvFlags + " --grid alpha=0.1,x");
    EXPECT_NE(bad.status, 0);
    auto none = run_cli(dir, "sweep " + kEnvFlags);
    EXPECT_NE(none.status, 0);
    auto invalid = run_cli(dir, "sweep " + kEnvFlags + " --budget 5 --grid lambda=-1,1 --out s2");
    EXPECT_NE(invalid.status, 0);
    EXPECT_EQ(count_lines(read_file(dir / "s2" / "sweep.csv")), 3u);
}

TEST(ExperimentConfig, ParsesAndResolvesPaths) {
    auto c = parse_experiment_config(
        R"({"corpus":"data/c.jsonl","embeddings":"/abs/e.txt","budget":7,"seed":3,"seeds":4,
            "policy":"ada-ucb","sweep":{"alpha":[0.1,1]}})",
        "/base");
    c.out = "/results";
    EXPECT_EQ(c.corpus, std::filesystem::path("/base/data/c.jsonl"));
    EXPECT_EQ(c.embeddings, std::filesystem::path("/abs/e.txt"));
    EXPECT_EQ(c.run.budget, 7u);
    EXPECT_EQ(c.run.seed, 3u);
    EXPECT_EQ(c.run.n_seeds, 4u);
    EXPECT_EQ(c.run.policy.kind, PolicyKind::ada_ucb);
    ASSERT_EQ(c.run.sweep.size(), 1u);
    EXPECT_EQ(c.run.sweep[0].second, (std::vector<double>{0.1, 1}));

    auto back = parse_experiment_config(c.to_json(), "/elsewhere");
    EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(ExperimentConfig, Errors) {
    EXPECT_THROW(parse_experiment_config("{", "/"), LoadError);
    EXPECT_THROW(parse_experiment_config("[]", "/"), LoadError);
    EXPECT_THROW(parse_experiment_config(R"({"budgett":3})", "/"), LoadError);
    EXPECT_THROW(parse_experiment_config(R"({"budget":-3})", "/"), LoadError);
    EXPECT_THROW(parse_experiment_config(R"({"policy":"nope"})", "/"), PolicyError);
    EXPECT_THROW(parse_experiment_config(R"({"policy":{"name":"tiara","beta":1}})", "/"), LoadError);
    EXPECT_THROW(parse_experiment_config(R"({"sweep":{"alpha":"x"}})", "/"), LoadError);
}

} // namespace
} // namespace tagseek
