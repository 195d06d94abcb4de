#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"

using lemir::test::run_command;
using lemir::test::slurp;

namespace {

const std::string kCli = LEMIR_CLI;
const std::string kData = LEMIR_TEST_DATA;

std::string data(const std::string& name)
{
    return kData + "/" + name;
}

struct Cli : ::testing::Test {
    static void SetUpTestSuite()
    {
        dir = lemir::test::make_temp_dir("cli");
        model = dir + "/model.json";
        ASSERT_EQ(run_command(kCli + " train all " + data("train.conllu") + " -o " + model), 0);
    }
    static inline std::string dir;
    static inline std::string model;

    static int run(const std::string& args, std::string* out = nullptr)
    {
        return run_command(kCli + " " + args + " 2>/dev/null", out);
    }
};

std::map<std::string, int> lines_per_query(const std::string& run)
{
    std::map<std::string, int> out;
    std::istringstream in(run);
    std::string qid, rest;
    while (in >> qid && std::getline(in, rest)) {
        ++out[qid];
    }
    return out;
}

}  // namespace

TEST_F(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("no-such-command"), 1);
    EXPECT_EQ(run("train"), 1);
    EXPECT_EQ(run("train bogus " + data("train.conllu")), 1);
    EXPECT_EQ(run("search --index x"), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, DataErrorsExitTwo)
{
    EXPECT_EQ(run("rules stats " + dir + "/missing.conllu"), 2);
    std::ofstream(dir + "/bad.conllu") << "1\tonly-two\n";
    EXPECT_EQ(run("rules stats " + dir + "/bad.conllu"), 2);
    EXPECT_EQ(run("lemmatize --model " + dir + "/missing.json -i " + data("test.conllu")), 2);
}

TEST_F(Cli, RulesStats)
{
    std::string out;
    ASSERT_EQ(run("rules stats " + data("train.conllu") + " --limit 2", &out), 0);
    std::istringstream in(out);
    std::string first;
    std::getline(in, first);
    // 5 and 5: the tie goes to the smaller rule string.
    EXPECT_EQ(first.substr(0, first.find('\t')), "U|P|S");
    ASSERT_EQ(run("rules roundtrip " + data("train.conllu"), &out), 0);
    EXPECT_NE(out.find("failures\t0"), std::string::npos);
}

TEST_F(Cli, LemmatizeText)
{
    std::string out;
    ASSERT_EQ(run_command("echo 'Koera nägin.' | " + kCli + " lemmatize --model " + model + " --method hmm", &out), 0);
    EXPECT_EQ(out, "Koera\tkoer\nnägin\tnägema\n.\t.\n\n");
}

TEST_F(Cli, LemmatizeConllu)
{
    std::string out;
    ASSERT_EQ(run("lemmatize --model " + model + " --input-format conllu -i " + data("test.conllu"), &out), 0);
    EXPECT_NE(out.find("1\tKoera\tkoer"), std::string::npos);
    EXPECT_NE(out.find("# sent_id = d2"), std::string::npos);
}

TEST_F(Cli, EvalLemmaJson)
{
    std::string out;
    ASSERT_EQ(run("eval-lemma --test " + data("test.conllu") + " --model " + model + " -B 100 --format json", &out), 0);
    const auto j = nlohmann::json::parse(out);
    ASSERT_EQ(j.at("reports").size(), 3u);
    const double oracle = j["reports"][0]["accuracy"];
    for (const auto& r : j["reports"]) {
        EXPECT_LE(r["accuracy"].get<double>(), oracle);
        EXPECT_LE(r["ci_low"].get<double>(), r["ci_high"].get<double>());
    }
}

TEST_F(Cli, EvalLemmaDeterministicAcrossJobs)
{
    std::string a, b;
    const auto base = "eval-lemma --test " + data("test.conllu") + " --model " + model + " -B 300 --seed 7 --format json";
    ASSERT_EQ(run(base + " -j 1", &a), 0);
    ASSERT_EQ(run(base + " -j 4", &b), 0);
    EXPECT_EQ(a, b);
}

TEST_F(Cli, IndexSearchEval)
{
    const auto idx = dir + "/lem.idx";
    const auto pipe = " --pipeline lemmatizer --model " + model;
    ASSERT_EQ(run("index build --corpus " + data("corpus.jsonl") + " -o " + idx + pipe), 0);

    std::string run_text;
    ASSERT_EQ(run("search --index " + idx + " --queries " + data("queries.tsv") + " -k 1" + pipe, &run_text), 0);
    for (const auto& [qid, n] : lines_per_query(run_text)) {
        EXPECT_LE(n, 1) << qid;
    }
    ASSERT_EQ(run("search --index " + idx + " --queries " + data("queries.tsv") + " -o " + dir + "/run.txt" + pipe), 0);

    std::string m1, m2;
    const auto eval = "eval-ir --run " + dir + "/run.txt --qrels " + data("qrels.txt") + " --format json";
    ASSERT_EQ(run(eval, &m1), 0);
    ASSERT_EQ(run(eval, &m2), 0);
    EXPECT_EQ(m1, m2);
    const auto j = nlohmann::json::parse(m1);
    EXPECT_FALSE(j.dump().empty());

    // Queries must go through the same pipeline as the index.
    EXPECT_EQ(run("search --index " + idx + " --queries " + data("queries.tsv")), 2);
}

TEST_F(Cli, EnvironmentFallback)
{
    const auto idx = dir + "/id.idx";
    ASSERT_EQ(run("index build --corpus " + data("corpus.jsonl") + " -o " + idx), 0);
    std::string out;
    ASSERT_EQ(run_command("LEMIR_TOP_K=1 " + kCli + " search --index " + idx + " --queries " + data("queries.tsv"), &out), 0);
    for (const auto& [qid, n] : lines_per_query(out)) {
        EXPECT_EQ(n, 1) << qid;
    }
    // An explicit flag beats the environment.
    std::ofstream(dir + "/broad.tsv") << "q1\tja ta on\n";
    ASSERT_EQ(run_command("LEMIR_TOP_K=1 " + kCli + " search --index " + idx + " --queries " + dir + "/broad.tsv" +
                              " --top-k 3",
                          &out),
              0);
    EXPECT_GT(lines_per_query(out).at("q1"), 1);
}

TEST_F(Cli, ScorerCheck)
{
    std::string out;
    ASSERT_EQ(run("scorer check '" + kCli + " scorer serve-reference' --fuzz 200", &out), 0);
    EXPECT_EQ(out.find("FAIL"), std::string::npos) << out;
    EXPECT_EQ(run("scorer check '" + std::string(LEMIR_FAKE_SCORER) + " out-of-range' --fuzz 5", &out), 3);
    EXPECT_NE(out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, SpanMethodScorerFailureExitsThree)
{
    EXPECT_EQ(run("eval-lemma --test " + data("test.conllu") + " --model " + model +
                  " --methods span -B 10 --scorer '" + std::string(LEMIR_FAKE_SCORER) + " exit-after 0'"),
              3);
    EXPECT_EQ(run("eval-lemma --test " + data("test.conllu") + " --model " + model +
                  " --methods span -B 10 --fallback-on-scorer-error --scorer '" + std::string(LEMIR_FAKE_SCORER) +
                  " exit-after 0'"),
              0);
}
