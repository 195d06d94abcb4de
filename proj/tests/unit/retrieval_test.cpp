#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lemir/disambig.hpp"
#include "lemir/errors.hpp"
#include "lemir/retrieval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lemir;

namespace {

RetrievalIndex index_of(const std::vector<std::vector<std::string>>& docs, Bm25Params params = {})
{
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ids.push_back("d" + std::to_string(i));
    }
    return RetrievalIndex::from_terms(ids, docs, params);
}

std::vector<std::string> random_terms(std::mt19937_64& rng, std::size_t vocab, std::size_t min_len, std::size_t max_len)
{
    std::vector<std::string> out(min_len + rng() % (max_len - min_len + 1));
    for (auto& t : out) {
        t = "t" + std::to_string(rng() % vocab);
    }
    return out;
}

NormalizationPipeline koer_lemmatizer()
{
    auto gen = std::make_shared<DictionaryGenerator>(
        build_dictionary_generator({test::make_sentence("a", {{"koera", "koer"}})}));
    auto freq = std::make_shared<FrequencyModel>(train_frequency({test::make_sentence("a", {{"koera", "koer"}})}));
    return NormalizationPipeline::lemmatizer(gen, freq, "lemmatizer:freq");
}

}  // namespace

TEST(Normalize, Identity)
{
    EXPECT_EQ(normalize(NormalizationPipeline::identity(), "Tere, maailm!"),
              (std::vector<std::string>{"tere", ",", "maailm", "!"}));
}

TEST(Normalize, StemmerLongestMatch)
{
    const auto p = NormalizationPipeline::stemmer({"d", "de", "dele"});
    EXPECT_EQ(p.stem("majadele"), "maja");
    EXPECT_EQ(p.suffixes().front(), "dele");
    EXPECT_EQ(NormalizationPipeline::default_stemmer().stem("majadele"), "maja");
}

TEST(Normalize, StemmerKeepsMinimumStem)
{
    const auto p = NormalizationPipeline::stemmer({"dele", "ele"});
    EXPECT_EQ(p.stem("kadele"), "kad");
    EXPECT_EQ(p.stem("adele"), "adele");
    EXPECT_EQ(normalize(p, "Majadele ja"), (std::vector<std::string>{"maja", "ja"}));
}

TEST(Normalize, Lemmatizer)
{
    const auto p = koer_lemmatizer();
    EXPECT_EQ(normalize(p, "koera"), (std::vector<std::string>{"koer"}));
    EXPECT_EQ(normalize(p, "Koera"), (std::vector<std::string>{"koer"}));
    EXPECT_EQ(p.label(), "lemmatizer:freq");
    EXPECT_EQ(p.kind(), PipelineKind::Lemmatizer);
}

TEST(Normalize, PipelineNames)
{
    EXPECT_EQ(parse_pipeline_kind("stemmer"), PipelineKind::Stemmer);
    EXPECT_STREQ(to_string(PipelineKind::Identity), "identity");
    EXPECT_THROW(parse_pipeline_kind("porter"), InvalidInput);
}

TEST(Build, SingleDocPostings)
{
    const auto idx = build_index({{"d0", "", "a b a"}}, NormalizationPipeline::identity());
    EXPECT_EQ(idx.postings().at("a"), (std::vector<Posting>{{0, 2}}));
    EXPECT_EQ(idx.postings().at("b"), (std::vector<Posting>{{0, 1}}));
    EXPECT_DOUBLE_EQ(idx.avgdl(), 3.0);
    EXPECT_EQ(idx.doc_count(), 1u);
}

TEST(Build, TitleIsIndexed)
{
    const auto idx = build_index({{"d0", "Tartu", "linn"}}, NormalizationPipeline::identity());
    EXPECT_EQ(idx.document_frequency("tartu"), 1u);
    EXPECT_EQ(idx.doc_lengths()[0], 2u);
}

TEST(Build, Errors)
{
    EXPECT_THROW(build_index({}, NormalizationPipeline::identity()), InvalidInput);
    EXPECT_THROW(index_of({}), InvalidInput);
    EXPECT_THROW(RetrievalIndex::from_terms({"x", "x"}, {{"a"}, {"b"}}), InvalidInput);
    EXPECT_THROW(index_of({{"a"}}, {-1.0, 0.75}), InvalidInput);
    EXPECT_THROW(index_of({{"a"}}, {1.5, 1.5}), InvalidInput);
}

TEST(Build, DisjointVocabulary)
{
    const auto idx = index_of({{"a", "b"}, {"c"}});
    for (const auto& [term, postings] : idx.postings()) {
        EXPECT_EQ(postings.size(), 1u) << term;
    }
}

TEST(Build, ParallelMatchesSerial)
{
    std::mt19937_64 rng(2);
    std::vector<Document> docs;
    for (int i = 0; i < 300; ++i) {
        docs.push_back({"d" + std::to_string(i), test::random_ascii(rng, 0, 5, 4), test::random_ascii(rng, 1, 40, 5) + " x"});
    }
    const auto p = NormalizationPipeline::default_stemmer();
    EXPECT_EQ(build_index(docs, p, {}, 1), build_index(docs, p, {}, 5));
}

TEST(Bm25, HandExample)
{
    const auto idx = index_of({{"koer"}});
    EXPECT_NEAR(bm25_score(idx, {"koer"}, 0), std::log(4.0 / 3.0), 1e-9);
    EXPECT_NEAR(idx.idf("koer"), std::log(4.0 / 3.0), 1e-12);
}

TEST(Bm25, AbsentTermContributesNothing)
{
    const auto idx = index_of({{"koer", "kass"}, {"kass"}});
    EXPECT_DOUBLE_EQ(bm25_score(idx, {"koer", "hobune"}, 0), bm25_score(idx, {"koer"}, 0));
    EXPECT_DOUBLE_EQ(bm25_score(idx, {"hobune"}, 1), 0.0);
}

TEST(Bm25, TfFactorIsOneAtAverageLength)
{
    // tf = 1 and dl = avgdl: the score is idf for any k1.
    for (double k1 : {0.5, 1.5, 3.0}) {
        const auto idx = index_of({{"a", "b"}, {"c", "d"}}, {k1, 0.75});
        EXPECT_NEAR(bm25_score(idx, {"a"}, 0), idx.idf("a"), 1e-12) << k1;
    }
}

TEST(Bm25, QueryTermFrequencyWeights)
{
    const auto idx = index_of({{"a", "b"}, {"c"}});
    EXPECT_NEAR(bm25_score(idx, {"a", "a"}, 0), 2 * bm25_score(idx, {"a"}, 0), 1e-12);
}

TEST(Search, ExcludesZeroScores)
{
    const auto idx = index_of({{"a"}, {"a", "b"}, {"c"}});
    const auto hits = search(idx, {"a"});
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].doc_id, "d0");
    EXPECT_TRUE(search(idx, {"zzz"}).empty());
}

TEST(Search, TiesByDocId)
{
    const auto idx = RetrievalIndex::from_terms({"z", "m", "a"}, {{"x"}, {"x"}, {"x"}});
    const auto hits = search(idx, {"x"});
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].doc_id, "a");
    EXPECT_EQ(hits[1].doc_id, "m");
    EXPECT_EQ(hits[2].doc_id, "z");
}

TEST(RetrievalProperty, MatchesBruteForce)
{
    std::mt19937_64 rng(500);
    for (int trial = 0; trial < 200; ++trial) {
        test::BruteForceBm25 brute;
        brute.k1 = 0.5 + (rng() % 30) / 10.0;
        brute.b = (rng() % 11) / 10.0;
        const std::size_t n = 1 + rng() % 50;
        for (std::size_t i = 0; i < n; ++i) {
            brute.doc_ids.push_back("doc" + std::to_string(rng() % 1000) + "_" + std::to_string(i));
            brute.docs.push_back(random_terms(rng, 15, 0, 12));
        }
        const auto idx = RetrievalIndex::from_terms(brute.doc_ids, brute.docs, {brute.k1, brute.b});
        for (int q = 0; q < 5; ++q) {
            const auto query = random_terms(rng, 20, 1, 4);
            const auto expected = brute.rank(query);
            const auto got = search(idx, query, 1000);
            ASSERT_EQ(got.size(), expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                ASSERT_EQ(got[i].doc_id, expected[i].first);
                ASSERT_NEAR(got[i].score, expected[i].second, 1e-9);
            }
        }
    }
}

TEST(RetrievalProperty, TopKIsPrefix)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<std::string>> docs;
        for (int i = 0; i < 40; ++i) {
            docs.push_back(random_terms(rng, 6, 1, 8));
        }
        const auto idx = index_of(docs);
        const auto query = random_terms(rng, 6, 1, 3);
        const auto all = search(idx, query, 100);
        for (std::size_t k = 1; k <= 45; k += 4) {
            const auto top = search(idx, query, k);
            ASSERT_EQ(top.size(), std::min(k, all.size()));
            ASSERT_TRUE(std::equal(top.begin(), top.end(), all.begin()));
        }
    }
}

TEST(RetrievalProperty, MergeEqualsSinglePass)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> ids;
        std::vector<std::vector<std::string>> docs;
        const std::size_t n = 2 + rng() % 30;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back("d" + std::to_string(i));
            docs.push_back(random_terms(rng, 10, 0, 6));
        }
        std::vector<RetrievalIndex> shards;
        std::size_t start = 0;
        while (start < n) {
            const std::size_t len = 1 + rng() % (n - start);
            shards.push_back(RetrievalIndex::from_terms(
                std::vector<std::string>(ids.begin() + start, ids.begin() + start + len),
                std::vector<std::vector<std::string>>(docs.begin() + start, docs.begin() + start + len)));
            start += len;
        }
        ASSERT_EQ(RetrievalIndex::merge(shards), RetrievalIndex::from_terms(ids, docs));
    }
}

TEST(Persist, RoundTrip)
{
    std::mt19937_64 rng(21);
    std::vector<std::vector<std::string>> docs;
    for (int i = 0; i < 30; ++i) {
        std::vector<std::string> d;
        for (int t = 0; t < 6; ++t) {
            d.push_back(test::random_word(rng, 1, 5));
        }
        docs.push_back(d);
    }
    auto idx = index_of(docs, {1.2, 0.5});
    std::stringstream buf;
    idx.save(buf);
    const auto back = RetrievalIndex::load(buf);
    EXPECT_EQ(back, idx);
    EXPECT_EQ(back.pipeline_label(), "identity");
}

TEST(Persist, RejectsCorruptInput)
{
    std::stringstream bad("not an index");
    EXPECT_THROW(RetrievalIndex::load(bad), ParseError);
    std::stringstream buf;
    index_of({{"a", "b"}}).save(buf);
    const auto bytes = buf.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(RetrievalIndex::load(truncated), ParseError);
}

TEST(SearchAll, RunsEveryQuery)
{
    const auto p = NormalizationPipeline::identity();
    const auto idx = build_index({{"d1", "", "koer ja kass"}, {"d2", "", "kass"}}, p);
    const auto run = search_all(idx, {{"q1", "Kass"}, {"q2", "hobune"}}, p, 10, 2);
    ASSERT_EQ(run.at("q1").size(), 2u);
    EXPECT_TRUE(run.at("q2").empty());
}
