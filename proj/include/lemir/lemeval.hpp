#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lemir/candidates.hpp"
#include "lemir/disambig.hpp"

namespace lemir {

using LemmaPair = std::pair<std::string, std::string>;  // (form, lemma)

/// tokenize -> generate candidates -> disambiguate -> apply rules.
std::vector<LemmaPair> lemmatize_text(std::string_view text, const DictionaryGenerator& generator,
                                      const Disambiguator& disambiguator);

/// Lemmas for an already tokenized sentence.
std::vector<std::string> lemmatize_tokens(const std::vector<std::string>& forms, const DictionaryGenerator& generator,
                                          const Disambiguator& disambiguator);

/// Exact, case-sensitive match rate; throws AlignmentError on length mismatch.
double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);

struct SentenceStats {
    std::string sentence_id;
    std::size_t correct = 0;
    std::size_t total = 0;
};

/// Scores `result` against the gold lemmas of `gold`; tokens without a gold
/// lemma are not counted.
SentenceStats score_sentence(const DisambiguationResult& result, const Sentence& gold);

/// Disambiguates every lattice (in parallel) and scores it against the gold
/// lemmas carried by the lattice's sentence.
std::vector<SentenceStats> evaluate_disambiguator(const Disambiguator& disambiguator,
                                                  const std::vector<CandidateLattice>& lattices, unsigned jobs = 1);

struct BootstrapConfig {
    std::size_t replicates = 1000;
    double level = 0.95;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

struct AccuracyReport {
    std::string method;
    double accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_tokens = 0;
    std::size_t n_sentences = 0;
    std::size_t replicates = 0;
    double level = 0.95;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

/// Percentile bootstrap over sentences: each replicate resamples sentences
/// with replacement and recomputes total-correct / total-tokens; the interval
/// ends are nearest-rank percentiles. Input is sorted by sentence_id first and
/// replicate r draws from its own generator seeded from (seed, r), so the
/// result does not depend on input order or on `jobs`.
AccuracyReport bootstrap_ci(std::vector<SentenceStats> stats, const BootstrapConfig& config = {},
                            std::string method = {});

/// Nearest-rank percentile of sorted values, p in (0, 1].
double nearest_rank(const std::vector<double>& sorted, double p);

/// Aligned text table: `Method  Accuracy [low, high]  Tokens  Sentences`.
void write_accuracy_table(std::ostream& out, const std::vector<AccuracyReport>& reports);

}  // namespace lemir
