#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemir/corpus_io.hpp"

namespace lemir {

struct Candidate {
    std::string lemma;
    std::string rule;  // canonical rule string

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Lemma candidates of one token, unique by rule and sorted by rule string.
/// The do-nothing rule is always present.
struct CandidateSet {
    std::size_t token_index = 0;
    std::vector<Candidate> candidates;

    const Candidate* find_rule(std::string_view rule) const;
    bool has_lemma(std::string_view lemma) const;
};

struct CandidateLattice {
    Sentence sentence;
    std::vector<CandidateSet> sets;  // one per token

    std::size_t size() const noexcept { return sets.size(); }
};

/// Builds a candidate set for `form` from a list of lemmas. Lemmas that are
/// empty or invalid are skipped; do-nothing is added; duplicates by rule collapse
/// (first lemma wins).
CandidateSet make_candidate_set(std::size_t token_index, const std::string& form,
                                const std::vector<std::string>& lemmas);

/// Corpus-derived stand-in for a morphological analyzer: every lemma seen for
/// a (case-folded) form, plus suffix-keyed rule statistics for unknown forms.
class DictionaryGenerator {
  public:
    static constexpr std::size_t kMaxSuffix = 5;

    DictionaryGenerator() = default;

    void add(const std::string& form, const std::string& lemma);

    const std::map<std::string, std::set<std::string>>& form_map() const noexcept { return form_map_; }
    const std::map<std::string, std::map<std::string, std::size_t>>& suffix_map() const noexcept
    {
        return suffix_map_;
    }

    std::vector<std::string> lemmas_for(const std::string& form) const;
    CandidateSet candidates_for(std::size_t token_index, const std::string& form) const;

    nlohmann::json to_json() const;
    static DictionaryGenerator from_json(const nlohmann::json& j);

  private:
    std::map<std::string, std::set<std::string>> form_map_;
    std::map<std::string, std::map<std::string, std::size_t>> suffix_map_;
};

DictionaryGenerator build_dictionary_generator(const std::vector<Sentence>& train);

CandidateLattice generate_candidates(const DictionaryGenerator& gen, const Sentence& sentence);
std::vector<CandidateLattice> generate_candidates(const DictionaryGenerator& gen,
                                                  const std::vector<Sentence>& sentences, unsigned jobs = 1);

/// Reads `{"sentence_id":..., "tokens":[{"form":..., "lemmas":[...]}, ...]}`
/// lines. When `gold` is given, lattices are aligned to it positionally and
/// take their gold lemmas from it; any count mismatch is an AlignmentError.
std::vector<CandidateLattice> import_candidates(std::istream& in, const std::vector<Sentence>* gold = nullptr);
std::vector<CandidateLattice> import_candidates_file(const std::string& path,
                                                     const std::vector<Sentence>* gold = nullptr);

/// Fraction of gold tokens whose lemma is among the candidate lemmas.
double oracle_accuracy(const std::vector<CandidateLattice>& lattices, const std::vector<Sentence>& gold);

}  // namespace lemir
