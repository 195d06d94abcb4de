#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lemir/candidates.hpp"
#include "lemir/score_types.hpp"

namespace lemir {

struct TokenDecision {
    std::string rule;
    std::string lemma;
    double score = 0.0;

    friend bool operator==(const TokenDecision&, const TokenDecision&) = default;
};

struct DisambiguationResult {
    std::vector<TokenDecision> tokens;
    double sequence_score = 0.0;

    friend bool operator==(const DisambiguationResult&, const DisambiguationResult&) = default;
};

/// Picks one candidate rule per token of a lattice.
class Disambiguator {
  public:
    virtual ~Disambiguator() = default;
    virtual std::string name() const = 0;
    virtual DisambiguationResult disambiguate(const CandidateLattice& lattice) const = 0;
};

// --- oracle ------------------------------------------------------------------

/// Chooses the candidate whose lemma equals the gold lemma (score 1), or
/// do-nothing (score 0) when none does.
DisambiguationResult oracle_disambiguate(const CandidateLattice& lattice, const Sentence& gold);

/// Uses the gold lemmas carried by the lattice's own sentence.
class OracleDisambiguator final : public Disambiguator {
  public:
    std::string name() const override { return "oracle"; }
    DisambiguationResult disambiguate(const CandidateLattice& lattice) const override
    {
        return oracle_disambiguate(lattice, lattice.sentence);
    }
};

// --- frequency baseline ------------------------------------------------------

using RuleCounts = std::map<std::string, std::size_t>;

/// Per-form, per-suffix and global rule counts. Decision: argmax over the
/// token's candidates at the most specific level where any candidate has a
/// non-zero count (form, then suffixes 5..1, then global); ties and the
/// all-zero case go to the smallest rule string.
class FrequencyModel final : public Disambiguator {
  public:
    static constexpr std::size_t kMaxSuffix = 5;

    void add(const std::string& form, const std::string& rule);

    std::string name() const override { return "frequency"; }
    DisambiguationResult disambiguate(const CandidateLattice& lattice) const override;
    TokenDecision choose(const std::string& form, const CandidateSet& set) const;

    const std::map<std::string, RuleCounts>& form_counts() const noexcept { return form_counts_; }
    const std::map<std::string, RuleCounts>& suffix_counts() const noexcept { return suffix_counts_; }
    const RuleCounts& global_counts() const noexcept { return global_counts_; }

    nlohmann::json to_json() const;
    static FrequencyModel from_json(const nlohmann::json& j);

  private:
    std::map<std::string, RuleCounts> form_counts_;
    std::map<std::string, RuleCounts> suffix_counts_;
    RuleCounts global_counts_;
};

FrequencyModel train_frequency(const std::vector<Sentence>& gold);
DisambiguationResult freq_disambiguate(const FrequencyModel& model, const CandidateLattice& lattice);

// --- bigram HMM --------------------------------------------------------------

/// First-order HMM over rule strings with add-alpha transitions and add-beta
/// emissions of case-folded forms:
///   P(r | r')  = (c(r', r) + alpha) / (c(r') + alpha * |R|)
///   P(f | r)   = (c(f, r) + beta)   / (c(r)  + beta * (V + 1))
/// |R| counts the rules seen in training (at least 1), V the distinct forms.
class HmmModel final : public Disambiguator {
  public:
    static constexpr std::string_view kBos = "<BOS>";
    static constexpr double kDefaultAlpha = 0.1;
    static constexpr double kDefaultBeta = 0.01;
    /// Log scores closer than this count as tied, so equal-probability paths
    /// summed in different orders still tie.
    static constexpr double kTieEpsilon = 1e-10;

    explicit HmmModel(double alpha = kDefaultAlpha, double beta = kDefaultBeta);

    /// Adds one gold rule sequence with its forms.
    void add_sequence(const std::vector<std::string>& forms, const std::vector<std::string>& rules);
    void add_transition(const std::string& prev, const std::string& rule, std::size_t count = 1);
    void add_emission(const std::string& form, const std::string& rule, std::size_t count = 1);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    std::size_t rule_vocabulary() const noexcept { return rules_.size(); }
    std::size_t form_vocabulary() const noexcept { return forms_.size(); }

    double log_transition(std::string_view prev, std::string_view rule) const;
    double log_emission(std::string_view form, std::string_view rule) const;

    std::string name() const override { return "hmm"; }
    /// Viterbi restricted to each token's candidate rules. Every token's
    /// score and `sequence_score` hold the best path's log-probability.
    /// Ties (within kTieEpsilon) go to the smaller rule string, both for the
    /// final state and at each backpointer.
    DisambiguationResult disambiguate(const CandidateLattice& lattice) const override;

    nlohmann::json to_json() const;
    static HmmModel from_json(const nlohmann::json& j);

  private:
    double alpha_;
    double beta_;
    std::map<std::string, RuleCounts, std::less<>> transitions_;
    std::map<std::string, std::size_t, std::less<>> transition_totals_;
    std::map<std::string, std::map<std::string, std::size_t, std::less<>>, std::less<>> emissions_;
    std::map<std::string, std::size_t, std::less<>> emission_totals_;
    std::map<std::string, std::size_t, std::less<>> rules_;
    std::map<std::string, std::size_t, std::less<>> forms_;
};

HmmModel train_hmm(const std::vector<Sentence>& gold, double alpha = HmmModel::kDefaultAlpha,
                   double beta = HmmModel::kDefaultBeta);
DisambiguationResult hmm_disambiguate(const HmmModel& model, const CandidateLattice& lattice);

// --- span-label matching -----------------------------------------------------

struct SpanMatcherConfig {
    double threshold = 0.5;
    std::size_t dimension = 256;
    std::size_t window = 2;
    double logistic_scale = 5.0;
    /// When false (default) scorer failures propagate; when true the
    /// sentence falls back to do-nothing with score 0.
    bool fallback_on_scorer_error = false;

    void validate() const;
};

struct LabelScore {
    std::string rule;
    double score = 0.0;
};

/// Argmax-with-threshold over one token's non-default candidates: the best
/// rule wins when its score is >= threshold (ties to the smaller rule
/// string), otherwise do-nothing wins with score 1 - max.
std::pair<std::string, double> decide_with_threshold(const std::vector<LabelScore>& scores, double threshold);

DisambiguationResult span_match_disambiguate(const CandidateLattice& lattice, SpanScorer& scorer,
                                             const SpanMatcherConfig& config);

class SpanMatcher final : public Disambiguator {
  public:
    SpanMatcher(std::shared_ptr<SpanScorer> scorer, SpanMatcherConfig config);

    std::string name() const override { return "span-match"; }
    DisambiguationResult disambiguate(const CandidateLattice& lattice) const override;

  private:
    std::shared_ptr<SpanScorer> scorer_;
    SpanMatcherConfig config_;
};

// --- deterministic reference scorer -----------------------------------------

std::uint64_t fnv1a64(std::string_view bytes);

using Embedding = std::vector<double>;

/// Signed feature hashing of character 1-4-grams of the span's tokens
/// (with boundary markers) and of neighbor tokens tagged by offset,
/// L2-normalized.
Embedding reference_embed_span(const std::vector<std::string>& tokens, TokenSpan span, std::size_t dimension,
                               std::size_t window);
std::vector<Embedding> reference_embed_spans(const std::vector<std::string>& tokens, std::size_t dimension,
                                             std::size_t window);
/// Character 1-4-grams of the label plus, for rule strings, the words of
/// its verbalization; L2-normalized.
Embedding reference_embed_label(std::string_view label, std::size_t dimension);
std::vector<Embedding> reference_embed_labels(const std::vector<std::string>& labels, std::size_t dimension);
double dot(const Embedding& a, const Embedding& b);
double logistic(double x);

/// Stand-in scorer: logistic(scale * dot(span, label)). Pure and thread-safe.
class ReferenceScorer final : public SpanScorer {
  public:
    explicit ReferenceScorer(SpanMatcherConfig config = {});
    ScoreResponse score(const ScoreRequest& request) override;

  private:
    SpanMatcherConfig config_;
};

}  // namespace lemir
