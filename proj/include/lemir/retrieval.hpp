#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lemir/candidates.hpp"
#include "lemir/corpus_io.hpp"
#include "lemir/disambig.hpp"

namespace lemir {

enum class PipelineKind { Identity, Stemmer, Lemmatizer };

const char* to_string(PipelineKind kind) noexcept;
PipelineKind parse_pipeline_kind(std::string_view name);

/// Text -> index terms. Identity tokenizes and lowercases; the stemmer then
/// strips the longest matching suffix once (leaving at least
/// `kMinStemLength` characters); the lemmatizer lowercases lemmatize_text
/// output. Normalization of one text never depends on another.
class NormalizationPipeline {
  public:
    static constexpr std::size_t kMinStemLength = 3;

    static NormalizationPipeline identity();
    static NormalizationPipeline stemmer(std::vector<std::string> suffixes);
    /// A small default suffix list of common Estonian case and plural endings.
    static NormalizationPipeline default_stemmer();
    static NormalizationPipeline lemmatizer(std::shared_ptr<const DictionaryGenerator> generator,
                                            std::shared_ptr<const Disambiguator> disambiguator,
                                            std::string label = "lemmatizer");

    PipelineKind kind() const noexcept { return kind_; }
    /// Identifies the pipeline in persisted indexes, e.g. "lemmatizer:hmm".
    const std::string& label() const noexcept { return label_; }
    const std::vector<std::string>& suffixes() const noexcept { return suffixes_; }

    std::vector<std::string> normalize(std::string_view text) const;
    std::string stem(std::string_view token) const;

  private:
    PipelineKind kind_ = PipelineKind::Identity;
    std::string label_ = "identity";
    std::vector<std::u32string> suffixes_u32_;  // longest first
    std::vector<std::string> suffixes_;
    std::shared_ptr<const DictionaryGenerator> generator_;
    std::shared_ptr<const Disambiguator> disambiguator_;
};

std::vector<std::string> normalize(const NormalizationPipeline& pipeline, std::string_view text);

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;

    void validate() const;
    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    std::uint32_t doc = 0;  // internal id
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct SearchHit {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Immutable inverted index with BM25 statistics.
class RetrievalIndex {
  public:
    using PostingMap = std::unordered_map<std::string, std::vector<Posting>>;

    /// Builds from already normalized documents (internal ids follow input
    /// order). Throws InvalidInput for an empty corpus or duplicate doc ids.
    static RetrievalIndex from_terms(std::vector<std::string> doc_ids, const std::vector<std::vector<std::string>>& terms,
                                     Bm25Params params = {}, std::string pipeline_label = "identity");

    /// Concatenates shards in order; internal ids of later shards are
    /// shifted. Equivalent to building from the concatenated documents.
    static RetrievalIndex merge(const std::vector<RetrievalIndex>& shards);

    const PostingMap& postings() const noexcept { return postings_; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::string& pipeline_label() const noexcept { return pipeline_label_; }

    std::size_t document_frequency(const std::string& term) const;
    std::uint32_t term_frequency(const std::string& term, std::uint32_t doc) const;
    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    double idf(const std::string& term) const;

    /// Versioned little-endian binary format, see docs/formats.md.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static RetrievalIndex load(std::istream& in);
    static RetrievalIndex load_file(const std::string& path);

    friend bool operator==(const RetrievalIndex&, const RetrievalIndex&) = default;

  private:
    PostingMap postings_;
    std::vector<std::uint32_t> doc_lengths_;
    std::vector<std::string> doc_ids_;
    double avgdl_ = 0.0;
    Bm25Params params_;
    std::string pipeline_label_;

    void finish();
};

/// Indexes normalize(title + " " + text). Normalization runs on `jobs` threads;
/// the result does not depend on `jobs`.
RetrievalIndex build_index(const std::vector<Document>& documents, const NormalizationPipeline& pipeline,
                           Bm25Params params = {}, unsigned jobs = 1);

/// Sum over unique query terms t of qtf(t) * idf(t) * tf (k1 + 1) / (tf + k1 (1 - b + b dl / avgdl)).
double bm25_score(const RetrievalIndex& index, const std::vector<std::string>& query_terms, std::uint32_t doc);

/// Top-k documents with score > 0, by score descending then doc_id ascending.
std::vector<SearchHit> search(const RetrievalIndex& index, const std::vector<std::string>& query_terms,
                              std::size_t k = 100);

/// Runs every query through `pipeline` and `search`.
RunList search_all(const RetrievalIndex& index, const std::vector<Query>& queries,
                   const NormalizationPipeline& pipeline, std::size_t k = 100, unsigned jobs = 1);

}  // namespace lemir
