#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lemir {

struct Token {
    std::string form;
    std::optional<std::string> lemma;

    friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
    std::string sentence_id;
    std::vector<Token> tokens;

    std::size_t size() const noexcept { return tokens.size(); }
    friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
};

/// Graded relevance judgments, grade in {0, 1, 2}.
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RunEntry {
    std::string doc_id;
    double score = 0.0;
};

/// Per query, an ordered result list (rank 1 first).
using RunList = std::map<std::string, std::vector<RunEntry>>;

// --- CoNLL-U -----------------------------------------------------------

/// Reads ID, FORM and LEMMA columns. Multiword ranges ("3-4") and empty
/// nodes ("3.1") are skipped; "_" as lemma means no lemma. Sentences
/// without a `# sent_id` comment get "s<N>" (1-based).
std::vector<Sentence> parse_conllu(std::istream& in);
std::vector<Sentence> parse_conllu_file(const std::string& path);
/// Calls `sink` once per sentence without materializing the treebank.
void for_each_conllu_sentence(std::istream& in, const std::function<void(Sentence&&)>& sink);

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);

// --- tokenizer -----------------------------------------------------------

struct TextToken {
    std::string form;
    std::size_t char_start = 0;  // Unicode scalar offsets, end exclusive
    std::size_t char_end = 0;

    friend bool operator==(const TextToken&, const TextToken&) = default;
};

/// Runs of letters/digits (with any combining marks attached to them) form
/// one token; every other non-whitespace character is a token of its own.
std::vector<TextToken> tokenize(std::string_view text);
std::vector<std::string> tokenize_forms(std::string_view text);

// --- JSONL documents, TREC qrels and runs --------------------------------

void for_each_jsonl_document(std::istream& in, const std::function<void(Document&&)>& sink);
/// Rejects duplicate doc_ids.
std::vector<Document> load_jsonl_corpus(std::istream& in);
std::vector<Document> load_jsonl_corpus_file(const std::string& path);

struct Query {
    std::string query_id;
    std::string text;
};

/// JSONL with `query_id` (or `_id`) and `text`, or TSV `qid<TAB>text`.
std::vector<Query> load_queries(std::istream& in);
std::vector<Query> load_queries_file(const std::string& path);

/// `qid 0 docid grade`, whitespace separated.
Qrels load_qrels(std::istream& in);
Qrels load_qrels_file(const std::string& path);

/// `qid Q0 docid rank score tag`. Ranks must be 1..n contiguous per query,
/// scores non-increasing, doc_ids unique per query.
RunList load_run(std::istream& in);
RunList load_run_file(const std::string& path);

/// Scores are written with 6 decimals.
void write_run(std::ostream& out, const RunList& run, std::string_view tag = "lemir");

}  // namespace lemir
