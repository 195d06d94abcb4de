#include "lemir/corpus_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lemir/errors.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

namespace {

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    return in;
}

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) {
            return fields;
        }
        start = tab + 1;
    }
}

std::vector<std::string> split_ws(const std::string& line)
{
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string field;
    while (ss >> field) {
        fields.push_back(field);
    }
    return fields;
}

bool is_blank(std::string_view line)
{
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& s, std::size_t line_no, const char* what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + what + " '" + s + "'", line_no);
    }
}

long parse_long(const std::string& s, std::size_t line_no, const char* what)
{
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + what + " '" + s + "'", line_no);
    }
}

std::string json_string(const nlohmann::json& obj, const char* key, std::size_t line_no, bool required = true)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) {
            throw ParseError(std::string("missing field '") + key + "'", line_no);
        }
        return {};
    }
    if (!it->is_string()) {
        throw ParseError(std::string("field '") + key + "' must be a string", line_no);
    }
    return it->get<std::string>();
}

}  // namespace

// --- CoNLL-U -----------------------------------------------------------

void for_each_conllu_sentence(std::istream& in, const std::function<void(Sentence&&)>& sink)
{
    std::string line;
    std::size_t line_no = 0;
    std::size_t sentence_count = 0;
    Sentence current;
    bool open = false;

    auto flush = [&] {
        if (!open) {
            return;
        }
        ++sentence_count;
        if (current.sentence_id.empty()) {
            current.sentence_id = "s" + std::to_string(sentence_count);
        }
        sink(std::move(current));
        current = Sentence{};
        open = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) {
            flush();
            continue;
        }
        open = true;
        if (line[0] == '#') {
            const std::string_view body = std::string_view(line).substr(1);
            const auto eq = body.find('=');
            if (eq != std::string_view::npos && trim(body.substr(0, eq)) == "sent_id") {
                current.sentence_id = trim(body.substr(eq + 1));
            }
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() < 3) {
            throw ParseError("expected at least 3 tab-separated fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        const std::string_view id = fields[0];
        if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
            continue;
        }
        if (fields[1].empty()) {
            throw ParseError("empty FORM", line_no);
        }
        Token token;
        token.form = std::string(fields[1]);
        if (!fields[2].empty() && fields[2] != "_") {
            token.lemma = std::string(fields[2]);
        } else if (fields[2] == "_" && fields[1] == "_") {
            token.lemma = "_";
        }
        current.tokens.push_back(std::move(token));
    }
    flush();
}

std::vector<Sentence> parse_conllu(std::istream& in)
{
    std::vector<Sentence> out;
    for_each_conllu_sentence(in, [&](Sentence&& s) {
        if (!s.tokens.empty()) {
            out.push_back(std::move(s));
        }
    });
    return out;
}

std::vector<Sentence> parse_conllu_file(const std::string& path)
{
    auto in = open_input(path);
    return parse_conllu(in);
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences)
{
    for (const auto& sentence : sentences) {
        out << "# sent_id = " << sentence.sentence_id << '\n';
        for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
            const auto& token = sentence.tokens[i];
            out << (i + 1) << '\t' << token.form << '\t' << token.lemma.value_or("_")
                << "\t_\t_\t_\t_\t_\t_\t_\n";
        }
        out << '\n';
    }
}

// --- tokenizer -----------------------------------------------------------

std::vector<TextToken> tokenize(std::string_view text)
{
    const auto chars = unicode::decode(text);
    std::vector<TextToken> tokens;
    std::size_t i = 0;
    while (i < chars.size()) {
        const char32_t c = chars[i];
        if (unicode::is_space(c)) {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        if (unicode::is_letter_or_digit(c)) {
            while (end < chars.size() && (unicode::is_letter_or_digit(chars[end]) || unicode::is_mark(chars[end]))) {
                ++end;
            }
        }
        tokens.push_back({unicode::encode(std::u32string_view(chars).substr(i, end - i)), i, end});
        i = end;
    }
    return tokens;
}

std::vector<std::string> tokenize_forms(std::string_view text)
{
    std::vector<std::string> forms;
    for (auto& token : tokenize(text)) {
        forms.push_back(std::move(token.form));
    }
    return forms;
}

// --- JSONL documents ----------------------------------------------------

void for_each_jsonl_document(std::istream& in, const std::function<void(Document&&)>& sink)
{
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) {
            throw ParseError("expected a JSON object", line_no);
        }
        Document doc;
        doc.doc_id = json_string(obj, "doc_id", line_no);
        doc.title = json_string(obj, "title", line_no, false);
        doc.text = json_string(obj, "text", line_no, false);
        if (doc.doc_id.empty()) {
            throw ParseError("empty doc_id", line_no);
        }
        if (!seen.insert(doc.doc_id).second) {
            throw ParseError("duplicate doc_id '" + doc.doc_id + "'", line_no);
        }
        sink(std::move(doc));
    }
}

std::vector<Document> load_jsonl_corpus(std::istream& in)
{
    std::vector<Document> docs;
    for_each_jsonl_document(in, [&](Document&& d) { docs.push_back(std::move(d)); });
    return docs;
}

std::vector<Document> load_jsonl_corpus_file(const std::string& path)
{
    auto in = open_input(path);
    return load_jsonl_corpus(in);
}

std::vector<Query> load_queries(std::istream& in)
{
    std::vector<Query> queries;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) {
            continue;
        }
        Query q;
        if (line.front() == '{') {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
            }
            q.query_id = json_string(obj, obj.contains("query_id") ? "query_id" : "_id", line_no);
            q.text = json_string(obj, "text", line_no);
        } else {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw ParseError("expected 'qid<TAB>text'", line_no);
            }
            q.query_id = line.substr(0, tab);
            q.text = line.substr(tab + 1);
        }
        if (q.query_id.empty()) {
            throw ParseError("empty query id", line_no);
        }
        if (!seen.insert(q.query_id).second) {
            throw ParseError("duplicate query id '" + q.query_id + "'", line_no);
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<Query> load_queries_file(const std::string& path)
{
    auto in = open_input(path);
    return load_queries(in);
}

// --- TREC qrels / runs -------------------------------------------------

Qrels load_qrels(std::istream& in)
{
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        const auto fields = split_ws(line);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError("expected 'qid 0 docid grade'", line_no);
        }
        const long grade = parse_long(fields[3], line_no, "grade");
        if (grade < 0 || grade > 2) {
            throw ParseError("grade must be 0, 1 or 2, got " + fields[3], line_no);
        }
        auto [it, inserted] = qrels[fields[0]].emplace(fields[2], static_cast<int>(grade));
        if (!inserted && it->second != grade) {
            throw ParseError("conflicting grades for (" + fields[0] + ", " + fields[2] + ")", line_no);
        }
    }
    return qrels;
}

Qrels load_qrels_file(const std::string& path)
{
    auto in = open_input(path);
    return load_qrels(in);
}

RunList load_run(std::istream& in)
{
    struct Ranked {
        long rank;
        RunEntry entry;
        std::size_t line_no;
    };
    std::map<std::string, std::vector<Ranked>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        const auto fields = split_ws(line);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 6) {
            throw ParseError("expected 'qid Q0 docid rank score tag'", line_no);
        }
        const long rank = parse_long(fields[3], line_no, "rank");
        const double score = parse_double(fields[4], line_no, "score");
        raw[fields[0]].push_back({rank, {fields[2], score}, line_no});
    }

    RunList run;
    for (auto& [qid, entries] : raw) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Ranked& a, const Ranked& b) { return a.rank < b.rank; });
        std::set<std::string> seen;
        auto& out = run[qid];
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            if (e.rank != static_cast<long>(i + 1)) {
                throw ParseError("ranks for query '" + qid + "' are not 1..n contiguous", e.line_no);
            }
            if (i > 0 && e.entry.score > entries[i - 1].entry.score) {
                throw ParseError("scores for query '" + qid + "' increase with rank", e.line_no);
            }
            if (!seen.insert(e.entry.doc_id).second) {
                throw ParseError("duplicate doc_id '" + e.entry.doc_id + "' for query '" + qid + "'", e.line_no);
            }
            out.push_back(e.entry);
        }
    }
    return run;
}

RunList load_run_file(const std::string& path)
{
    auto in = open_input(path);
    return load_run(in);
}

void write_run(std::ostream& out, const RunList& run, std::string_view tag)
{
    char score[64];
    for (const auto& [qid, entries] : run) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            std::snprintf(score, sizeof score, "%.6f", entries[i].score);
            out << qid << " Q0 " << entries[i].doc_id << ' ' << (i + 1) << ' ' << score << ' ' << tag << '\n';
        }
    }
}

}  // namespace lemir
