#include "lemir/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "lemir/errors.hpp"
#include "lemir/lemeval.hpp"
#include "lemir/parallel.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

namespace {

constexpr char kMagic[8] = {'L', 'E', 'M', 'I', 'R', 'I', 'D', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

std::map<std::string, std::size_t> query_term_counts(const std::vector<std::string>& terms)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& t : terms) {
        ++counts[t];
    }
    return counts;
}

double term_weight(const Bm25Params& p, double qtf, double idf, double tf, double dl, double avgdl)
{
    return qtf * idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * dl / avgdl));
}

void put_u32(std::ostream& out, std::uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v)
{
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& out, std::string_view s)
{
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(char* dst, std::size_t n)
    {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw ParseError("truncated index file");
        }
    }

    std::uint32_t u32()
    {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | b[i];
        }
        return v;
    }

    std::uint64_t u64()
    {
        unsigned char b[8];
        bytes(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = (v << 8) | b[i];
        }
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string str()
    {
        const std::uint32_t n = u32();
        if (n > (1u << 30)) {
            throw ParseError("corrupt index file: string too long");
        }
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

  private:
    std::istream& in_;
};

}  // namespace

const char* to_string(PipelineKind kind) noexcept
{
    switch (kind) {
    case PipelineKind::Identity: return "identity";
    case PipelineKind::Stemmer: return "stemmer";
    case PipelineKind::Lemmatizer: return "lemmatizer";
    }
    return "unknown";
}

PipelineKind parse_pipeline_kind(std::string_view name)
{
    if (name == "identity") {
        return PipelineKind::Identity;
    }
    if (name == "stemmer") {
        return PipelineKind::Stemmer;
    }
    if (name == "lemmatizer") {
        return PipelineKind::Lemmatizer;
    }
    throw InvalidInput("unknown pipeline '" + std::string(name) + "' (identity, stemmer, lemmatizer)");
}

// --- normalization ---------------------------------------------------------------

NormalizationPipeline NormalizationPipeline::identity() { return {}; }

NormalizationPipeline NormalizationPipeline::stemmer(std::vector<std::string> suffixes)
{
    NormalizationPipeline p;
    p.kind_ = PipelineKind::Stemmer;
    p.label_ = "stemmer";
    std::set<std::u32string> unique;
    for (const auto& s : suffixes) {
        if (!s.empty()) {
            unique.insert(unicode::decode(unicode::lower(s)));
        }
    }
    p.suffixes_u32_.assign(unique.begin(), unique.end());
    std::stable_sort(p.suffixes_u32_.begin(), p.suffixes_u32_.end(),
                     [](const std::u32string& a, const std::u32string& b) { return a.size() > b.size(); });
    for (const auto& s : p.suffixes_u32_) {
        p.suffixes_.push_back(unicode::encode(s));
    }
    return p;
}

NormalizationPipeline NormalizationPipeline::default_stemmer()
{
    return stemmer({"dele", "tele", "desse", "dest", "deks", "dega", "deni", "dena", "des", "del", "delt", "sse",
                    "st", "ks", "ga", "ni", "na", "ta", "le", "lt", "ll", "de", "te", "id", "s", "l", "d", "t"});
}

NormalizationPipeline NormalizationPipeline::lemmatizer(std::shared_ptr<const DictionaryGenerator> generator,
                                                        std::shared_ptr<const Disambiguator> disambiguator,
                                                        std::string label)
{
    if (!generator || !disambiguator) {
        throw InvalidInput("lemmatizer pipeline needs a generator and a disambiguator");
    }
    NormalizationPipeline p;
    p.kind_ = PipelineKind::Lemmatizer;
    p.label_ = std::move(label);
    p.generator_ = std::move(generator);
    p.disambiguator_ = std::move(disambiguator);
    return p;
}

std::string NormalizationPipeline::stem(std::string_view token) const
{
    auto text = unicode::decode(unicode::lower(token));
    for (const auto& suffix : suffixes_u32_) {
        if (text.size() >= suffix.size() + kMinStemLength &&
            text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0) {
            text.resize(text.size() - suffix.size());
            break;
        }
    }
    return unicode::encode(text);
}

std::vector<std::string> NormalizationPipeline::normalize(std::string_view text) const
{
    std::vector<std::string> out;
    switch (kind_) {
    case PipelineKind::Identity:
        for (const auto& form : tokenize_forms(text)) {
            out.push_back(unicode::lower(form));
        }
        break;
    case PipelineKind::Stemmer:
        for (const auto& form : tokenize_forms(text)) {
            out.push_back(stem(form));
        }
        break;
    case PipelineKind::Lemmatizer:
        for (const auto& [form, lemma] : lemmatize_text(text, *generator_, *disambiguator_)) {
            out.push_back(unicode::lower(lemma));
        }
        break;
    }
    return out;
}

std::vector<std::string> normalize(const NormalizationPipeline& pipeline, std::string_view text)
{
    return pipeline.normalize(text);
}

// --- index -------------------------------------------------------------------------

void Bm25Params::validate() const
{
    if (!(k1 > 0.0) || !std::isfinite(k1)) {
        throw InvalidInput("k1 must be positive");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw InvalidInput("b must be in [0, 1]");
    }
}

void RetrievalIndex::finish()
{
    if (doc_ids_.empty()) {
        throw InvalidInput("cannot build an index over an empty corpus");
    }
    std::set<std::string_view> seen;
    for (const auto& id : doc_ids_) {
        if (!seen.insert(id).second) {
            throw InvalidInput("duplicate doc_id '" + id + "'");
        }
    }
    std::uint64_t total = 0;
    for (auto len : doc_lengths_) {
        total += len;
    }
    avgdl_ = static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
}

RetrievalIndex RetrievalIndex::from_terms(std::vector<std::string> doc_ids,
                                          const std::vector<std::vector<std::string>>& terms, Bm25Params params,
                                          std::string pipeline_label)
{
    if (doc_ids.size() != terms.size()) {
        throw InvalidInput("from_terms: doc id and term list counts differ");
    }
    params.validate();
    RetrievalIndex index;
    index.params_ = params;
    index.pipeline_label_ = std::move(pipeline_label);
    index.doc_ids_ = std::move(doc_ids);
    index.doc_lengths_.reserve(terms.size());
    for (std::size_t d = 0; d < terms.size(); ++d) {
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : terms[d]) {
            ++tf[t];
        }
        for (const auto& [term, count] : tf) {
            index.postings_[std::string(term)].push_back({static_cast<std::uint32_t>(d), count});
        }
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms[d].size()));
    }
    index.finish();
    return index;
}

RetrievalIndex RetrievalIndex::merge(const std::vector<RetrievalIndex>& shards)
{
    if (shards.empty()) {
        throw InvalidInput("merge needs at least one shard");
    }
    RetrievalIndex index;
    index.params_ = shards.front().params_;
    index.pipeline_label_ = shards.front().pipeline_label_;
    for (const auto& shard : shards) {
        if (!(shard.params_ == index.params_) || shard.pipeline_label_ != index.pipeline_label_) {
            throw InvalidInput("cannot merge shards built with different parameters or pipelines");
        }
        const auto offset = static_cast<std::uint32_t>(index.doc_ids_.size());
        for (const auto& [term, list] : shard.postings_) {
            auto& dst = index.postings_[term];
            for (const auto& p : list) {
                dst.push_back({p.doc + offset, p.tf});
            }
        }
        index.doc_ids_.insert(index.doc_ids_.end(), shard.doc_ids_.begin(), shard.doc_ids_.end());
        index.doc_lengths_.insert(index.doc_lengths_.end(), shard.doc_lengths_.begin(), shard.doc_lengths_.end());
    }
    index.finish();
    return index;
}

std::size_t RetrievalIndex::document_frequency(const std::string& term) const
{
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

std::uint32_t RetrievalIndex::term_frequency(const std::string& term, std::uint32_t doc) const
{
    auto it = postings_.find(term);
    if (it == postings_.end()) {
        return 0;
    }
    const auto& list = it->second;
    auto p = std::lower_bound(list.begin(), list.end(), doc,
                              [](const Posting& posting, std::uint32_t d) { return posting.doc < d; });
    return p != list.end() && p->doc == doc ? p->tf : 0;
}

double RetrievalIndex::idf(const std::string& term) const
{
    const double n = static_cast<double>(doc_count());
    const double df = static_cast<double>(document_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

void RetrievalIndex::save(std::ostream& out) const
{
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kFormatVersion);
    put_f64(out, params_.k1);
    put_f64(out, params_.b);
    put_str(out, pipeline_label_);
    put_u32(out, static_cast<std::uint32_t>(doc_ids_.size()));
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        put_str(out, doc_ids_[d]);
        put_u32(out, doc_lengths_[d]);
    }
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_) {
        terms.push_back(&term);
    }
    std::sort(terms.begin(), terms.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
    put_u32(out, static_cast<std::uint32_t>(terms.size()));
    for (const auto* term : terms) {
        const auto& list = postings_.at(*term);
        put_str(out, *term);
        put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
    if (!out) {
        throw Error("failed to write index");
    }
}

void RetrievalIndex::save_file(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write '" + path + "'");
    }
    save(out);
}

RetrievalIndex RetrievalIndex::load(std::istream& in)
{
    Reader r(in);
    char magic[sizeof kMagic];
    r.bytes(magic, sizeof magic);
    if (!std::equal(magic, magic + sizeof magic, kMagic)) {
        throw ParseError("not a lemir index file");
    }
    if (const auto version = r.u32(); version != kFormatVersion) {
        throw ParseError("unsupported index format version " + std::to_string(version));
    }
    RetrievalIndex index;
    index.params_.k1 = r.f64();
    index.params_.b = r.f64();
    index.pipeline_label_ = r.str();
    const std::uint32_t n = r.u32();
    for (std::uint32_t d = 0; d < n; ++d) {
        index.doc_ids_.push_back(r.str());
        index.doc_lengths_.push_back(r.u32());
    }
    const std::uint32_t terms = r.u32();
    for (std::uint32_t t = 0; t < terms; ++t) {
        std::string term = r.str();
        const std::uint32_t count = r.u32();
        auto& list = index.postings_[std::move(term)];
        list.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            Posting p;
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n || (!list.empty() && p.doc <= list.back().doc)) {
                throw ParseError("corrupt index file: postings out of order");
            }
            list.push_back(p);
        }
    }
    index.params_.validate();
    index.finish();
    return index;
}

RetrievalIndex RetrievalIndex::load_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    return load(in);
}

RetrievalIndex build_index(const std::vector<Document>& documents, const NormalizationPipeline& pipeline,
                           Bm25Params params, unsigned jobs)
{
    if (documents.empty()) {
        throw InvalidInput("cannot build an index over an empty corpus");
    }
    std::vector<std::vector<std::string>> terms(documents.size());
    parallel_for(documents.size(), jobs, [&](std::size_t i) {
        terms[i] = pipeline.normalize(documents[i].title + " " + documents[i].text);
    });
    std::vector<std::string> ids;
    ids.reserve(documents.size());
    for (const auto& d : documents) {
        ids.push_back(d.doc_id);
    }
    return RetrievalIndex::from_terms(std::move(ids), terms, params, pipeline.label());
}

// --- scoring -------------------------------------------------------------------------

double bm25_score(const RetrievalIndex& index, const std::vector<std::string>& query_terms, std::uint32_t doc)
{
    const double dl = static_cast<double>(index.doc_lengths().at(doc));
    double score = 0.0;
    for (const auto& [term, qtf] : query_term_counts(query_terms)) {
        const std::uint32_t tf = index.term_frequency(term, doc);
        if (tf == 0) {
            continue;
        }
        score += term_weight(index.params(), static_cast<double>(qtf), index.idf(term), static_cast<double>(tf), dl,
                             index.avgdl());
    }
    return score;
}

std::vector<SearchHit> search(const RetrievalIndex& index, const std::vector<std::string>& query_terms, std::size_t k)
{
    if (k < 1) {
        throw InvalidInput("search needs k >= 1");
    }
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& [term, qtf] : query_term_counts(query_terms)) {
        auto it = index.postings().find(term);
        if (it == index.postings().end()) {
            continue;
        }
        const double idf = index.idf(term);
        for (const auto& p : it->second) {
            if (acc[p.doc] == 0.0) {
                touched.push_back(p.doc);
            }
            acc[p.doc] += term_weight(index.params(), static_cast<double>(qtf), idf, static_cast<double>(p.tf),
                                      static_cast<double>(index.doc_lengths()[p.doc]), index.avgdl());
        }
    }

    std::vector<std::uint32_t> hits;
    for (auto d : touched) {
        if (acc[d] > 0.0) {
            hits.push_back(d);
        }
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    const auto& ids = index.doc_ids();
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        return acc[a] != acc[b] ? acc[a] > acc[b] : ids[a] < ids[b];
    };
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);

    std::vector<SearchHit> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back({ids[hits[i]], acc[hits[i]]});
    }
    return out;
}

RunList search_all(const RetrievalIndex& index, const std::vector<Query>& queries,
                   const NormalizationPipeline& pipeline, std::size_t k, unsigned jobs)
{
    std::vector<std::vector<SearchHit>> results(queries.size());
    parallel_for(queries.size(), jobs,
                 [&](std::size_t i) { results[i] = search(index, pipeline.normalize(queries[i].text), k); });
    RunList run;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto& entries = run[queries[i].query_id];
        for (auto& hit : results[i]) {
            entries.push_back({std::move(hit.doc_id), hit.score});
        }
    }
    return run;
}

}  // namespace lemir
