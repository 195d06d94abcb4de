#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "lemir/corpus_io.hpp"
#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/ireval.hpp"
#include "lemir/lemeval.hpp"
#include "lemir/model_io.hpp"
#include "lemir/retrieval.hpp"

namespace py = pybind11;

namespace lemir {
namespace {

using PairList = std::vector<std::pair<std::string, std::string>>;

std::vector<Sentence> to_sentences(const std::vector<PairList>& sentences)
{
    std::vector<Sentence> out;
    out.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        Sentence s;
        s.sentence_id = "s" + std::to_string(i + 1);
        for (const auto& [form, lemma] : sentences[i]) {
            s.tokens.push_back({form, lemma});
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// A trained model plus the disambiguator chosen for it.
class Lemmatizer {
  public:
    explicit Lemmatizer(LemmatizerModel model) : model_(std::move(model)) {}

    static Lemmatizer train(const std::vector<PairList>& sentences, const std::string& method, double alpha,
                            double beta)
    {
        return Lemmatizer(train_lemmatizer(to_sentences(sentences), method, alpha, beta));
    }
    static Lemmatizer load(const std::string& path) { return Lemmatizer(LemmatizerModel::load_file(path)); }
    void save(const std::string& path) const { model_.save_file(path); }

    std::shared_ptr<const Disambiguator> disambiguator(const std::string& method) const
    {
        const std::string m = method.empty() ? (model_.hmm ? "hmm" : "freq") : method;
        if (m == "hmm" && model_.hmm) {
            return model_.hmm;
        }
        if (m == "freq" && model_.frequency) {
            return model_.frequency;
        }
        throw InvalidInput("model has no '" + m + "' disambiguator");
    }

    PairList lemmatize(const std::string& text, const std::string& method) const
    {
        return lemmatize_text(text, *model_.dictionary, *disambiguator(method));
    }

    NormalizationPipeline pipeline(const std::string& method) const
    {
        const auto d = disambiguator(method);
        return NormalizationPipeline::lemmatizer(model_.dictionary, d, "lemmatizer:" + d->name());
    }

    const std::string& method() const { return model_.method; }

  private:
    LemmatizerModel model_;
};

NormalizationPipeline pipeline_from(const py::object& spec, const std::string& method)
{
    if (py::isinstance<Lemmatizer>(spec)) {
        return spec.cast<const Lemmatizer&>().pipeline(method);
    }
    const auto name = spec.cast<std::string>();
    switch (parse_pipeline_kind(name)) {
    case PipelineKind::Identity: return NormalizationPipeline::identity();
    case PipelineKind::Stemmer: return NormalizationPipeline::default_stemmer();
    case PipelineKind::Lemmatizer: break;
    }
    throw InvalidInput("pass a Lemmatizer object for the lemmatizer pipeline");
}

/// An index together with the pipeline its queries must use.
class Index {
  public:
    Index(RetrievalIndex index, NormalizationPipeline pipeline)
        : index_(std::move(index)), pipeline_(std::move(pipeline))
    {}

    std::vector<std::pair<std::string, double>> search_text(const std::string& query, std::size_t k) const
    {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& hit : lemir::search(index_, pipeline_.normalize(query), k)) {
            out.emplace_back(hit.doc_id, hit.score);
        }
        return out;
    }

    const RetrievalIndex& raw() const { return index_; }

  private:
    RetrievalIndex index_;
    NormalizationPipeline pipeline_;
};

void BindErrors(py::module_& m)
{
    static py::exception<Error> base(m, "LemirError");
    static py::exception<InvalidInput> invalid(m, "InvalidInput", base.ptr());
    static py::exception<RuleIncompatible> incompatible(m, "RuleIncompatible", base.ptr());
    static py::exception<ParseError> parse(m, "ParseError", base.ptr());
    static py::exception<AlignmentError> alignment(m, "AlignmentError", base.ptr());
    static py::exception<ScorerError> scorer(m, "ScorerError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const InvalidInput& e) {
            py::set_error(invalid, e.what());
        } catch (const RuleIncompatible& e) {
            py::set_error(incompatible, e.what());
        } catch (const ParseError& e) {
            py::set_error(parse, e.what());
        } catch (const AlignmentError& e) {
            py::set_error(alignment, e.what());
        } catch (const ScorerError& e) {
            py::set_error(scorer, e.what());
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });
}

void BindEditscript(py::module_& m)
{
    m.def("extract_rule", &extract_rule_string, py::arg("form"), py::arg("lemma"),
          "Canonical rule string turning `form` into `lemma`.");
    m.def("apply_rule", &apply_rule_string, py::arg("form"), py::arg("rule"));
    m.def(
        "verbalize_rule", [](const std::string& rule) { return verbalize_rule(parse_rule(rule)); }, py::arg("rule"));
    m.def(
        "rule_frequencies",
        [](const PairList& pairs) {
            std::vector<std::tuple<std::string, std::size_t, double>> out;
            for (const auto& e : rule_frequency_table(pairs).entries()) {
                out.emplace_back(e.rule, e.count, e.share);
            }
            return out;
        },
        py::arg("pairs"), "(rule, count, share) rows, most frequent first.");
    m.attr("DO_NOTHING") = std::string(kDoNothingRule);
}

void BindCorpus(py::module_& m)
{
    m.def(
        "tokenize",
        [](const std::string& text) {
            std::vector<std::tuple<std::string, std::size_t, std::size_t>> out;
            for (const auto& t : tokenize(text)) {
                out.emplace_back(t.form, t.char_start, t.char_end);
            }
            return out;
        },
        py::arg("text"), "(form, start, end) with code point offsets.");
}

void BindLemmatizer(py::module_& m)
{
    py::class_<Lemmatizer>(m, "Lemmatizer")
        .def_static("train", &Lemmatizer::train, py::arg("sentences"), py::arg("method") = "all",
                    py::arg("alpha") = HmmModel::kDefaultAlpha, py::arg("beta") = HmmModel::kDefaultBeta,
                    "Train from sentences given as lists of (form, lemma).")
        .def_static("load", &Lemmatizer::load, py::arg("path"))
        .def("save", &Lemmatizer::save, py::arg("path"))
        .def("lemmatize", &Lemmatizer::lemmatize, py::arg("text"), py::arg("method") = "")
        .def_property_readonly("method", &Lemmatizer::method);
}

void BindRetrieval(py::module_& m)
{
    py::class_<Index>(m, "Index")
        .def_static(
            "build",
            [](const std::vector<std::tuple<std::string, std::string, std::string>>& docs, const py::object& pipeline,
               const std::string& method, double k1, double b, unsigned jobs) {
                std::vector<Document> documents;
                for (const auto& [id, title, text] : docs) {
                    documents.push_back({id, title, text});
                }
                auto p = pipeline_from(pipeline, method);
                auto idx = build_index(documents, p, {k1, b}, jobs);
                return Index(std::move(idx), std::move(p));
            },
            py::arg("docs"), py::arg("pipeline") = "identity", py::arg("method") = "", py::arg("k1") = 1.5,
            py::arg("b") = 0.75, py::arg("jobs") = 1, "Index (doc_id, title, text) triples.")
        .def("search", &Index::search_text, py::arg("query"), py::arg("k") = 100)
        .def_property_readonly("doc_count", [](const Index& i) { return i.raw().doc_count(); })
        .def_property_readonly("avgdl", [](const Index& i) { return i.raw().avgdl(); })
        .def_property_readonly("pipeline", [](const Index& i) { return i.raw().pipeline_label(); });
}

void BindEval(py::module_& m)
{
    m.def(
        "evaluate_run",
        [](const std::map<std::string, std::vector<std::pair<std::string, double>>>& run, const Qrels& qrels,
           const std::vector<std::size_t>& ks) {
            RunList r;
            for (const auto& [qid, hits] : run) {
                for (const auto& [doc, score] : hits) {
                    r[qid].push_back({doc, score});
                }
            }
            return evaluate_run(r, qrels, ks).to_json().dump();
        },
        py::arg("run"), py::arg("qrels"), py::arg("ks") = std::vector<std::size_t>{1, 5, 100});
    m.def(
        "bootstrap_ci",
        [](const std::vector<std::tuple<std::string, std::size_t, std::size_t>>& stats, std::size_t replicates,
           double level, std::uint64_t seed, unsigned jobs) {
            std::vector<SentenceStats> s;
            for (const auto& [id, correct, total] : stats) {
                s.push_back({id, correct, total});
            }
            const auto r = bootstrap_ci(std::move(s), {replicates, level, seed, jobs});
            return std::make_tuple(r.accuracy, r.ci_low, r.ci_high);
        },
        py::arg("stats"), py::arg("replicates") = 1000, py::arg("level") = 0.95, py::arg("seed") = 42,
        py::arg("jobs") = 1, "(accuracy, low, high) from (sentence_id, correct, total) rows.");
}

}  // namespace
}  // namespace lemir

PYBIND11_MODULE(_lemir, m)
{
    m.doc() = "Rule-based lemmatization and BM25 retrieval";
    lemir::BindErrors(m);
    lemir::BindEditscript(m);
    lemir::BindCorpus(m);
    lemir::BindLemmatizer(m);
    lemir::BindRetrieval(m);
    lemir::BindEval(m);
}
