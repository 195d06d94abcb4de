// lemir: command-line front end for rule extraction, lemma disambiguation,
// BM25 retrieval and their evaluation.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 scorer or protocol failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lemir/candidates.hpp"
#include "lemir/corpus_io.hpp"
#include "lemir/disambig.hpp"
#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/ireval.hpp"
#include "lemir/lemeval.hpp"
#include "lemir/model_io.hpp"
#include "lemir/parallel.hpp"
#include "lemir/retrieval.hpp"
#include "lemir/scorer_bridge.hpp"

namespace {

using namespace lemir;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitScorer = 3;

/// Writes to a file, or to stdout for "" and "-".
class Output {
  public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw InvalidInput("cannot write '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void finish()
    {
        stream().flush();
        if (!stream()) {
            throw InvalidInput("write failed");
        }
    }

  private:
    std::ofstream file_;
};

std::string read_all(const std::string& path)
{
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename Fn>
void with_input(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cin);
        return;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    fn(in);
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

// --- rules -------------------------------------------------------------------

struct RulesOptions {
    std::string input;
    std::string output;
    std::size_t limit = 0;
    std::string format = "tsv";
};

int rules_stats(const RulesOptions& opt)
{
    RuleFrequencyTable table;
    with_input(opt.input, [&](std::istream& in) {
        for_each_conllu_sentence(in, [&](Sentence&& s) {
            for (const auto& token : s.tokens) {
                if (token.lemma) {
                    table.add(token.form, *token.lemma);
                }
            }
        });
    });
    Output out(opt.output);
    if (opt.format == "tsv") {
        table.write_tsv(out.stream(), opt.limit);
    } else {
        auto& os = out.stream();
        std::size_t n = 0;
        char share[32];
        os << "Share\tRule\tDescription\n";
        for (const auto& e : table.entries()) {
            if (opt.limit != 0 && n++ == opt.limit) {
                break;
            }
            std::snprintf(share, sizeof share, "%.1f", e.share * 100.0);
            os << share << '\t' << e.rule << '\t' << verbalize_rule(parse_rule(e.rule)) << '\n';
        }
        os << "tokens\t" << table.total() << "\trules\t" << table.distinct() << '\n';
    }
    out.finish();
    return 0;
}

int rules_roundtrip(const RulesOptions& opt)
{
    std::size_t pairs = 0;
    std::size_t failures = 0;
    Output out(opt.output);
    with_input(opt.input, [&](std::istream& in) {
        for_each_conllu_sentence(in, [&](Sentence&& s) {
            for (const auto& token : s.tokens) {
                if (!token.lemma) {
                    continue;
                }
                ++pairs;
                const auto rule = extract_rule(token.form, *token.lemma);
                const auto text = format_rule(rule);
                const auto back = apply_rule(token.form, parse_rule(text));
                if (back != *token.lemma || parse_rule(text) != rule) {
                    ++failures;
                    std::cerr << "round-trip failure in " << s.sentence_id << ": '" << token.form << "' -> '"
                              << *token.lemma << "' via " << text << " gives '" << back << "'\n";
                }
            }
        });
    });
    out.stream() << "pairs\t" << pairs << "\nfailures\t" << failures << '\n';
    out.finish();
    return failures == 0 ? 0 : kExitData;
}

// --- models ------------------------------------------------------------------

struct TrainOptions {
    std::string method;
    std::string input;
    std::string output;
    double alpha = HmmModel::kDefaultAlpha;
    double beta = HmmModel::kDefaultBeta;
};

int train(const TrainOptions& opt)
{
    const auto sentences = parse_conllu_file(opt.input);
    const auto model = train_lemmatizer(sentences, opt.method, opt.alpha, opt.beta);
    Output out(opt.output);
    out.stream() << model.to_json().dump() << '\n';
    out.finish();
    return 0;
}

struct ScorerOptions {
    std::string endpoint = "reference";
    double timeout_s = 30.0;
    SpanMatcherConfig matcher;
};

std::shared_ptr<SpanScorer> make_scorer(const ScorerOptions& opt)
{
    if (opt.endpoint == "reference") {
        return std::make_shared<ReferenceScorer>(opt.matcher);
    }
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(opt.timeout_s * 1000.0));
    return bridge::remote_connect(opt.endpoint, timeout);
}

std::shared_ptr<const Disambiguator> make_disambiguator(const std::string& method, const LemmatizerModel& model,
                                                        const ScorerOptions& scorer)
{
    if (method == "oracle") {
        return std::make_shared<OracleDisambiguator>();
    }
    if (method == "freq") {
        if (!model.frequency) {
            throw InvalidInput("model has no frequency counts (train with 'freq' or 'all')");
        }
        return model.frequency;
    }
    if (method == "hmm") {
        if (!model.hmm) {
            throw InvalidInput("model has no HMM counts (train with 'hmm' or 'all')");
        }
        return model.hmm;
    }
    if (method == "span") {
        return std::make_shared<SpanMatcher>(make_scorer(scorer), scorer.matcher);
    }
    throw InvalidInput("unknown method '" + method + "' (oracle, freq, hmm, span)");
}

std::string default_method(const LemmatizerModel& model)
{
    return model.hmm ? "hmm" : "freq";
}

// --- lemmatize ---------------------------------------------------------------

struct LemmatizeOptions {
    std::string model;
    std::string method;
    std::string input;
    std::string output;
    std::string input_format = "text";
    unsigned jobs = 0;
    ScorerOptions scorer;
};

int lemmatize(const LemmatizeOptions& opt)
{
    const auto model = LemmatizerModel::load_file(opt.model);
    const auto method = opt.method.empty() ? default_method(model) : opt.method;
    if (method == "oracle") {
        throw InvalidInput("the oracle needs gold lemmas and cannot lemmatize");
    }
    const auto disambiguator = make_disambiguator(method, model, opt.scorer);
    Output out(opt.output);

    if (opt.input_format == "conllu") {
        std::vector<Sentence> sentences;
        with_input(opt.input, [&](std::istream& in) { sentences = parse_conllu(in); });
        const auto lattices = generate_candidates(*model.dictionary, sentences, opt.jobs);
        std::vector<DisambiguationResult> results(lattices.size());
        parallel_for(lattices.size(), opt.jobs,
                     [&](std::size_t i) { results[i] = disambiguator->disambiguate(lattices[i]); });
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            for (std::size_t t = 0; t < sentences[i].tokens.size(); ++t) {
                sentences[i].tokens[t].lemma = results[i].tokens[t].lemma;
            }
        }
        write_conllu(out.stream(), sentences);
    } else {
        std::istringstream in(read_all(opt.input));
        std::vector<std::string> lines;
        for (std::string line; std::getline(in, line);) {
            lines.push_back(line);
        }
        std::vector<std::vector<LemmaPair>> results(lines.size());
        parallel_for(lines.size(), opt.jobs, [&](std::size_t i) {
            results[i] = lemmatize_text(lines[i], *model.dictionary, *disambiguator);
        });
        for (const auto& pairs : results) {
            for (const auto& [form, lemma] : pairs) {
                out.stream() << form << '\t' << lemma << '\n';
            }
            out.stream() << '\n';
        }
    }
    out.finish();
    return 0;
}

// --- eval-lemma --------------------------------------------------------------

struct EvalLemmaOptions {
    std::string model;
    std::string test;
    std::string candidates;
    std::string methods = "oracle,freq,hmm";
    std::string output;
    std::string format = "text";
    BootstrapConfig bootstrap;
    ScorerOptions scorer;
};

int eval_lemma(const EvalLemmaOptions& opt)
{
    const auto gold = parse_conllu_file(opt.test);
    std::optional<LemmatizerModel> model;
    if (!opt.model.empty()) {
        model = LemmatizerModel::load_file(opt.model);
    }
    std::vector<CandidateLattice> lattices;
    if (!opt.candidates.empty()) {
        lattices = import_candidates_file(opt.candidates, &gold);
    } else if (model) {
        lattices = generate_candidates(*model->dictionary, gold, opt.bootstrap.jobs);
    } else {
        throw InvalidInput("need --model or --candidates to build candidate lattices");
    }

    const LemmatizerModel empty;
    std::vector<AccuracyReport> reports;
    bool frequency_used = false;
    bool reference_used = false;
    for (const auto& method : split_list(opt.methods)) {
        const auto disambiguator = make_disambiguator(method, model ? *model : empty, opt.scorer);
        frequency_used = frequency_used || method == "freq";
        reference_used = reference_used || (method == "span" && opt.scorer.endpoint == "reference");
        auto stats = evaluate_disambiguator(*disambiguator, lattices, opt.bootstrap.jobs);
        reports.push_back(bootstrap_ci(std::move(stats), opt.bootstrap, method));
    }

    std::vector<std::string> notes;
    notes.push_back("candidate oracle accuracy " + std::to_string(oracle_accuracy(lattices, gold)));
    if (frequency_used) {
        notes.push_back("freq is a count-based stand-in for a neural token classifier");
    }
    if (reference_used) {
        notes.push_back("span used the hashed reference scorer, not a trained span/label encoder");
    }

    Output out(opt.output);
    if (opt.format == "json") {
        nlohmann::json j = {{"reports", nlohmann::json::array()}, {"notes", notes}};
        for (const auto& r : reports) {
            j["reports"].push_back(r.to_json());
        }
        out.stream() << j.dump(2) << '\n';
    } else {
        write_accuracy_table(out.stream(), reports);
        for (const auto& n : notes) {
            out.stream() << "# " << n << '\n';
        }
    }
    out.finish();
    return 0;
}

// --- retrieval ---------------------------------------------------------------

struct PipelineOptions {
    std::string kind = "identity";
    std::string model;
    std::string method;
    std::string suffixes;
    ScorerOptions scorer;
};

NormalizationPipeline make_pipeline(const PipelineOptions& opt)
{
    switch (parse_pipeline_kind(opt.kind)) {
        case PipelineKind::Identity:
            return NormalizationPipeline::identity();
        case PipelineKind::Stemmer:
            return opt.suffixes.empty() ? NormalizationPipeline::default_stemmer()
                                        : NormalizationPipeline::stemmer(split_list(opt.suffixes));
        case PipelineKind::Lemmatizer: {
            if (opt.model.empty()) {
                throw InvalidInput("the lemmatizer pipeline needs --model");
            }
            auto model = LemmatizerModel::load_file(opt.model);
            const auto method = opt.method.empty() ? default_method(model) : opt.method;
            if (method == "oracle") {
                throw InvalidInput("the oracle cannot drive a retrieval pipeline");
            }
            auto disambiguator = make_disambiguator(method, model, opt.scorer);
            return NormalizationPipeline::lemmatizer(model.dictionary, disambiguator, "lemmatizer:" + method);
        }
    }
    throw InvalidInput("unknown pipeline '" + opt.kind + "'");
}

struct IndexOptions {
    std::string corpus;
    std::string output;
    Bm25Params params;
    PipelineOptions pipeline;
    unsigned jobs = 0;
};

int index_build(const IndexOptions& opt)
{
    const auto docs = load_jsonl_corpus_file(opt.corpus);
    const auto pipeline = make_pipeline(opt.pipeline);
    const auto index = build_index(docs, pipeline, opt.params, opt.jobs);
    index.save_file(opt.output);
    std::cerr << "indexed " << index.doc_count() << " documents, " << index.postings().size() << " terms ("
              << index.pipeline_label() << ")\n";
    return 0;
}

struct SearchOptions {
    std::string index;
    std::string queries;
    std::string output;
    std::string tag = "lemir";
    std::size_t top_k = 100;
    PipelineOptions pipeline;
    unsigned jobs = 0;
};

int search_cmd(const SearchOptions& opt)
{
    const auto index = RetrievalIndex::load_file(opt.index);
    const auto pipeline = make_pipeline(opt.pipeline);
    if (pipeline.label() != index.pipeline_label()) {
        throw InvalidInput("index was built with pipeline '" + index.pipeline_label() + "' but queries use '" +
                           pipeline.label() + "'");
    }
    const auto queries = load_queries_file(opt.queries);
    const auto run = search_all(index, queries, pipeline, opt.top_k, opt.jobs);
    Output out(opt.output);
    write_run(out.stream(), run, opt.tag);
    out.finish();
    return 0;
}

struct EvalIrOptions {
    std::vector<std::string> runs;
    std::vector<std::string> labels;
    std::string qrels;
    std::string ks = "1,5,100";
    std::string output;
    std::string format = "text";
};

int eval_ir(const EvalIrOptions& opt)
{
    if (!opt.labels.empty() && opt.labels.size() != opt.runs.size()) {
        throw InvalidInput("--label must be given once per --run");
    }
    std::vector<std::size_t> ks;
    for (const auto& k : split_list(opt.ks)) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(k, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != k.size() || v == 0) {
            throw CLI::ValidationError("--ks", "cutoffs must be positive integers: '" + k + "'");
        }
        ks.push_back(v);
    }
    const auto qrels = load_qrels_file(opt.qrels);
    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < opt.runs.size(); ++i) {
        const auto label =
            opt.labels.empty() ? std::filesystem::path(opt.runs[i]).stem().string() : opt.labels[i];
        reports.push_back(evaluate_run(load_run_file(opt.runs[i]), qrels, ks, label));
    }
    Output out(opt.output);
    if (opt.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : reports) {
            j.push_back(r.to_json());
        }
        out.stream() << j.dump(2) << '\n';
    } else {
        write_metrics_table(out.stream(), reports);
    }
    out.finish();
    return 0;
}

// --- scorer ------------------------------------------------------------------

struct ScorerCheckOptions {
    ScorerOptions scorer;
    std::size_t fuzz = 1000;
    std::uint64_t seed = 42;
};

int scorer_check(const ScorerCheckOptions& opt)
{
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(opt.scorer.timeout_s * 1000.0));
    const auto client = bridge::remote_connect(opt.scorer.endpoint, timeout);
    const auto results = bridge::run_conformance_suite(*client, opt.fuzz, opt.seed);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) {
            std::cout << ": " << r.detail;
        }
        std::cout << '\n';
        ok = ok && r.passed;
    }
    return ok ? 0 : kExitScorer;
}

int scorer_serve_reference(const SpanMatcherConfig& config)
{
    std::ios::sync_with_stdio(false);
    ReferenceScorer scorer(config);
    bridge::StreamChannel channel(std::cin, std::cout);
    bridge::serve(channel, scorer);
    return 0;
}

// --- option wiring -----------------------------------------------------------

void add_jobs(CLI::App* app, unsigned& jobs)
{
    app->add_option("-j,--jobs", jobs, "Worker threads, 0 = all hardware threads")->envname("LEMIR_JOBS");
}

void add_scorer_options(CLI::App* app, ScorerOptions& opt)
{
    app->add_option("--scorer", opt.endpoint,
                    "Span scorer: 'reference', 'tcp:HOST:PORT', or a command speaking the scorer protocol")
        ->envname("LEMIR_SCORER");
    app->add_option("--scorer-timeout", opt.timeout_s, "Per-request timeout in seconds")
        ->envname("LEMIR_SCORER_TIMEOUT")
        ->check(CLI::PositiveNumber);
    app->add_option("--threshold", opt.matcher.threshold, "Span-match decision threshold")
        ->envname("LEMIR_THRESHOLD")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--fallback-on-scorer-error", opt.matcher.fallback_on_scorer_error,
                  "Use do-nothing for a sentence whose scoring failed instead of aborting");
}

void add_pipeline_options(CLI::App* app, PipelineOptions& opt)
{
    app->add_option("--pipeline", opt.kind, "identity, stemmer or lemmatizer")
        ->envname("LEMIR_PIPELINE")
        ->check(CLI::IsMember({"identity", "stemmer", "lemmatizer"}));
    app->add_option("--model", opt.model, "Lemmatizer model for the lemmatizer pipeline")->envname("LEMIR_MODEL");
    app->add_option("--method", opt.method, "Disambiguator for the lemmatizer pipeline (freq, hmm, span)")
        ->check(CLI::IsMember({"freq", "hmm", "span"}));
    app->add_option("--suffixes", opt.suffixes, "Comma-separated stemmer suffixes (default: built-in list)");
    add_scorer_options(app, opt.scorer);
}

int run(int argc, char** argv)
{
    CLI::App app{"Lemma disambiguation and BM25 retrieval toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::function<int()> action;

    // rules
    auto* rules = app.add_subcommand("rules", "Transformation rule statistics");
    rules->require_subcommand(1);
    RulesOptions rules_opt;
    auto* stats = rules->add_subcommand("stats", "Rule frequency table of a CoNLL-U file");
    stats->add_option("input", rules_opt.input, "CoNLL-U file, '-' for stdin")->required();
    stats->add_option("-o,--output", rules_opt.output, "Output file (default stdout)");
    stats->add_option("--limit", rules_opt.limit, "Only the N most frequent rules, 0 = all");
    stats->add_option("--format", rules_opt.format, "tsv or table")->check(CLI::IsMember({"tsv", "table"}));
    stats->callback([&] { action = [&] { return rules_stats(rules_opt); }; });
    auto* roundtrip = rules->add_subcommand("roundtrip", "Check apply(extract(form, lemma)) = lemma on a CoNLL-U file");
    roundtrip->add_option("input", rules_opt.input, "CoNLL-U file, '-' for stdin")->required();
    roundtrip->add_option("-o,--output", rules_opt.output, "Output file (default stdout)");
    roundtrip->callback([&] { action = [&] { return rules_roundtrip(rules_opt); }; });

    // train
    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "Train a lemmatizer model from a CoNLL-U file");
    train_cmd->add_option("method", train_opt.method, "freq, hmm or all")
        ->required()
        ->check(CLI::IsMember({"freq", "hmm", "all"}));
    train_cmd->add_option("input", train_opt.input, "Training CoNLL-U file")->required();
    train_cmd->add_option("-o,--output", train_opt.output, "Model file (default stdout)");
    train_cmd->add_option("--alpha", train_opt.alpha, "HMM transition smoothing")->check(CLI::PositiveNumber);
    train_cmd->add_option("--beta", train_opt.beta, "HMM emission smoothing")->check(CLI::PositiveNumber);
    train_cmd->callback([&] { action = [&] { return train(train_opt); }; });

    // lemmatize
    LemmatizeOptions lem_opt;
    auto* lem = app.add_subcommand("lemmatize", "Lemmatize raw text (one sentence per line) or CoNLL-U");
    lem->add_option("--model", lem_opt.model, "Model file from 'train'")->required()->envname("LEMIR_MODEL");
    lem->add_option("--method", lem_opt.method, "freq, hmm or span (default: hmm if present)")
        ->check(CLI::IsMember({"freq", "hmm", "span"}));
    lem->add_option("-i,--input", lem_opt.input, "Input file (default stdin)");
    lem->add_option("-o,--output", lem_opt.output, "Output file (default stdout)");
    lem->add_option("--input-format", lem_opt.input_format, "text or conllu")
        ->check(CLI::IsMember({"text", "conllu"}));
    add_jobs(lem, lem_opt.jobs);
    add_scorer_options(lem, lem_opt.scorer);
    lem->callback([&] { action = [&] { return lemmatize(lem_opt); }; });

    // eval-lemma
    EvalLemmaOptions el_opt;
    el_opt.bootstrap.jobs = 0;
    auto* el = app.add_subcommand("eval-lemma", "Accuracy with bootstrap confidence intervals");
    el->add_option("--model", el_opt.model, "Model file from 'train'")->envname("LEMIR_MODEL");
    el->add_option("--test", el_opt.test, "Gold CoNLL-U file")->required();
    el->add_option("--candidates", el_opt.candidates, "Imported candidate JSONL instead of the model dictionary");
    el->add_option("--methods", el_opt.methods, "Comma-separated: oracle, freq, hmm, span");
    el->add_option("-B,--replicates", el_opt.bootstrap.replicates, "Bootstrap replicates")
        ->envname("LEMIR_REPLICATES")
        ->check(CLI::PositiveNumber);
    el->add_option("--level", el_opt.bootstrap.level, "Confidence level")->check(CLI::Range(0.0, 1.0));
    el->add_option("--seed", el_opt.bootstrap.seed, "Bootstrap seed")->envname("LEMIR_SEED");
    el->add_option("-o,--output", el_opt.output, "Output file (default stdout)");
    el->add_option("--format", el_opt.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    add_jobs(el, el_opt.bootstrap.jobs);
    add_scorer_options(el, el_opt.scorer);
    el->callback([&] { action = [&] { return eval_lemma(el_opt); }; });

    // index build
    IndexOptions idx_opt;
    auto* index = app.add_subcommand("index", "Inverted index management");
    index->require_subcommand(1);
    auto* build = index->add_subcommand("build", "Build a BM25 index from a JSONL corpus");
    build->add_option("--corpus", idx_opt.corpus, "JSONL documents")->required();
    build->add_option("-o,--output", idx_opt.output, "Index file")->required();
    build->add_option("--k1", idx_opt.params.k1, "BM25 k1")->envname("LEMIR_K1")->check(CLI::PositiveNumber);
    build->add_option("--b", idx_opt.params.b, "BM25 b")->envname("LEMIR_B")->check(CLI::Range(0.0, 1.0));
    add_pipeline_options(build, idx_opt.pipeline);
    add_jobs(build, idx_opt.jobs);
    build->callback([&] { action = [&] { return index_build(idx_opt); }; });

    // search
    SearchOptions search_opt;
    auto* search = app.add_subcommand("search", "Run queries against an index, write a TREC run");
    search->add_option("--index", search_opt.index, "Index file")->required();
    search->add_option("--queries", search_opt.queries, "Queries (JSONL or TSV)")->required();
    search->add_option("-o,--output", search_opt.output, "Run file (default stdout)");
    search->add_option("-k,--top-k", search_opt.top_k, "Results per query")
        ->envname("LEMIR_TOP_K")
        ->check(CLI::PositiveNumber);
    search->add_option("--tag", search_opt.tag, "Run tag");
    add_pipeline_options(search, search_opt.pipeline);
    add_jobs(search, search_opt.jobs);
    search->callback([&] { action = [&] { return search_cmd(search_opt); }; });

    // eval-ir
    EvalIrOptions ir_opt;
    auto* ir = app.add_subcommand("eval-ir", "Recall@k, MAP@k and Success@k of TREC runs");
    ir->add_option("--run", ir_opt.runs, "Run file (repeatable)")->required();
    ir->add_option("--label", ir_opt.labels, "Column label per run (default: file stem)");
    ir->add_option("--qrels", ir_opt.qrels, "TREC qrels")->required();
    ir->add_option("--ks", ir_opt.ks, "Comma-separated cutoffs");
    ir->add_option("-o,--output", ir_opt.output, "Output file (default stdout)");
    ir->add_option("--format", ir_opt.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    ir->callback([&] { action = [&] { return eval_ir(ir_opt); }; });

    // scorer
    auto* scorer = app.add_subcommand("scorer", "External span scorer utilities");
    scorer->require_subcommand(1);
    ScorerCheckOptions check_opt;
    auto* check = scorer->add_subcommand("check", "Run the protocol conformance suite against a scorer");
    check->add_option("endpoint", check_opt.scorer.endpoint, "'tcp:HOST:PORT' or a command")
        ->required()
        ->envname("LEMIR_SCORER");
    check->add_option("--fuzz", check_opt.fuzz, "Random requests to validate");
    check->add_option("--seed", check_opt.seed, "Fuzz seed")->envname("LEMIR_SEED");
    check->add_option("--scorer-timeout", check_opt.scorer.timeout_s, "Per-request timeout in seconds")
        ->check(CLI::PositiveNumber);
    check->callback([&] { action = [&] { return scorer_check(check_opt); }; });
    SpanMatcherConfig serve_cfg;
    auto* serve = scorer->add_subcommand("serve-reference", "Serve the built-in reference scorer on stdin/stdout");
    serve->add_option("--dimension", serve_cfg.dimension, "Embedding dimension")->check(CLI::PositiveNumber);
    serve->add_option("--window", serve_cfg.window, "Context window");
    serve->add_option("--scale", serve_cfg.logistic_scale, "Logistic scale");
    serve->callback([&] { action = [&] { return scorer_serve_reference(serve_cfg); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        return action();
    } catch (const CLI::ParseError& e) {
        std::cerr << "lemir: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ScorerError& e) {
        std::cerr << "lemir: scorer error: " << e.what() << '\n';
        return kExitScorer;
    } catch (const Error& e) {
        std::cerr << "lemir: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "lemir: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "lemir: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    return run(argc, argv);
}
