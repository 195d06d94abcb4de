#include "lemir/lemeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "lemir/corpus_io.hpp"
#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/parallel.hpp"

namespace lemir {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Multiply-shift range reduction; unlike std::uniform_int_distribution it is
// identical across standard libraries.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n)
{
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

std::string fixed3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::vector<std::string> lemmatize_tokens(const std::vector<std::string>& forms, const DictionaryGenerator& generator,
                                          const Disambiguator& disambiguator)
{
    Sentence sentence;
    for (const auto& form : forms) {
        sentence.tokens.push_back({form, std::nullopt});
    }
    const auto result = disambiguator.disambiguate(generate_candidates(generator, sentence));
    if (result.tokens.size() != forms.size()) {
        throw AlignmentError(disambiguator.name() + " returned " + std::to_string(result.tokens.size()) +
                             " decisions for " + std::to_string(forms.size()) + " tokens");
    }
    std::vector<std::string> lemmas;
    lemmas.reserve(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i) {
        lemmas.push_back(apply_rule_string(forms[i], result.tokens[i].rule));
    }
    return lemmas;
}

std::vector<LemmaPair> lemmatize_text(std::string_view text, const DictionaryGenerator& generator,
                                      const Disambiguator& disambiguator)
{
    auto forms = tokenize_forms(text);
    auto lemmas = lemmatize_tokens(forms, generator, disambiguator);
    std::vector<LemmaPair> out;
    out.reserve(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i) {
        out.emplace_back(std::move(forms[i]), std::move(lemmas[i]));
    }
    return out;
}

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& gold)
{
    if (predicted.size() != gold.size()) {
        throw AlignmentError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                             std::to_string(gold.size()) + " gold lemmas");
    }
    if (gold.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        correct += predicted[i] == gold[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

SentenceStats score_sentence(const DisambiguationResult& result, const Sentence& gold)
{
    if (result.tokens.size() != gold.tokens.size()) {
        throw AlignmentError("sentence '" + gold.sentence_id + "': " + std::to_string(result.tokens.size()) +
                             " decisions for " + std::to_string(gold.tokens.size()) + " tokens");
    }
    SentenceStats stats{gold.sentence_id, 0, 0};
    for (std::size_t i = 0; i < gold.tokens.size(); ++i) {
        if (!gold.tokens[i].lemma) {
            continue;
        }
        ++stats.total;
        stats.correct += result.tokens[i].lemma == *gold.tokens[i].lemma ? 1 : 0;
    }
    return stats;
}

std::vector<SentenceStats> evaluate_disambiguator(const Disambiguator& disambiguator,
                                                  const std::vector<CandidateLattice>& lattices, unsigned jobs)
{
    std::vector<SentenceStats> stats(lattices.size());
    parallel_for(lattices.size(), jobs, [&](std::size_t i) {
        stats[i] = score_sentence(disambiguator.disambiguate(lattices[i]), lattices[i].sentence);
    });
    return stats;
}

double nearest_rank(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) {
        throw InvalidInput("nearest_rank of an empty sample");
    }
    // The epsilon keeps e.g. 0.975 * 1000 from rounding up to rank 976.
    const double exact = p * static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

AccuracyReport bootstrap_ci(std::vector<SentenceStats> stats, const BootstrapConfig& config, std::string method)
{
    if (stats.empty()) {
        throw InvalidInput("bootstrap_ci needs at least one sentence");
    }
    if (config.replicates < 1) {
        throw InvalidInput("bootstrap_ci needs at least one replicate");
    }
    if (!(config.level > 0.0 && config.level < 1.0)) {
        throw InvalidInput("confidence level must be in (0, 1)");
    }
    std::stable_sort(stats.begin(), stats.end(),
                     [](const SentenceStats& a, const SentenceStats& b) { return a.sentence_id < b.sentence_id; });

    AccuracyReport report;
    report.method = std::move(method);
    report.n_sentences = stats.size();
    report.replicates = config.replicates;
    report.level = config.level;
    report.seed = config.seed;
    std::size_t correct = 0;
    for (const auto& s : stats) {
        correct += s.correct;
        report.n_tokens += s.total;
    }
    report.accuracy = report.n_tokens == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(report.n_tokens);

    const std::size_t n = stats.size();
    std::vector<double> values(config.replicates);
    parallel_for(config.replicates, config.jobs, [&](std::size_t r) {
        std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(r)));
        std::size_t c = 0;
        std::size_t t = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& s = stats[draw_index(rng, n)];
            c += s.correct;
            t += s.total;
        }
        values[r] = t == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(t);
    });
    std::sort(values.begin(), values.end());
    const double tail = (1.0 - config.level) / 2.0;
    report.ci_low = nearest_rank(values, tail);
    report.ci_high = nearest_rank(values, 1.0 - tail);
    return report;
}

nlohmann::json AccuracyReport::to_json() const
{
    return {{"method", method},       {"accuracy", accuracy},       {"ci_low", ci_low},
            {"ci_high", ci_high},     {"n_tokens", n_tokens},       {"n_sentences", n_sentences},
            {"replicates", replicates}, {"level", level},           {"seed", seed}};
}

void write_accuracy_table(std::ostream& out, const std::vector<AccuracyReport>& reports)
{
    std::size_t width = std::string("Method").size();
    for (const auto& r : reports) {
        width = std::max(width, r.method.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    const double level = reports.empty() ? 0.95 : reports.front().level;
    const std::string header = "Accuracy [" + std::to_string(std::lround(level * 100.0)) + "% CI]";
    out << pad("Method", width) << "  " << pad(header, 22) << "  Tokens  Sentences\n";
    for (const auto& r : reports) {
        const std::string cell = fixed3(r.accuracy) + " [" + fixed3(r.ci_low) + ", " + fixed3(r.ci_high) + "]";
        out << pad(r.method, width) << "  " << pad(cell, 22) << "  " << pad(std::to_string(r.n_tokens), 6) << "  "
            << r.n_sentences << '\n';
    }
}

}  // namespace lemir
