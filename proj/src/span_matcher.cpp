#include "lemir/disambig.hpp"

#include <cmath>
#include <set>

#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void add_feature(Embedding& v, std::string_view feature)
{
    const std::uint64_t h = fnv1a64(feature);
    v[h % v.size()] += (h >> 63) != 0 ? -1.0 : 1.0;
}

void add_char_ngrams(Embedding& v, std::u32string_view text)
{
    for (std::size_t n = 1; n <= 4; ++n) {
        for (std::size_t i = 0; i + n <= text.size(); ++i) {
            add_feature(v, "g:" + unicode::encode(text.substr(i, n)));
        }
    }
}

void normalize(Embedding& v)
{
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) {
            x /= norm;
        }
    }
}

[[noreturn]] void rethrow_with_context(const std::string& context)
{
    try {
        throw;
    } catch (const ProtocolError& e) {
        throw ProtocolError(e.kind(), context + ": " + e.what());
    } catch (const ScorerTimeout& e) {
        throw ScorerTimeout(context + ": " + e.what());
    } catch (const ConnectionClosed& e) {
        throw ConnectionClosed(context + ": " + e.what());
    } catch (const RemoteError& e) {
        throw RemoteError(context + ": " + e.what());
    } catch (const ScorerError& e) {
        throw ScorerError(context + ": " + e.what());
    }
}

}  // namespace

void SpanMatcherConfig::validate() const
{
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InvalidInput("span matcher threshold must be in [0, 1]");
    }
    if (dimension < 1) {
        throw InvalidInput("embedding dimension must be >= 1");
    }
    if (!std::isfinite(logistic_scale)) {
        throw InvalidInput("logistic scale must be finite");
    }
}

std::pair<std::string, double> decide_with_threshold(const std::vector<LabelScore>& scores, double threshold)
{
    const LabelScore* best = nullptr;
    for (const auto& s : scores) {
        if (s.rule == kDoNothingRule) {
            continue;
        }
        if (best == nullptr || s.score > best->score || (s.score == best->score && s.rule < best->rule)) {
            best = &s;
        }
    }
    if (best == nullptr) {
        return {std::string(kDoNothingRule), 1.0};
    }
    if (best->score >= threshold) {
        return {best->rule, best->score};
    }
    return {std::string(kDoNothingRule), 1.0 - best->score};
}

DisambiguationResult span_match_disambiguate(const CandidateLattice& lattice, SpanScorer& scorer,
                                             const SpanMatcherConfig& config)
{
    const auto& tokens = lattice.sentence.tokens;
    if (tokens.size() != lattice.sets.size()) {
        throw AlignmentError("lattice of sentence '" + lattice.sentence.sentence_id + "' is misaligned");
    }

    std::set<std::string> label_set;
    for (const auto& set : lattice.sets) {
        for (const auto& c : set.candidates) {
            if (c.rule != kDoNothingRule) {
                label_set.insert(c.rule);
            }
        }
    }

    auto default_choice = [&](std::size_t t, double score) {
        const Candidate* c = lattice.sets[t].find_rule(kDoNothingRule);
        const std::string lemma = c != nullptr ? c->lemma : apply_rule(tokens[t].form, TransformationRule{});
        return TokenDecision{std::string(kDoNothingRule), lemma, score};
    };

    DisambiguationResult result;
    if (label_set.empty()) {
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            result.tokens.push_back(default_choice(t, 1.0));
        }
        return result;
    }

    ScoreRequest request;
    request.request_id = lattice.sentence.sentence_id;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        request.tokens.push_back(tokens[t].form);
        request.spans.push_back({t, t});
    }
    request.labels.assign(label_set.begin(), label_set.end());

    ScoreResponse response;
    try {
        response = scorer.score(request);
        validate_response(response, request);
    } catch (const ScorerError&) {
        if (config.fallback_on_scorer_error) {
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                result.tokens.push_back(default_choice(t, 0.0));
            }
            return result;
        }
        rethrow_with_context("sentence '" + lattice.sentence.sentence_id + "' (" + std::to_string(tokens.size()) +
                             " tokens)");
    }

    std::map<std::string_view, std::size_t> column;
    for (std::size_t j = 0; j < request.labels.size(); ++j) {
        column.emplace(request.labels[j], j);
    }
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::vector<LabelScore> scores;
        for (const auto& c : lattice.sets[t].candidates) {
            if (c.rule != kDoNothingRule) {
                scores.push_back({c.rule, response.scores[t][column.at(c.rule)]});
            }
        }
        auto [rule, score] = decide_with_threshold(scores, config.threshold);
        if (rule == kDoNothingRule) {
            result.tokens.push_back(default_choice(t, score));
        } else {
            result.tokens.push_back({rule, lattice.sets[t].find_rule(rule)->lemma, score});
        }
    }
    return result;
}

SpanMatcher::SpanMatcher(std::shared_ptr<SpanScorer> scorer, SpanMatcherConfig config)
    : scorer_(std::move(scorer)), config_(config)
{
    if (!scorer_) {
        throw InvalidInput("span matcher needs a scorer");
    }
    config_.validate();
}

DisambiguationResult SpanMatcher::disambiguate(const CandidateLattice& lattice) const
{
    return span_match_disambiguate(lattice, *scorer_, config_);
}

// --- reference scorer --------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

Embedding reference_embed_span(const std::vector<std::string>& tokens, TokenSpan span, std::size_t dimension,
                               std::size_t window)
{
    if (dimension < 1) {
        throw InvalidInput("embedding dimension must be >= 1");
    }
    if (span.start > span.end || span.end >= tokens.size()) {
        throw InvalidInput("span outside the token range");
    }
    Embedding v(dimension, 0.0);
    for (std::size_t t = span.start; t <= span.end; ++t) {
        std::u32string marked = U"<";
        marked += unicode::fold(unicode::decode(tokens[t]));
        marked += U">";
        add_char_ngrams(v, marked);
    }
    for (std::size_t k = 1; k <= window; ++k) {
        if (span.start >= k) {
            add_feature(v, "n-" + std::to_string(k) + ":" + unicode::fold(tokens[span.start - k]));
        }
        if (span.end + k < tokens.size()) {
            add_feature(v, "n+" + std::to_string(k) + ":" + unicode::fold(tokens[span.end + k]));
        }
    }
    normalize(v);
    return v;
}

std::vector<Embedding> reference_embed_spans(const std::vector<std::string>& tokens, std::size_t dimension,
                                             std::size_t window)
{
    std::vector<Embedding> out;
    out.reserve(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        out.push_back(reference_embed_span(tokens, {t, t}, dimension, window));
    }
    return out;
}

Embedding reference_embed_label(std::string_view label, std::size_t dimension)
{
    if (dimension < 1) {
        throw InvalidInput("embedding dimension must be >= 1");
    }
    Embedding v(dimension, 0.0);
    add_char_ngrams(v, unicode::decode(label));
    std::string words;
    try {
        words = verbalize_rule(parse_rule(label));
    } catch (const Error&) {
        // not a rule string: character n-grams only
    }
    std::size_t start = 0;
    while (start < words.size()) {
        auto end = words.find_first_of(" ;", start);
        if (end == std::string::npos) {
            end = words.size();
        }
        if (end > start) {
            add_feature(v, "w:" + words.substr(start, end - start));
        }
        start = end + 1;
    }
    normalize(v);
    return v;
}

std::vector<Embedding> reference_embed_labels(const std::vector<std::string>& labels, std::size_t dimension)
{
    std::vector<Embedding> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        out.push_back(reference_embed_label(label, dimension));
    }
    return out;
}

double dot(const Embedding& a, const Embedding& b)
{
    if (a.size() != b.size()) {
        throw InvalidInput("dot: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ReferenceScorer::ReferenceScorer(SpanMatcherConfig config) : config_(config) { config_.validate(); }

ScoreResponse ReferenceScorer::score(const ScoreRequest& request)
{
    validate_request(request);
    const auto labels = reference_embed_labels(request.labels, config_.dimension);
    ScoreResponse response;
    response.request_id = request.request_id;
    for (const auto& span : request.spans) {
        const auto v = reference_embed_span(request.tokens, span, config_.dimension, config_.window);
        std::vector<double> row;
        row.reserve(labels.size());
        for (const auto& u : labels) {
            row.push_back(logistic(config_.logistic_scale * dot(v, u)));
        }
        response.scores.push_back(std::move(row));
    }
    return response;
}

}  // namespace lemir
