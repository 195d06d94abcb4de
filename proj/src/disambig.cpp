#include "lemir/disambig.hpp"

#include <cmath>
#include <limits>

#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

namespace {

const Candidate& do_nothing_of(const CandidateSet& set)
{
    const Candidate* c = set.find_rule(kDoNothingRule);
    if (c == nullptr) {
        throw InvalidInput("candidate set of token " + std::to_string(set.token_index) + " lacks the do-nothing rule");
    }
    return *c;
}

std::vector<std::u32string> suffixes_longest_first(const std::string& form, std::size_t max_len)
{
    const auto key = unicode::fold(unicode::decode(form));
    std::vector<std::u32string> out;
    for (std::size_t len = std::min(max_len, key.size()); len >= 1; --len) {
        out.push_back(key.substr(key.size() - len));
    }
    return out;
}

nlohmann::json counts_to_json(const std::map<std::string, RuleCounts>& table)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, counts] : table) {
        j[key] = counts;
    }
    return j;
}

}  // namespace

// --- oracle ------------------------------------------------------------------

DisambiguationResult oracle_disambiguate(const CandidateLattice& lattice, const Sentence& gold)
{
    if (gold.tokens.size() != lattice.sets.size()) {
        throw AlignmentError("oracle: sentence '" + gold.sentence_id + "' has " + std::to_string(gold.tokens.size()) +
                             " gold tokens but the lattice has " + std::to_string(lattice.sets.size()));
    }
    DisambiguationResult result;
    for (std::size_t i = 0; i < lattice.sets.size(); ++i) {
        const auto& set = lattice.sets[i];
        const auto& lemma = gold.tokens[i].lemma;
        const Candidate* hit = nullptr;
        if (lemma) {
            for (const auto& c : set.candidates) {
                if (c.lemma == *lemma) {
                    hit = &c;
                    break;
                }
            }
        }
        if (hit != nullptr) {
            result.tokens.push_back({hit->rule, hit->lemma, 1.0});
        } else {
            const auto& fallback = do_nothing_of(set);
            result.tokens.push_back({fallback.rule, fallback.lemma, 0.0});
        }
    }
    return result;
}

// --- frequency baseline ------------------------------------------------------

void FrequencyModel::add(const std::string& form, const std::string& rule)
{
    ++form_counts_[unicode::fold(form)][rule];
    for (const auto& suffix : suffixes_longest_first(form, kMaxSuffix)) {
        ++suffix_counts_[unicode::encode(suffix)][rule];
    }
    ++global_counts_[rule];
}

TokenDecision FrequencyModel::choose(const std::string& form, const CandidateSet& set) const
{
    auto pick = [&](const RuleCounts& counts, TokenDecision& out) {
        const Candidate* best = nullptr;
        std::size_t best_count = 0;
        std::size_t total = 0;
        for (const auto& c : set.candidates) {  // ascending rule order
            auto it = counts.find(c.rule);
            const std::size_t n = it == counts.end() ? 0 : it->second;
            total += n;
            if (n > best_count) {
                best = &c;
                best_count = n;
            }
        }
        if (best == nullptr) {
            return false;
        }
        out = {best->rule, best->lemma, static_cast<double>(best_count) / static_cast<double>(total)};
        return true;
    };

    TokenDecision decision;
    if (auto it = form_counts_.find(unicode::fold(form)); it != form_counts_.end() && pick(it->second, decision)) {
        return decision;
    }
    for (const auto& suffix : suffixes_longest_first(form, kMaxSuffix)) {
        if (auto it = suffix_counts_.find(unicode::encode(suffix));
            it != suffix_counts_.end() && pick(it->second, decision)) {
            return decision;
        }
    }
    if (pick(global_counts_, decision)) {
        return decision;
    }
    const auto& first = set.candidates.front();
    return {first.rule, first.lemma, 0.0};
}

DisambiguationResult FrequencyModel::disambiguate(const CandidateLattice& lattice) const
{
    DisambiguationResult result;
    for (std::size_t i = 0; i < lattice.sets.size(); ++i) {
        result.tokens.push_back(choose(lattice.sentence.tokens.at(i).form, lattice.sets[i]));
    }
    return result;
}

nlohmann::json FrequencyModel::to_json() const
{
    return {{"forms", counts_to_json(form_counts_)},
            {"suffixes", counts_to_json(suffix_counts_)},
            {"global", global_counts_}};
}

FrequencyModel FrequencyModel::from_json(const nlohmann::json& j)
{
    FrequencyModel model;
    try {
        j.at("forms").get_to(model.form_counts_);
        j.at("suffixes").get_to(model.suffix_counts_);
        j.at("global").get_to(model.global_counts_);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad frequency model dump: ") + e.what());
    }
    return model;
}

FrequencyModel train_frequency(const std::vector<Sentence>& gold)
{
    FrequencyModel model;
    for (const auto& sentence : gold) {
        for (const auto& token : sentence.tokens) {
            if (token.lemma && !token.lemma->empty()) {
                model.add(token.form, extract_rule_string(token.form, *token.lemma));
            }
        }
    }
    return model;
}

DisambiguationResult freq_disambiguate(const FrequencyModel& model, const CandidateLattice& lattice)
{
    return model.disambiguate(lattice);
}

// --- bigram HMM --------------------------------------------------------------

HmmModel::HmmModel(double alpha, double beta) : alpha_(alpha), beta_(beta)
{
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw InvalidInput("HMM smoothing constants must be positive and finite");
    }
}

void HmmModel::add_transition(const std::string& prev, const std::string& rule, std::size_t count)
{
    transitions_[prev][rule] += count;
    transition_totals_[prev] += count;
    rules_[rule] += 0;
}

void HmmModel::add_emission(const std::string& form, const std::string& rule, std::size_t count)
{
    const std::string key = unicode::fold(form);
    emissions_[rule][key] += count;
    emission_totals_[rule] += count;
    rules_[rule] += count;
    forms_[key] += count;
}

void HmmModel::add_sequence(const std::vector<std::string>& forms, const std::vector<std::string>& rules)
{
    if (forms.size() != rules.size()) {
        throw AlignmentError("add_sequence: forms and rules differ in length");
    }
    std::string prev(kBos);
    for (std::size_t i = 0; i < forms.size(); ++i) {
        add_transition(prev, rules[i]);
        add_emission(forms[i], rules[i]);
        prev = rules[i];
    }
}

double HmmModel::log_transition(std::string_view prev, std::string_view rule) const
{
    double count = 0.0;
    double total = 0.0;
    if (auto row = transitions_.find(prev); row != transitions_.end()) {
        if (auto cell = row->second.find(std::string(rule)); cell != row->second.end()) {
            count = static_cast<double>(cell->second);
        }
        total = static_cast<double>(transition_totals_.find(prev)->second);
    }
    const double states = static_cast<double>(std::max<std::size_t>(rules_.size(), 1));
    return std::log((count + alpha_) / (total + alpha_ * states));
}

double HmmModel::log_emission(std::string_view form, std::string_view rule) const
{
    const std::string key = unicode::fold(form);
    double count = 0.0;
    double total = 0.0;
    if (auto row = emissions_.find(rule); row != emissions_.end()) {
        if (auto cell = row->second.find(key); cell != row->second.end()) {
            count = static_cast<double>(cell->second);
        }
        total = static_cast<double>(emission_totals_.find(rule)->second);
    }
    const double vocab = static_cast<double>(forms_.size()) + 1.0;
    return std::log((count + beta_) / (total + beta_ * vocab));
}

DisambiguationResult HmmModel::disambiguate(const CandidateLattice& lattice) const
{
    const std::size_t n = lattice.sets.size();
    DisambiguationResult result;
    if (n == 0) {
        return result;
    }

    // delta[t][j]: best log-probability of a path ending in candidate j of token t.
    std::vector<std::vector<double>> delta(n);
    std::vector<std::vector<std::size_t>> back(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& cands = lattice.sets[t].candidates;
        if (cands.empty()) {
            throw InvalidInput("empty candidate set at token " + std::to_string(t));
        }
        const auto& form = lattice.sentence.tokens.at(t).form;
        delta[t].assign(cands.size(), -std::numeric_limits<double>::infinity());
        back[t].assign(cands.size(), 0);
        for (std::size_t j = 0; j < cands.size(); ++j) {
            const double emit = log_emission(form, cands[j].rule);
            if (t == 0) {
                delta[t][j] = log_transition(kBos, cands[j].rule) + emit;
                continue;
            }
            const auto& prev = lattice.sets[t - 1].candidates;
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const double v = delta[t - 1][i] + log_transition(prev[i].rule, cands[j].rule);
                if (v > best + HmmModel::kTieEpsilon) {
                    best = v;
                    arg = i;
                }
            }
            delta[t][j] = best + emit;
            back[t][j] = arg;
        }
    }

    std::size_t state = 0;
    for (std::size_t j = 1; j < delta[n - 1].size(); ++j) {
        if (delta[n - 1][j] > delta[n - 1][state] + HmmModel::kTieEpsilon) {
            state = j;
        }
    }
    const double path_score = delta[n - 1][state];

    result.tokens.resize(n);
    for (std::size_t t = n; t-- > 0;) {
        const auto& c = lattice.sets[t].candidates[state];
        result.tokens[t] = {c.rule, c.lemma, path_score};
        state = back[t][state];
    }
    result.sequence_score = path_score;
    return result;
}

nlohmann::json HmmModel::to_json() const
{
    nlohmann::json transitions = nlohmann::json::object();
    for (const auto& [prev, row] : transitions_) {
        transitions[prev] = row;
    }
    nlohmann::json emissions = nlohmann::json::object();
    for (const auto& [rule, row] : emissions_) {
        nlohmann::json r = nlohmann::json::object();
        for (const auto& [form, count] : row) {
            r[form] = count;
        }
        emissions[rule] = r;
    }
    return {{"alpha", alpha_}, {"beta", beta_}, {"transitions", transitions}, {"emissions", emissions}};
}

HmmModel HmmModel::from_json(const nlohmann::json& j)
{
    try {
        HmmModel model(j.at("alpha").get<double>(), j.at("beta").get<double>());
        for (const auto& [prev, row] : j.at("transitions").items()) {
            for (const auto& [rule, count] : row.items()) {
                model.add_transition(prev, rule, count.get<std::size_t>());
            }
        }
        for (const auto& [rule, row] : j.at("emissions").items()) {
            for (const auto& [form, count] : row.items()) {
                model.add_emission(form, rule, count.get<std::size_t>());
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad HMM model dump: ") + e.what());
    }
}

HmmModel train_hmm(const std::vector<Sentence>& gold, double alpha, double beta)
{
    HmmModel model(alpha, beta);
    for (const auto& sentence : gold) {
        std::vector<std::string> forms;
        std::vector<std::string> rules;
        auto flush = [&] {
            model.add_sequence(forms, rules);
            forms.clear();
            rules.clear();
        };
        for (const auto& token : sentence.tokens) {
            if (!token.lemma || token.lemma->empty()) {
                flush();  // a gap in the gold annotation restarts the chain
                continue;
            }
            forms.push_back(token.form);
            rules.push_back(extract_rule_string(token.form, *token.lemma));
        }
        flush();
    }
    return model;
}

DisambiguationResult hmm_disambiguate(const HmmModel& model, const CandidateLattice& lattice)
{
    return model.disambiguate(lattice);
}

}  // namespace lemir
