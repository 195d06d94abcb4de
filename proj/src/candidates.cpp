#include "lemir/candidates.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"
#include "lemir/parallel.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

const Candidate* CandidateSet::find_rule(std::string_view rule) const
{
    for (const auto& c : candidates) {
        if (c.rule == rule) {
            return &c;
        }
    }
    return nullptr;
}

bool CandidateSet::has_lemma(std::string_view lemma) const
{
    return std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.lemma == lemma; });
}

CandidateSet make_candidate_set(std::size_t token_index, const std::string& form,
                                const std::vector<std::string>& lemmas)
{
    CandidateSet set;
    set.token_index = token_index;
    set.candidates.push_back({apply_rule(form, TransformationRule{}), std::string(kDoNothingRule)});
    for (const auto& lemma : lemmas) {
        std::string rule;
        try {
            rule = extract_rule_string(form, lemma);
        } catch (const InvalidInput&) {
            continue;
        }
        if (set.find_rule(rule) == nullptr) {
            set.candidates.push_back({lemma, std::move(rule)});
        }
    }
    std::sort(set.candidates.begin(), set.candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.rule < b.rule; });
    return set;
}

void DictionaryGenerator::add(const std::string& form, const std::string& lemma)
{
    const std::string rule = extract_rule_string(form, lemma);
    const auto key = unicode::fold(unicode::decode(form));
    form_map_[unicode::encode(key)].insert(lemma);
    const std::size_t max_len = std::min(kMaxSuffix, key.size());
    for (std::size_t len = 1; len <= max_len; ++len) {
        ++suffix_map_[unicode::encode(std::u32string_view(key).substr(key.size() - len))][rule];
    }
}

std::vector<std::string> DictionaryGenerator::lemmas_for(const std::string& form) const
{
    auto it = form_map_.find(unicode::fold(form));
    if (it == form_map_.end()) {
        return {};
    }
    return {it->second.begin(), it->second.end()};
}

CandidateSet DictionaryGenerator::candidates_for(std::size_t token_index, const std::string& form) const
{
    const auto key = unicode::fold(unicode::decode(form));
    if (auto it = form_map_.find(unicode::encode(key)); it != form_map_.end()) {
        return make_candidate_set(token_index, form, {it->second.begin(), it->second.end()});
    }

    std::vector<std::string> guesses;
    for (std::size_t len = std::min(kMaxSuffix, key.size()); len >= 1; --len) {
        auto it = suffix_map_.find(unicode::encode(std::u32string_view(key).substr(key.size() - len)));
        if (it == suffix_map_.end() || it->second.empty()) {
            continue;
        }
        for (const auto& [rule, count] : it->second) {
            try {
                guesses.push_back(apply_rule_string(form, rule));
            } catch (const RuleIncompatible&) {
            }
        }
        break;
    }
    return make_candidate_set(token_index, form, guesses);
}

nlohmann::json DictionaryGenerator::to_json() const
{
    nlohmann::json forms = nlohmann::json::object();
    for (const auto& [form, lemmas] : form_map_) {
        forms[form] = std::vector<std::string>(lemmas.begin(), lemmas.end());
    }
    nlohmann::json suffixes = nlohmann::json::object();
    for (const auto& [suffix, rules] : suffix_map_) {
        suffixes[suffix] = rules;
    }
    return {{"forms", forms}, {"suffixes", suffixes}};
}

DictionaryGenerator DictionaryGenerator::from_json(const nlohmann::json& j)
{
    DictionaryGenerator gen;
    try {
        for (const auto& [form, lemmas] : j.at("forms").items()) {
            for (const auto& lemma : lemmas) {
                gen.form_map_[form].insert(lemma.get<std::string>());
            }
        }
        for (const auto& [suffix, rules] : j.at("suffixes").items()) {
            for (const auto& [rule, count] : rules.items()) {
                parse_rule(rule);
                gen.suffix_map_[suffix][rule] = count.get<std::size_t>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad dictionary dump: ") + e.what());
    }
    return gen;
}

DictionaryGenerator build_dictionary_generator(const std::vector<Sentence>& train)
{
    DictionaryGenerator gen;
    for (const auto& sentence : train) {
        for (const auto& token : sentence.tokens) {
            if (token.lemma && !token.lemma->empty()) {
                gen.add(token.form, *token.lemma);
            }
        }
    }
    return gen;
}

CandidateLattice generate_candidates(const DictionaryGenerator& gen, const Sentence& sentence)
{
    CandidateLattice lattice;
    lattice.sentence = sentence;
    lattice.sets.reserve(sentence.tokens.size());
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
        lattice.sets.push_back(gen.candidates_for(i, sentence.tokens[i].form));
    }
    return lattice;
}

std::vector<CandidateLattice> generate_candidates(const DictionaryGenerator& gen,
                                                  const std::vector<Sentence>& sentences, unsigned jobs)
{
    std::vector<CandidateLattice> out(sentences.size());
    parallel_for(sentences.size(), jobs, [&](std::size_t i) { out[i] = generate_candidates(gen, sentences[i]); });
    return out;
}

std::vector<CandidateLattice> import_candidates(std::istream& in, const std::vector<Sentence>* gold)
{
    std::vector<CandidateLattice> lattices;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        CandidateLattice lattice;
        try {
            const auto obj = nlohmann::json::parse(line);
            lattice.sentence.sentence_id = obj.at("sentence_id").get<std::string>();
            for (const auto& tok : obj.at("tokens")) {
                Token token;
                token.form = tok.at("form").get<std::string>();
                if (token.form.empty()) {
                    throw ParseError("empty form", line_no);
                }
                const auto lemmas = tok.at("lemmas").get<std::vector<std::string>>();
                lattice.sets.push_back(make_candidate_set(lattice.sentence.tokens.size(), token.form, lemmas));
                lattice.sentence.tokens.push_back(std::move(token));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad candidate record: ") + e.what(), line_no);
        } catch (const InvalidInput& e) {
            throw ParseError(e.what(), line_no);
        }

        if (gold != nullptr) {
            const std::size_t idx = lattices.size();
            if (idx >= gold->size()) {
                throw AlignmentError("candidate file has more sentences than the treebank (line " +
                                     std::to_string(line_no) + ")");
            }
            const auto& ref = (*gold)[idx];
            if (ref.tokens.size() != lattice.sentence.tokens.size()) {
                throw AlignmentError("sentence '" + lattice.sentence.sentence_id + "' has " +
                                     std::to_string(lattice.sentence.tokens.size()) + " tokens, treebank sentence '" +
                                     ref.sentence_id + "' has " + std::to_string(ref.tokens.size()));
            }
            for (std::size_t i = 0; i < ref.tokens.size(); ++i) {
                lattice.sentence.tokens[i].lemma = ref.tokens[i].lemma;
            }
        }
        lattices.push_back(std::move(lattice));
    }
    if (gold != nullptr && lattices.size() != gold->size()) {
        throw AlignmentError("candidate file has " + std::to_string(lattices.size()) + " sentences, treebank has " +
                             std::to_string(gold->size()));
    }
    return lattices;
}

std::vector<CandidateLattice> import_candidates_file(const std::string& path, const std::vector<Sentence>* gold)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    return import_candidates(in, gold);
}

double oracle_accuracy(const std::vector<CandidateLattice>& lattices, const std::vector<Sentence>& gold)
{
    if (lattices.size() != gold.size()) {
        throw AlignmentError("oracle_accuracy: " + std::to_string(lattices.size()) + " lattices vs " +
                             std::to_string(gold.size()) + " gold sentences");
    }
    std::size_t covered = 0;
    std::size_t total = 0;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        const auto& tokens = gold[s].tokens;
        if (tokens.size() != lattices[s].sets.size()) {
            throw AlignmentError("sentence '" + gold[s].sentence_id + "': token count mismatch");
        }
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].lemma) {
                continue;
            }
            ++total;
            covered += lattices[s].sets[i].has_lemma(*tokens[i].lemma) ? 1 : 0;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

}  // namespace lemir
