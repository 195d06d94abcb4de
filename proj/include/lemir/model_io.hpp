#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "lemir/candidates.hpp"
#include "lemir/disambig.hpp"

namespace lemir {

/// A trained lemmatizer as written by `lemir train`: the candidate dictionary
/// plus the counts of one disambiguator. JSON, `{"format":"lemir-model","version":1,...}`.
struct LemmatizerModel {
    static constexpr int kVersion = 1;

    std::string method;  // "freq", "hmm" or "all"
    std::shared_ptr<DictionaryGenerator> dictionary = std::make_shared<DictionaryGenerator>();
    std::shared_ptr<FrequencyModel> frequency;
    std::shared_ptr<HmmModel> hmm;

    nlohmann::json to_json() const;
    static LemmatizerModel from_json(const nlohmann::json& j);

    void save_file(const std::string& path) const;
    static LemmatizerModel load_file(const std::string& path);
};

LemmatizerModel train_lemmatizer(const std::vector<Sentence>& train, const std::string& method,
                                 double alpha = HmmModel::kDefaultAlpha, double beta = HmmModel::kDefaultBeta);

}  // namespace lemir
