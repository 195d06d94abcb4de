#include "lemir/model_io.hpp"

#include <fstream>

#include "lemir/errors.hpp"

namespace lemir {

nlohmann::json LemmatizerModel::to_json() const
{
    nlohmann::json j = {{"format", "lemir-model"},
                        {"version", kVersion},
                        {"method", method},
                        {"dictionary", dictionary->to_json()}};
    if (frequency) {
        j["frequency"] = frequency->to_json();
    }
    if (hmm) {
        j["hmm"] = hmm->to_json();
    }
    return j;
}

LemmatizerModel LemmatizerModel::from_json(const nlohmann::json& j)
{
    if (!j.is_object() || j.value("format", "") != "lemir-model") {
        throw ParseError("not a lemir model file");
    }
    if (j.value("version", -1) != kVersion) {
        throw ParseError("unsupported model version " + j.value("version", nlohmann::json()).dump());
    }
    LemmatizerModel model;
    model.method = j.value("method", "");
    model.dictionary = std::make_shared<DictionaryGenerator>(DictionaryGenerator::from_json(j.at("dictionary")));
    if (j.contains("frequency")) {
        model.frequency = std::make_shared<FrequencyModel>(FrequencyModel::from_json(j["frequency"]));
    }
    if (j.contains("hmm")) {
        model.hmm = std::make_shared<HmmModel>(HmmModel::from_json(j["hmm"]));
    }
    const bool needs_freq = model.method == "freq" || model.method == "all";
    const bool needs_hmm = model.method == "hmm" || model.method == "all";
    if ((needs_freq && !model.frequency) || (needs_hmm && !model.hmm)) {
        throw ParseError("model file lacks the counts for method '" + model.method + "'");
    }
    return model;
}

void LemmatizerModel::save_file(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write '" + path + "'");
    }
    out << to_json().dump() << '\n';
}

LemmatizerModel LemmatizerModel::load_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open '" + path + "'");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file '" + path + "': " + e.what());
    }
    return from_json(j);
}

LemmatizerModel train_lemmatizer(const std::vector<Sentence>& train, const std::string& method, double alpha,
                                 double beta)
{
    LemmatizerModel model;
    model.method = method;
    *model.dictionary = build_dictionary_generator(train);
    if (method != "freq" && method != "hmm" && method != "all") {
        throw InvalidInput("unknown training method '" + method + "' (freq, hmm, all)");
    }
    if (method == "freq" || method == "all") {
        model.frequency = std::make_shared<FrequencyModel>(train_frequency(train));
    }
    if (method == "hmm" || method == "all") {
        model.hmm = std::make_shared<HmmModel>(train_hmm(train, alpha, beta));
    }
    return model;
}

}  // namespace lemir
