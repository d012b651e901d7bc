#include "nasp/prediction.hpp"

#include <fstream>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

using json = nlohmann::json;

namespace {
constexpr int kPredictionsVersion = 1;
}

void save_predictions(const std::filesystem::path& path, const PredictionBatch& batch) {
    json j;
    j["format"] = "nasp-predictions";
    j["version"] = kPredictionsVersion;
    j["labels"] = batch.vocab.labels();
    j["thresholds"] = batch.thresholds;
    j["docs"] = json::array();
    for (std::size_t i = 0; i < batch.num_docs(); ++i) {
        json doc;
        doc["id"] = batch.doc_ids.at(i);
        auto p = batch.probs.row(i);
        doc["probs"] = std::vector<double>(p.begin(), p.end());
        auto d = batch.decisions.row(i);
        doc["decisions"] = std::vector<int>(d.begin(), d.end());
        j["docs"].push_back(std::move(doc));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write predictions " + path.string());
    out << j.dump() << '\n';
}

PredictionBatch load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open predictions " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid predictions file: ") + e.what());
    }
    if (j.value("format", "") != "nasp-predictions" || j.value("version", 0) != kPredictionsVersion) {
        throw ParseError("unsupported predictions file " + path.string());
    }
    PredictionBatch batch;
    batch.vocab = LabelVocab(j.at("labels").get<std::vector<std::string>>());
    if (batch.vocab.labels() != j.at("labels").get<std::vector<std::string>>()) {
        throw ParseError("prediction labels must be sorted and unique");
    }
    batch.thresholds = j.at("thresholds").get<std::vector<double>>();
    const auto& docs = j.at("docs");
    const std::size_t m = batch.vocab.size();
    batch.probs = RealMatrix(docs.size(), m);
    batch.decisions = BinaryMatrix(docs.size(), m);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        batch.doc_ids.push_back(docs[i].at("id").get<std::string>());
        auto p = docs[i].at("probs").get<std::vector<double>>();
        auto d = docs[i].at("decisions").get<std::vector<int>>();
        if (p.size() != m || d.size() != m) {
            throw DimensionError("document " + batch.doc_ids.back() + " does not have " + std::to_string(m) + " labels");
        }
        for (std::size_t k = 0; k < m; ++k) {
            batch.probs(i, k) = p[k];
            batch.decisions(i, k) = d[k] ? 1 : 0;
        }
    }
    return batch;
}

}  // namespace nasp
