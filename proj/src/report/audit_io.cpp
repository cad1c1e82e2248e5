#include "eba/error.hpp"
#include "eba/report.hpp"

#include <cmath>
#include <sstream>

namespace eba::report {

using nlohmann::ordered_json;

std::string bias_report_json(const bias::BiasReport& report, const ordered_json& config) {
    if (report.ids.size() != report.labels.size() || report.ids.size() != report.weights.w.size())
        throw Error(ErrorKind::LengthMismatch, "ids, labels and weights differ in length");
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["config"] = config;
    doc["k"] = report.k;
    doc["seed"] = report.seed;
    doc["entropy_nats"] = report.entropy_nats;
    doc["normalized_entropy"] = report.normalized_entropy;
    doc["cluster_counts"] = report.cluster_counts;
    auto& table = doc["prompt_means"] = ordered_json::array();
    for (const auto& row : report.prompt_means) {
        ordered_json r = {{"dataset", row.dataset}, {"count", row.count}};
        for (std::size_t c = 0; c < embed::kConditionCount; ++c) r[std::string(embed::kConditions[c])] = row.means[c];
        table.push_back(r);
    }
    auto& images = doc["images"] = ordered_json::array();
    for (std::size_t i = 0; i < report.ids.size(); ++i)
        images.push_back({{"id", report.ids[i]}, {"cluster", report.labels[i]}, {"weight", report.weights.w[i]}});

    for (double v : report.weights.w)
        if (!std::isfinite(v)) throw Error(ErrorKind::SerializationError, "non-finite weight");
    if (!std::isfinite(report.entropy_nats) || !std::isfinite(report.normalized_entropy))
        throw Error(ErrorKind::SerializationError, "non-finite entropy");
    return doc.dump(2) + "\n";
}

std::string tsne_csv(const bias::TsneLayout& layout, const std::vector<std::string>& ids,
                     const std::vector<std::string>& labels) {
    if (ids.size() != layout.coords.size() || labels.size() != layout.coords.size())
        throw Error(ErrorKind::LengthMismatch, "ids, labels and coordinates differ in length");
    std::ostringstream out;
    out << "id,x,y,dataset\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << fixed6(layout.coords[i][0]) << ',' << fixed6(layout.coords[i][1]) << ',' << labels[i]
            << '\n';
    return out.str();
}

}  // namespace eba::report
