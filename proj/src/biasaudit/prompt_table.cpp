#include "eba/biasaudit.hpp"
#include "eba/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace eba::bias {

std::vector<PromptTableRow> prompt_bias_table(const std::map<std::string, embed::SimilarityProfile>& profiles,
                                              const img::DatasetManifest& manifest) {
    std::vector<PromptTableRow> rows;
    for (const auto& entry : manifest.entries) {
        auto it = profiles.find(entry.id);
        if (it == profiles.end()) throw Error(ErrorKind::MissingProfile, entry.id);
        auto row = std::find_if(rows.begin(), rows.end(),
                                [&](const PromptTableRow& r) { return r.dataset == entry.dataset_label; });
        if (row == rows.end()) {
            rows.push_back(PromptTableRow{entry.dataset_label, 0, {}});
            row = rows.end() - 1;
        }
        for (std::size_t c = 0; c < embed::kConditionCount; ++c) row->means[c] += it->second.scores[c];
        ++row->count;
    }
    for (auto& r : rows)
        for (double& m : r.means) m /= static_cast<double>(r.count);
    return rows;
}

std::string render_prompt_table(const std::vector<PromptTableRow>& rows) {
    std::ostringstream out;
    out << "| Dataset |";
    for (auto title : embed::kConditionTitles) out << ' ' << title << " |";
    out << "\n|---|";
    for (std::size_t c = 0; c < embed::kConditionCount; ++c) out << "---|";
    out << '\n';
    char buf[32];
    for (const auto& r : rows) {
        out << "| " << r.dataset << " |";
        for (double m : r.means) {
            std::snprintf(buf, sizeof buf, " %.3f |", m);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace eba::bias
