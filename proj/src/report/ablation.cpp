#include "eba/error.hpp"
#include "eba/report.hpp"

#include <cstdio>
#include <sstream>

namespace eba::report {

using enhance::RecordStatus;

namespace {

struct Tally {
    std::size_t ok = 0;
    std::size_t skipped = 0;
    std::size_t measured = 0;
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
};

std::vector<Tally> tally(const RunReport& report, const std::vector<std::string>& datasets) {
    std::vector<Tally> out(datasets.size());
    for (const auto& r : report.records) {
        if (r.status != RecordStatus::Ok) continue;
        auto& t = out[static_cast<std::size_t>(std::find(datasets.begin(), datasets.end(), r.dataset) -
                                               datasets.begin())];
        ++t.ok;
        if (r.decision == enhance::Decision::Skip) ++t.skipped;
        if (r.metrics) {
            ++t.measured;
            t.psnr_sum += r.metrics->psnr_db;
            t.ssim_sum += r.metrics->ssim;
        }
    }
    return out;
}

std::string cell(const std::optional<double>& v, const char* fmt) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
}

}  // namespace

std::vector<AblationRow> ablation_table(const RunReport& gated, const RunReport& full) {
    if (gated.records.size() != full.records.size())
        throw Error(ErrorKind::ManifestMismatch, "runs cover different numbers of images");
    std::vector<std::string> datasets;
    for (std::size_t i = 0; i < gated.records.size(); ++i) {
        const auto& g = gated.records[i];
        const auto& f = full.records[i];
        if (g.id != f.id || g.dataset != f.dataset)
            throw Error(ErrorKind::ManifestMismatch, "record " + std::to_string(i) + " is " + g.id + " vs " + f.id);
        if (std::find(datasets.begin(), datasets.end(), g.dataset) == datasets.end()) datasets.push_back(g.dataset);
    }

    const auto tg = tally(gated, datasets);
    const auto tf = tally(full, datasets);
    std::vector<AblationRow> rows;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        AblationRow row;
        row.dataset = datasets[d];
        row.count = tg[d].ok;
        if (tf[d].ok > 0) row.savings_full = static_cast<double>(tf[d].skipped) / static_cast<double>(tf[d].ok);
        if (tg[d].ok > 0) row.savings_gated = static_cast<double>(tg[d].skipped) / static_cast<double>(tg[d].ok);
        if (tf[d].measured > 0) {
            row.psnr_full = tf[d].psnr_sum / static_cast<double>(tf[d].measured);
            row.ssim_full = tf[d].ssim_sum / static_cast<double>(tf[d].measured);
        }
        if (tg[d].measured > 0) {
            row.psnr_gated = tg[d].psnr_sum / static_cast<double>(tg[d].measured);
            row.ssim_gated = tg[d].ssim_sum / static_cast<double>(tg[d].measured);
        }
        if (row.psnr_full && row.psnr_gated && *row.psnr_full != 0.0)
            row.psnr_drop_pct = 100.0 * (*row.psnr_full - *row.psnr_gated) / *row.psnr_full;
        rows.push_back(row);
    }
    return rows;
}

std::string render_ablation(const std::vector<AblationRow>& rows, std::optional<double> reported_drop_pct) {
    std::ostringstream out;
    out << "| Dataset | PSNR (without) | SSIM (without) | Savings (without) | PSNR (with) | SSIM (with) | "
           "Savings (with) | PSNR drop |";
    if (reported_drop_pct) out << " PSNR drop (reported) |";
    out << "\n|---|---|---|---|---|---|---|---|";
    if (reported_drop_pct) out << "---|";
    out << '\n';
    for (const auto& r : rows) {
        out << "| " << r.dataset << " | " << cell(r.psnr_full, "%.2f") << " | " << cell(r.ssim_full, "%.3f") << " | "
            << adaptive::format_percent(r.savings_full) << " | " << cell(r.psnr_gated, "%.2f") << " | "
            << cell(r.ssim_gated, "%.3f") << " | " << adaptive::format_percent(r.savings_gated) << " | "
            << cell(r.psnr_drop_pct, "%.2f%%") << " |";
        if (reported_drop_pct) out << ' ' << cell(reported_drop_pct, "%.2f%%") << " |";
        out << '\n';
    }
    return out.str();
}

}  // namespace eba::report
