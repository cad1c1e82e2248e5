#include "eba/error.hpp"
#include "eba/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace eba::report {

using nlohmann::ordered_json;
using enhance::RecordStatus;
using enhance::RunRecord;

namespace {

void require_finite(const ordered_json& j, const std::string& where) {
    if (j.is_number_float() && !std::isfinite(j.get<double>()))
        throw Error(ErrorKind::SerializationError, "non-finite value at " + where);
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) require_finite(it.value(), where + "/" + it.key());
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], where + "/" + std::to_string(i));
    }
}

ordered_json metrics_json(const metrics::MetricSet& m) {
    return {{"ssim", m.ssim}, {"psnr_db", m.psnr_db}, {"uiqm", m.uiqm}, {"uciqe", m.uciqe}, {"fsim", m.fsim}};
}

metrics::MetricSet metrics_from(const ordered_json& j) {
    metrics::MetricSet m;
    m.ssim = j.at("ssim").get<double>();
    m.psnr_db = j.at("psnr_db").get<double>();
    m.uiqm = j.at("uiqm").get<double>();
    m.uciqe = j.at("uciqe").get<double>();
    m.fsim = j.at("fsim").get<double>();
    return m;
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json record_json(const RunRecord& r) {
    return {{"id", r.id},
            {"dataset", r.dataset},
            {"status", r.status == RecordStatus::Ok ? "ok" : "failed"},
            {"error", r.error},
            {"decision", enhance::to_string(r.decision)},
            {"clarity", optional_json(r.clarity)},
            {"cost", {{"units", r.cost.units}, {"full_units", r.cost.full_units}}},
            {"savings", r.savings},
            {"output", r.output_path},
            {"metrics", r.metrics ? metrics_json(*r.metrics) : ordered_json(nullptr)},
            {"uncertainty", optional_json(r.uncertainty)},
            {"flagged", r.flagged}};
}

RunRecord record_from(const ordered_json& j) {
    RunRecord r;
    r.id = j.at("id").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "failed") throw Error(ErrorKind::ParseError, "bad status " + status);
    r.status = status == "ok" ? RecordStatus::Ok : RecordStatus::Failed;
    r.error = j.at("error").get<std::string>();
    const auto decision = j.at("decision").get<std::string>();
    if (decision != "skip" && decision != "enhance") throw Error(ErrorKind::ParseError, "bad decision " + decision);
    r.decision = decision == "skip" ? enhance::Decision::Skip : enhance::Decision::Enhance;
    if (!j.at("clarity").is_null()) r.clarity = j.at("clarity").get<double>();
    r.cost.units = j.at("cost").at("units").get<std::int64_t>();
    r.cost.full_units = j.at("cost").at("full_units").get<std::int64_t>();
    r.savings = j.at("savings").get<double>();
    r.output_path = j.at("output").get<std::string>();
    if (!j.at("metrics").is_null()) r.metrics = metrics_from(j.at("metrics"));
    if (!j.at("uncertainty").is_null()) r.uncertainty = j.at("uncertainty").get<double>();
    r.flagged = j.at("flagged").get<bool>();
    return r;
}

ordered_json means_json(const std::vector<DatasetMeans>& means) {
    ordered_json out = ordered_json::array();
    for (const auto& m : means) {
        ordered_json row = {{"dataset", m.dataset}, {"count", m.count}};
        const ordered_json values = metrics_json(m.means);
        for (auto it = values.begin(); it != values.end(); ++it) row[it.key()] = it.value();
        out.push_back(row);
    }
    return out;
}

ordered_json aggregates_json(const Aggregates& a) {
    return {{"n", a.n},
            {"n_ok", a.n_ok},
            {"n_failed", a.n_failed},
            {"skipped", a.skipped},
            {"enhanced", a.enhanced},
            {"skip_fraction", a.skip_fraction},
            {"image_savings", a.skip_fraction},
            {"tile_units", a.tile_units},
            {"tile_full_units", a.tile_full_units},
            {"tile_unit_savings", a.tile_unit_savings},
            {"means", means_json(a.means)},
            {"enhanced_means", means_json(a.enhanced_means)}};
}

std::vector<DatasetMeans> grouped_means(std::span<const RunRecord> records, bool enhanced_only) {
    std::vector<std::string> order;
    std::vector<std::vector<metrics::MetricSet>> sets;
    for (const auto& r : records) {
        if (r.status != RecordStatus::Ok || !r.metrics) continue;
        if (enhanced_only && r.decision != enhance::Decision::Enhance) continue;
        auto it = std::find(order.begin(), order.end(), r.dataset);
        if (it == order.end()) {
            order.push_back(r.dataset);
            sets.emplace_back();
            it = order.end() - 1;
        }
        sets[static_cast<std::size_t>(it - order.begin())].push_back(*r.metrics);
    }
    std::vector<DatasetMeans> out;
    for (std::size_t i = 0; i < order.size(); ++i)
        out.push_back({order[i], sets[i].size(), metrics::dataset_means(sets[i])});
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Aggregates compute_aggregates(std::span<const RunRecord> records) {
    Aggregates a;
    for (const auto& r : records) {
        ++a.n;
        if (r.status != RecordStatus::Ok) {
            ++a.n_failed;
            continue;
        }
        ++a.n_ok;
        if (r.decision == enhance::Decision::Skip)
            ++a.skipped;
        else
            ++a.enhanced;
        a.tile_units += r.cost.units;
        a.tile_full_units += r.cost.full_units;
    }
    if (a.n_ok > 0) a.skip_fraction = static_cast<double>(a.skipped) / static_cast<double>(a.n_ok);
    if (a.tile_full_units > 0)
        a.tile_unit_savings =
            1.0 - static_cast<double>(a.tile_units) / static_cast<double>(a.tile_full_units);
    a.means = grouped_means(records, false);
    a.enhanced_means = grouped_means(records, true);
    return a;
}

RunReport make_run_report(ordered_json config, std::vector<RunRecord> records) {
    RunReport r;
    r.config = std::move(config);
    r.records = std::move(records);
    r.aggregates = compute_aggregates(r.records);
    return r;
}

std::string run_report_json(const RunReport& report) {
    if (report.records.empty()) throw Error(ErrorKind::EmptyInput, "report has no records");
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["metric_version"] = std::string(metrics::kMetricVersion);
    doc["config"] = report.config;
    auto& recs = doc["records"] = ordered_json::array();
    for (const auto& r : report.records) recs.push_back(record_json(r));
    doc["aggregates"] = aggregates_json(report.aggregates);
    require_finite(doc, "");
    return doc.dump(2) + "\n";
}

RunReport parse_run_report(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    RunReport r;
    try {
        if (doc.at("schema_version").get<int>() != kSchemaVersion)
            throw Error(ErrorKind::ParseError, "unsupported schema_version");
        r.config = doc.at("config");
        for (const auto& j : doc.at("records")) r.records.push_back(record_from(j));
        r.aggregates = compute_aggregates(r.records);
        if (aggregates_json(r.aggregates) != doc.at("aggregates"))
            throw Error(ErrorKind::InconsistentReport, "stored aggregates differ from the records");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    return r;
}

void write_run_report(const RunReport& report, const std::filesystem::path& path) {
    write_text(path, run_report_json(report));
}

RunReport read_run_report(const std::filesystem::path& path) { return parse_run_report(read_text(path)); }

std::string run_csv(std::span<const RunRecord> records) {
    std::ostringstream out;
    out << "id,decision,clarity,depth_units,savings,psnr,ssim,uiqm,uciqe,fsim,uncertainty,flagged\n";
    for (const auto& r : records) {
        const bool ok = r.status == RecordStatus::Ok;
        out << csv_field(r.id) << ',' << (ok ? enhance::to_string(r.decision) : "error") << ','
            << (r.clarity ? fixed6(*r.clarity) : "") << ',' << r.cost.units << ',' << fixed6(r.savings) << ',';
        if (r.metrics) {
            out << fixed6(r.metrics->psnr_db) << ',' << fixed6(r.metrics->ssim) << ',' << fixed6(r.metrics->uiqm) << ','
                << fixed6(r.metrics->uciqe) << ',' << fixed6(r.metrics->fsim) << ',';
        } else {
            out << ",,,,,";
        }
        out << (r.uncertainty ? fixed6(*r.uncertainty) : "") << ',' << (r.flagged ? "true" : "false") << '\n';
    }
    return out.str();
}

void write_csv(std::span<const RunRecord> records, const std::filesystem::path& path) {
    for (const auto& r : records) {
        const bool finite = (!r.clarity || std::isfinite(*r.clarity)) && std::isfinite(r.savings) &&
                            (!r.uncertainty || std::isfinite(*r.uncertainty)) &&
                            (!r.metrics || (std::isfinite(r.metrics->psnr_db) && std::isfinite(r.metrics->ssim) &&
                                            std::isfinite(r.metrics->uiqm) && std::isfinite(r.metrics->uciqe) &&
                                            std::isfinite(r.metrics->fsim)));
        if (!finite) throw Error(ErrorKind::SerializationError, "non-finite value in record " + r.id);
    }
    write_text(path, run_csv(records));
}

std::string render_metric_table(const std::vector<std::pair<std::string, metrics::MetricSet>>& rows) {
    std::ostringstream out;
    out << "| Model | SSIM | PSNR | UIQM | UCIQE | FSIM |\n|---|---|---|---|---|---|\n";
    char buf[160];
    for (const auto& [name, m] : rows) {
        std::snprintf(buf, sizeof buf, " %.3f | %.3f | %.3f | %.3f | %.3f |\n", m.ssim, m.psnr_db, m.uiqm, m.uciqe,
                      m.fsim);
        out << "| " << name << " |" << buf;
    }
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        out.flush();
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot move into place " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace eba::report
