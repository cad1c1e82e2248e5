#pragma once

#include "eba/biasaudit.hpp"
#include "eba/enhance.hpp"
#include "eba/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eba::report {

inline constexpr int kSchemaVersion = 1;

struct DatasetMeans {
    std::string dataset;
    std::size_t count = 0;
    metrics::MetricSet means;

    bool operator==(const DatasetMeans&) const = default;
};

struct Aggregates {
    std::size_t n = 0;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    std::size_t skipped = 0;
    std::size_t enhanced = 0;
    double skip_fraction = 0.0;  // skipped / n_ok
    std::int64_t tile_units = 0;
    std::int64_t tile_full_units = 0;
    double tile_unit_savings = 0.0;
    /// Metric means over every record with metrics (skipped images measured
    /// input vs GT), per dataset in first-appearance order.
    std::vector<DatasetMeans> means;
    /// Same, restricted to enhanced images.
    std::vector<DatasetMeans> enhanced_means;

    bool operator==(const Aggregates&) const = default;
};

Aggregates compute_aggregates(std::span<const enhance::RunRecord> records);

struct RunReport {
    nlohmann::ordered_json config;
    std::vector<enhance::RunRecord> records;
    Aggregates aggregates;
};

RunReport make_run_report(nlohmann::ordered_json config, std::vector<enhance::RunRecord> records);

/// Refuses non-finite numbers with SerializationError.
std::string run_report_json(const RunReport& report);

/// Parses and recomputes the aggregates; a stored value that differs raises
/// InconsistentReport.
RunReport parse_run_report(const std::string& text);

void write_run_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_run_report(const std::filesystem::path& path);

/// Header id,decision,clarity,depth_units,savings,psnr,ssim,uiqm,uciqe,fsim,
/// uncertainty,flagged; six decimals; empty cells for absent values.
std::string run_csv(std::span<const enhance::RunRecord> records);
void write_csv(std::span<const enhance::RunRecord> records, const std::filesystem::path& path);

/// Markdown table of per-model means: Model | SSIM | PSNR | UIQM | UCIQE |
/// FSIM at three decimals.
std::string render_metric_table(const std::vector<std::pair<std::string, metrics::MetricSet>>& rows);

struct AblationRow {
    std::string dataset;
    std::size_t count = 0;
    std::optional<double> psnr_full;
    std::optional<double> ssim_full;
    double savings_full = 0.0;
    std::optional<double> psnr_gated;
    std::optional<double> ssim_gated;
    double savings_gated = 0.0;
    /// 100 * (full - gated) / full.
    std::optional<double> psnr_drop_pct;
};

/// One row per dataset label. Savings is the skipped share of the dataset's
/// successfully processed images. Throws ManifestMismatch.
std::vector<AblationRow> ablation_table(const RunReport& gated, const RunReport& full);

/// Markdown rendering; a reported drop, when given, is printed beside the
/// recomputed one.
std::string render_ablation(const std::vector<AblationRow>& rows, std::optional<double> reported_drop_pct = {});

/// Scatter plot with one color per dataset and a legend. Throws EmptyInput,
/// LengthMismatch.
std::string render_tsne_svg(const bias::TsneLayout& layout, const std::vector<std::string>& labels);
void plot_tsne_svg(const bias::TsneLayout& layout, const std::vector<std::string>& labels,
                   const std::filesystem::path& path);

/// Legend color for a dataset label given its first-appearance index.
std::string dataset_color(const std::string& label, std::size_t index);

std::string bias_report_json(const bias::BiasReport& report, const nlohmann::ordered_json& config);

/// id,x,y,dataset
std::string tsne_csv(const bias::TsneLayout& layout, const std::vector<std::string>& ids,
                     const std::vector<std::string>& labels);

/// Writes `text` to `path` through a temporary file. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Six-decimal fixed rendering used by the CSV outputs.
std::string fixed6(double v);

}  // namespace eba::report
