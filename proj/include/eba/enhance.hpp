#pragma once

#include "eba/adaptive.hpp"
#include "eba/embed.hpp"
#include "eba/imgcore.hpp"
#include "eba/metrics.hpp"
#include "eba/uncertainty.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eba::enhance {

using uncertainty::PassNoise;
using uncertainty::StochasticConfig;

class Enhancer {
public:
    virtual ~Enhancer() = default;

    /// Output values are in [0,1]. Without noise the result is a pure
    /// function of the arguments.
    virtual img::ImageBuf enhance(std::string_view id, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                                  const std::optional<PassNoise>& noise) = 0;
    /// Whether PassNoise changes the output.
    virtual bool stochastic() const = 0;
    virtual std::string name() const = 0;
};

struct BaselineConfig {
    double base_strength = 0.5;
    double saturation_boost = 0.1;
    double percentile_clip = 1.0;

    /// Throws InvalidParams.
    void validate() const;
};

/// Gray-world white balance on the whole image, then per tile `depth`
/// refinement passes of luma percentile stretching and saturation boost at
/// strength base/2^(k-1). Tiles are expanded by the overlap and feathered
/// together. Throws PlanMismatch.
img::ImageBuf baseline_enhance(const img::ImageBuf& image, const adaptive::DepthPlan& plan, const BaselineConfig& cfg,
                               const std::optional<PassNoise>& noise = std::nullopt);

class BaselineEnhancer final : public Enhancer {
public:
    explicit BaselineEnhancer(BaselineConfig cfg = {});

    img::ImageBuf enhance(std::string_view id, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                          const std::optional<PassNoise>& noise) override;
    bool stochastic() const override { return true; }
    std::string name() const override { return "baseline"; }

    const BaselineConfig& config() const noexcept { return cfg_; }

private:
    BaselineConfig cfg_;
};

/// Loads `dir/<id>.png` or `dir/<id>.jpg`. Throws MissingResult.
img::ImageBuf external_enhance(const std::filesystem::path& dir, std::string_view id);

/// Path of the stored result for `id`, or nullopt.
std::optional<std::filesystem::path> find_result(const std::filesystem::path& dir, std::string_view id);

/// Serves pre-computed results; plan and noise are ignored.
class ExternalEnhancer final : public Enhancer {
public:
    explicit ExternalEnhancer(std::filesystem::path dir) : dir_(std::move(dir)) {}

    img::ImageBuf enhance(std::string_view id, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                          const std::optional<PassNoise>& noise) override;
    bool stochastic() const override { return false; }
    std::string name() const override { return "external:" + dir_.string(); }

private:
    std::filesystem::path dir_;
};

enum class Decision { Skip, Enhance };

std::string_view to_string(Decision d) noexcept;

struct GateDecision {
    Decision decision = Decision::Enhance;
    double score = 0.0;
    double threshold = 0.0;
};

/// Skip iff score > threshold.
GateDecision gate(double score, double threshold) noexcept;

/// (1 - target_skip_rate)-quantile of scores with linear interpolation; a
/// target of 1 returns a value just below the minimum. Throws EmptyScores,
/// InvalidParams.
double calibrate_threshold(std::span<const double> scores, double target_skip_rate);

enum class ProviderErrorPolicy { Abort, SkipGating };

enum class RecordStatus { Ok, Failed };

struct RunRecord {
    std::string id;
    std::string dataset;
    RecordStatus status = RecordStatus::Ok;
    std::string error;
    Decision decision = Decision::Enhance;
    std::optional<double> clarity;
    adaptive::CostUnits cost;
    /// 1 - units/full_units for this image (1 when skipped).
    double savings = 0.0;
    std::string output_path;  // relative to the output directory
    std::optional<metrics::MetricSet> metrics;
    std::optional<double> uncertainty;
    bool flagged = false;
};

struct PipelineOptions {
    /// Exactly one of threshold and target_skip is set.
    std::optional<double> threshold;
    std::optional<double> target_skip;
    adaptive::AdaptiveParams params;
    unsigned workers = 1;
    std::uint64_t seed = 42;
    bool uncertainty = true;
    StochasticConfig stochastic;
    double review_threshold = uncertainty::kDefaultReviewThreshold;
    ProviderErrorPolicy on_provider_error = ProviderErrorPolicy::Abort;
    std::string prompt_prefix{embed::kDefaultPromptPrefix};
    /// Outputs go under out_dir/{enhanced,skipped,uncertainty}; empty writes
    /// nothing.
    std::filesystem::path out_dir;
};

struct RunResult {
    std::vector<RunRecord> records;  // manifest order
    double threshold = 0.0;          // threshold actually applied
    bool gating_disabled = false;    // provider failed under SkipGating
    std::string provider_error;
};

/// Embed, score and gate every image, then plan and enhance the ones not
/// skipped. Per-image decode and metric failures are recorded; provider
/// failures abort unless the policy is SkipGating. Throws EmptyInput,
/// InvalidParams, ProviderUnavailable.
RunResult run_pipeline(const img::DatasetManifest& manifest, embed::EmbeddingProvider& provider, Enhancer& enhancer,
                       const PipelineOptions& opts);

}  // namespace eba::enhance
