#pragma once

#include "eba/adaptive.hpp"
#include "eba/imgcore.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace eba::enhance {
class Enhancer;
}

namespace eba::uncertainty {

struct StochasticConfig {
    int passes = 20;
    double gain_jitter_sigma = 0.02;
    double pass_drop_prob = 0.1;
    std::uint64_t seed = 42;

    /// Throws InvalidParams.
    void validate() const;
};

/// Perturbation for one stochastic pass: white-balance gains are multiplied
/// by exp(N(0, sigma^2)) and each refinement pass is dropped with
/// probability drop_prob, all drawn from `stream`.
struct PassNoise {
    double gain_jitter_sigma = 0.0;
    double pass_drop_prob = 0.0;
    std::uint64_t stream = 0;
};

/// Noise for pass t of cfg.
PassNoise pass_noise(const StochasticConfig& cfg, int t);

struct VarianceResult {
    img::ImageBuf mean_image;
    img::Plane variance_map;  // channel-averaged population variance
    double scalar = 0.0;      // mean of variance_map
    bool flagged = false;
};

inline constexpr double kDefaultReviewThreshold = 1e-3;

/// Pixel-wise mean and population variance over `passes`. Each pixel's
/// samples are summed in sorted order, so the result does not depend on the
/// order of the passes. Throws EmptyInput, DimensionMismatch.
VarianceResult variance_from_passes(std::span<const img::ImageBuf> passes,
                                    double review_threshold = kDefaultReviewThreshold);

/// Runs `enhancer` cfg.passes times with pass_noise(cfg, t).
VarianceResult mc_variance(std::string_view id, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                           enhance::Enhancer& enhancer, const StochasticConfig& cfg,
                           double review_threshold = kDefaultReviewThreshold);

/// scalar > review_threshold.
bool flag(double scalar, double review_threshold = kDefaultReviewThreshold) noexcept;

/// Variance values are at most 0.25 for data in [0,1]; this maps that range
/// onto 16 bits.
inline constexpr double kVariancePngScale = 65535.0 / 0.25;

/// "EBAV", u32 H, u32 W, H*W float32, little-endian.
void write_ebav(const img::Plane& map, const std::filesystem::path& path);
img::Plane read_ebav(const std::filesystem::path& path);

}  // namespace eba::uncertainty
