#pragma once

#include "eba/imgcore.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eba::adaptive {

struct AdaptiveParams {
    int window = 15;        // box-filter side, odd
    double epsilon = 1e-6;
    double alpha = 8.0;
    double beta = 1.0;
    int d_max = 4;
    int tile = 64;
    int overlap = 16;

    /// Throws InvalidParams when an invariant is violated.
    void validate() const;
};

/// Non-negative per-pixel degradation values.
struct DegradationMap : img::Plane {
    using img::Plane::Plane;
};

struct TileRect {
    int y = 0;
    int x = 0;
    int height = 0;
    int width = 0;

    std::int64_t area() const noexcept { return static_cast<std::int64_t>(height) * width; }
    bool operator==(const TileRect&) const = default;
};

struct TilePlan {
    TileRect rect;
    double mean_degradation = 0.0;
    int depth = 0;
};

struct DepthPlan {
    int height = 0;
    int width = 0;
    int tile = 0;
    int d_max = 0;
    int overlap = 0;  // feathering margin used when tiles are enhanced
    std::vector<TilePlan> tiles;  // raster order
};

/// Work accounting: units = sum over tiles of depth * tile pixel count.
struct CostUnits {
    std::int64_t units = 0;
    std::int64_t full_units = 0;
};

/// Local mean of `plane` over a `window` x `window` box with reflect-101
/// borders.
img::Plane box_mean(const img::Plane& plane, int window);

/// M = |L - mean_w(L)| / (mean_w(L) + epsilon). Throws WindowTooLarge when
/// window > 2*min(H,W) - 1 (reflect-101 cannot fold it).
DegradationMap degradation_map(const img::LumaBuf& luma, const AdaptiveParams& params);

/// min(d_max, round_half_up(alpha*m + beta)), clamped below at 0.
int dynamic_depth(double mean_m, const AdaptiveParams& params);

/// Splits an H x W grid into tile x tile cells in raster order; the last row
/// and column may be smaller.
std::vector<TileRect> tile_grid(int height, int width, int tile);

struct PlanResult {
    DepthPlan plan;
    CostUnits cost;
};

PlanResult plan(const img::ImageBuf& image, const AdaptiveParams& params);

/// Plan from an existing degradation map.
PlanResult plan_from_map(const DegradationMap& map, const AdaptiveParams& params);

/// Cost of a plan: sum of depth * area, and d_max * H * W.
CostUnits cost_of(const DepthPlan& plan);

/// 1 - units/full_units. Requires full_units > 0.
double savings_fraction(const CostUnits& cost);

/// Percentage rounded to two decimals without trailing zeros: "18.75%",
/// "12.5%", "100%".
std::string format_percent(double fraction);

/// JSON rendering of a plan (tile rects, mean degradation, depth).
std::string plan_to_json(const DepthPlan& plan);

}  // namespace eba::adaptive
