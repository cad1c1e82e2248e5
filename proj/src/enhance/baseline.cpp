#include "eba/enhance.hpp"
#include "eba/error.hpp"
#include "eba/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace eba::enhance {

namespace {

struct Region {
    int y0, y1, x0, x1;  // half-open
};

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

// Weight ramps linearly over the overlap margin, except along image borders.
double feather(int pos, int lo, int hi, int extent, int overlap) noexcept {
    int d = std::numeric_limits<int>::max();
    if (lo > 0) d = std::min(d, pos - lo);
    if (hi < extent) d = std::min(d, hi - 1 - pos);
    if (d == std::numeric_limits<int>::max()) return 1.0;
    return std::min(1.0, static_cast<double>(d + 1) / static_cast<double>(overlap + 1));
}

void refine_pass(std::vector<double>& patch, double strength, const BaselineConfig& cfg) {
    const std::size_t n = patch.size() / 3;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = img::luma_of(patch[3 * i], patch[3 * i + 1], patch[3 * i + 2]);
    const double lo = metrics::percentile(y, cfg.percentile_clip);
    const double hi = metrics::percentile(y, 100.0 - cfg.percentile_clip);
    if (hi - lo < 1e-6) return;

    const double sat = 1.0 + cfg.saturation_boost * strength;
    for (std::size_t i = 0; i < n; ++i) {
        const double shift = strength * (clamp01((y[i] - lo) / (hi - lo)) - y[i]);
        std::array<double, 3> rgb{};
        for (std::size_t c = 0; c < 3; ++c) rgb[c] = patch[3 * i + c] + shift;
        const double l = img::luma_of(rgb[0], rgb[1], rgb[2]);
        for (std::size_t c = 0; c < 3; ++c) patch[3 * i + c] = clamp01(l + sat * (rgb[c] - l));
    }
}

}  // namespace

void BaselineConfig::validate() const {
    if (!(base_strength > 0.0 && base_strength <= 1.0))
        throw Error(ErrorKind::InvalidParams, "base_strength must be in (0,1]");
    if (!(saturation_boost >= 0.0)) throw Error(ErrorKind::InvalidParams, "saturation_boost must be >= 0");
    if (!(percentile_clip >= 0.0 && percentile_clip < 50.0))
        throw Error(ErrorKind::InvalidParams, "percentile_clip must be in [0,50)");
}

img::ImageBuf baseline_enhance(const img::ImageBuf& image, const adaptive::DepthPlan& plan, const BaselineConfig& cfg,
                               const std::optional<PassNoise>& noise) {
    cfg.validate();
    const int h = image.height();
    const int w = image.width();
    if (plan.height != h || plan.width != w) {
        throw Error(ErrorKind::PlanMismatch, "plan is " + std::to_string(plan.height) + "x" +
                                                 std::to_string(plan.width) + ", image is " + std::to_string(h) +
                                                 "x" + std::to_string(w));
    }
    std::mt19937_64 gen(noise ? noise->stream : 0);

    // Gray-world white balance.
    const auto src = image.data();
    const std::size_t n = image.pixel_count();
    std::array<double, 3> sums{};
    double luma_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) sums[c] += src[3 * i + c];
        luma_sum += img::luma_of(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
    }
    const double mean_y = luma_sum / static_cast<double>(n);
    std::array<double, 3> gains{1.0, 1.0, 1.0};
    for (std::size_t c = 0; c < 3; ++c) {
        const double mean_c = sums[c] / static_cast<double>(n);
        if (mean_c > 0.0 && mean_y > 0.0) gains[c] = std::clamp(mean_y / mean_c, 0.5, 2.0);
        if (noise) gains[c] *= std::exp(noise->gain_jitter_sigma * rng::normal(gen));
    }
    img::ImageBuf wb(h, w);
    auto base = wb.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) base[3 * i + c] = clamp01(src[3 * i + c] * gains[c]);

    // Dropout mask, drawn in tile raster order then pass order.
    std::vector<std::vector<char>> keep(plan.tiles.size());
    for (std::size_t t = 0; t < plan.tiles.size(); ++t) {
        keep[t].assign(static_cast<std::size_t>(std::max(plan.tiles[t].depth, 0)), 1);
        if (noise) {
            for (auto& k : keep[t]) k = rng::unit(gen) < noise->pass_drop_prob ? 0 : 1;
        }
    }

    const int ov = std::max(plan.overlap, 0);
    std::vector<double> delta(n * 3, 0.0);
    std::vector<double> weight(n, 0.0);
    for (std::size_t t = 0; t < plan.tiles.size(); ++t) {
        const auto& rect = plan.tiles[t].rect;
        const Region r{std::max(rect.y - ov, 0), std::min(rect.y + rect.height + ov, h), std::max(rect.x - ov, 0),
                       std::min(rect.x + rect.width + ov, w)};
        const int rw = r.x1 - r.x0;

        std::vector<double> patch(static_cast<std::size_t>((r.y1 - r.y0) * rw) * 3);
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x)
                for (int c = 0; c < 3; ++c)
                    patch[(static_cast<std::size_t>((y - r.y0) * rw + (x - r.x0))) * 3 + static_cast<std::size_t>(c)] =
                        wb.at(y, x, c);

        bool touched = false;
        for (std::size_t k = 0; k < keep[t].size(); ++k) {
            if (!keep[t][k]) continue;
            refine_pass(patch, cfg.base_strength / std::ldexp(1.0, static_cast<int>(k)), cfg);
            touched = true;
        }

        for (int y = r.y0; y < r.y1; ++y) {
            const double wy = feather(y, r.y0, r.y1, h, ov);
            for (int x = r.x0; x < r.x1; ++x) {
                const double wt = wy * feather(x, r.x0, r.x1, w, ov);
                const std::size_t pix = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                        static_cast<std::size_t>(x);
                weight[pix] += wt;
                if (!touched) continue;
                const std::size_t pi = static_cast<std::size_t>((y - r.y0) * rw + (x - r.x0)) * 3;
                for (std::size_t c = 0; c < 3; ++c) delta[pix * 3 + c] += wt * (patch[pi + c] - base[pix * 3 + c]);
            }
        }
    }

    img::ImageBuf out(h, w);
    auto dst = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = weight[i] > 0.0 ? delta[i * 3 + c] / weight[i] : 0.0;
            dst[3 * i + c] = clamp01(base[3 * i + c] + d);
        }
    }
    return out;
}

BaselineEnhancer::BaselineEnhancer(BaselineConfig cfg) : cfg_(cfg) { cfg_.validate(); }

img::ImageBuf BaselineEnhancer::enhance(std::string_view, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                                        const std::optional<PassNoise>& noise) {
    return baseline_enhance(image, plan, cfg_, noise);
}

}  // namespace eba::enhance
