#include "eba/adaptive.hpp"
#include "eba/error.hpp"

#include <algorithm>
#include <cmath>

namespace eba::adaptive {

void AdaptiveParams::validate() const {
    if (window < 3 || window % 2 == 0) throw Error(ErrorKind::InvalidParams, "window must be odd and >= 3");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidParams, "epsilon must be > 0");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidParams, "alpha/beta must be finite");
    if (d_max < 1) throw Error(ErrorKind::InvalidParams, "d_max must be >= 1");
    if (tile < 1) throw Error(ErrorKind::InvalidParams, "tile must be >= 1");
    if (overlap < 0 || overlap >= tile) throw Error(ErrorKind::InvalidParams, "overlap must satisfy 0 <= overlap < tile");
}

namespace {

// Reflect-101: -1 -> 1, n -> n-2.
int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace

img::Plane box_mean(const img::Plane& plane, int window) {
    const int h = plane.height();
    const int w = plane.width();
    if (window < 1 || window % 2 == 0) throw Error(ErrorKind::InvalidParams, "window must be odd");
    if (window > 2 * std::min(h, w) - 1) {
        throw Error(ErrorKind::WindowTooLarge, "window " + std::to_string(window) + " exceeds 2*min(H,W)-1 for " +
                                                   std::to_string(h) + "x" + std::to_string(w));
    }
    const int r = window / 2;
    const double n = static_cast<double>(window) * window;

    std::vector<int> xs(static_cast<std::size_t>(w + 2 * r));
    for (int i = -r; i < w + r; ++i) xs[static_cast<std::size_t>(i + r)] = reflect101(i, w);

    img::Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Mean expressed as centre + mean deviation, so a flat window
            // yields the centre value exactly.
            const double c = plane.at(y, x);
            double dev = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = reflect101(y + dy, h);
                for (int dx = -r; dx <= r; ++dx) dev += plane.at(yy, xs[static_cast<std::size_t>(x + dx + r)]) - c;
            }
            out.at(y, x) = c + dev / n;
        }
    }
    return out;
}

DegradationMap degradation_map(const img::LumaBuf& luma, const AdaptiveParams& params) {
    params.validate();
    const img::Plane local = box_mean(luma, params.window);
    DegradationMap m(luma.height(), luma.width());
    auto lv = luma.values();
    auto mv = local.values();
    auto out = m.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::abs(lv[i] - mv[i]) / (mv[i] + params.epsilon);
    }
    return m;
}

int dynamic_depth(double mean_m, const AdaptiveParams& params) {
    const double d = std::floor(params.alpha * mean_m + params.beta + 0.5);
    if (!(d > 0.0)) return 0;
    return static_cast<int>(std::min(d, static_cast<double>(params.d_max)));
}

}  // namespace eba::adaptive
