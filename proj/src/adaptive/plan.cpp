#include "eba/adaptive.hpp"
#include "eba/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace eba::adaptive {

std::vector<TileRect> tile_grid(int height, int width, int tile) {
    if (tile < 1) throw Error(ErrorKind::InvalidParams, "tile must be >= 1");
    std::vector<TileRect> rects;
    for (int y = 0; y < height; y += tile) {
        for (int x = 0; x < width; x += tile) {
            rects.push_back({y, x, std::min(tile, height - y), std::min(tile, width - x)});
        }
    }
    return rects;
}

CostUnits cost_of(const DepthPlan& plan) {
    CostUnits c;
    for (const auto& t : plan.tiles) c.units += static_cast<std::int64_t>(t.depth) * t.rect.area();
    c.full_units = static_cast<std::int64_t>(plan.d_max) * plan.height * plan.width;
    return c;
}

PlanResult plan_from_map(const DegradationMap& map, const AdaptiveParams& params) {
    params.validate();
    PlanResult r;
    r.plan.height = map.height();
    r.plan.width = map.width();
    r.plan.tile = params.tile;
    r.plan.d_max = params.d_max;
    r.plan.overlap = params.overlap;
    for (const TileRect& rect : tile_grid(map.height(), map.width(), params.tile)) {
        double sum = 0.0;
        for (int y = rect.y; y < rect.y + rect.height; ++y) {
            for (int x = rect.x; x < rect.x + rect.width; ++x) sum += map.at(y, x);
        }
        TilePlan t;
        t.rect = rect;
        t.mean_degradation = sum / static_cast<double>(rect.area());
        t.depth = dynamic_depth(t.mean_degradation, params);
        r.plan.tiles.push_back(t);
    }
    r.cost = cost_of(r.plan);
    return r;
}

PlanResult plan(const img::ImageBuf& image, const AdaptiveParams& params) {
    return plan_from_map(degradation_map(img::luma(image), params), params);
}

double savings_fraction(const CostUnits& cost) {
    if (cost.full_units <= 0) throw Error(ErrorKind::InvalidParams, "full_units must be > 0");
    return 1.0 - static_cast<double>(cost.units) / static_cast<double>(cost.full_units);
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    std::string text = buf;
    text.erase(text.find_last_not_of('0') + 1);
    if (text.back() == '.') text.pop_back();
    return text + "%";
}

std::string plan_to_json(const DepthPlan& plan) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["height"] = plan.height;
    doc["width"] = plan.width;
    doc["tile"] = plan.tile;
    doc["overlap"] = plan.overlap;
    doc["d_max"] = plan.d_max;
    auto& tiles = doc["tiles"] = nlohmann::ordered_json::array();
    for (const auto& t : plan.tiles) {
        tiles.push_back({{"y", t.rect.y},
                         {"x", t.rect.x},
                         {"height", t.rect.height},
                         {"width", t.rect.width},
                         {"mean_degradation", t.mean_degradation},
                         {"depth", t.depth}});
    }
    const auto c = cost_of(plan);
    doc["units"] = c.units;
    doc["full_units"] = c.full_units;
    return doc.dump(2) + "\n";
}

}  // namespace eba::adaptive
