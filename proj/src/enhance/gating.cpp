#include "eba/enhance.hpp"
#include "eba/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eba::enhance {

std::string_view to_string(Decision d) noexcept { return d == Decision::Skip ? "skip" : "enhance"; }

GateDecision gate(double score, double threshold) noexcept {
    return {score > threshold ? Decision::Skip : Decision::Enhance, score, threshold};
}

double calibrate_threshold(std::span<const double> scores, double target_skip_rate) {
    if (scores.empty()) throw Error(ErrorKind::EmptyScores, "no clarity scores to calibrate on");
    if (!(target_skip_rate >= 0.0 && target_skip_rate <= 1.0))
        throw Error(ErrorKind::InvalidParams, "target skip rate must be in [0,1]");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    if (target_skip_rate == 1.0) return std::nextafter(sorted.front(), -std::numeric_limits<double>::infinity());

    const double pos = (1.0 - target_skip_rate) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace eba::enhance
