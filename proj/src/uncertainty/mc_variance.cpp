#include "eba/enhance.hpp"
#include "eba/error.hpp"
#include "eba/random.hpp"
#include "eba/uncertainty.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace eba::uncertainty {

void StochasticConfig::validate() const {
    if (passes < 1) throw Error(ErrorKind::InvalidParams, "passes must be >= 1");
    if (!(gain_jitter_sigma >= 0.0)) throw Error(ErrorKind::InvalidParams, "gain_jitter_sigma must be >= 0");
    if (!(pass_drop_prob >= 0.0 && pass_drop_prob < 1.0))
        throw Error(ErrorKind::InvalidParams, "pass_drop_prob must be in [0,1)");
}

PassNoise pass_noise(const StochasticConfig& cfg, int t) {
    return {cfg.gain_jitter_sigma, cfg.pass_drop_prob, rng::substream(cfg.seed, static_cast<std::uint64_t>(t))};
}

bool flag(double scalar, double review_threshold) noexcept { return scalar > review_threshold; }

VarianceResult variance_from_passes(std::span<const img::ImageBuf> passes, double review_threshold) {
    if (passes.empty()) throw Error(ErrorKind::EmptyInput, "no passes");
    const int h = passes.front().height();
    const int w = passes.front().width();
    for (const auto& p : passes) {
        if (p.height() != h || p.width() != w) throw Error(ErrorKind::DimensionMismatch, "passes differ in size");
    }
    const std::size_t t_count = passes.size();
    const double inv_t = 1.0 / static_cast<double>(t_count);

    VarianceResult r;
    r.mean_image = img::ImageBuf(h, w);
    r.variance_map = img::Plane(h, w);
    auto mean = r.mean_image.data();
    auto var = r.variance_map.values();
    std::vector<double> samples(t_count);
    for (std::size_t i = 0; i < r.mean_image.pixel_count(); ++i) {
        std::array<double, 3> v{};
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t t = 0; t < t_count; ++t) samples[t] = passes[t].data()[3 * i + c];
            std::sort(samples.begin(), samples.end());
            // Welford over sorted samples: order-free, and exactly 0 for equal passes.
            double m = 0.0, sq = 0.0;
            for (std::size_t t = 0; t < t_count; ++t) {
                const double d = samples[t] - m;
                m += d / static_cast<double>(t + 1);
                sq += d * (samples[t] - m);
            }
            mean[3 * i + c] = std::clamp(m, 0.0, 1.0);
            v[c] = sq * inv_t;
        }
        var[i] = (v[0] + v[1] + v[2]) / 3.0;
    }
    double total = 0.0;
    for (double x : var) total += x;
    r.scalar = total / static_cast<double>(var.size());
    r.flagged = flag(r.scalar, review_threshold);
    return r;
}

VarianceResult mc_variance(std::string_view id, const img::ImageBuf& image, const adaptive::DepthPlan& plan,
                           enhance::Enhancer& enhancer, const StochasticConfig& cfg, double review_threshold) {
    cfg.validate();
    std::vector<img::ImageBuf> passes;
    passes.reserve(static_cast<std::size_t>(cfg.passes));
    for (int t = 0; t < cfg.passes; ++t) passes.push_back(enhancer.enhance(id, image, plan, pass_noise(cfg, t)));
    return variance_from_passes(passes, review_threshold);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

}  // namespace

void write_ebav(const img::Plane& map, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes{'E', 'B', 'A', 'V'};
    put_u32(bytes, static_cast<std::uint32_t>(map.height()));
    put_u32(bytes, static_cast<std::uint32_t>(map.width()));
    for (double v : map.values()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

img::Plane read_ebav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "EBAV", 4) != 0)
        throw Error(ErrorKind::BadMagic, path.string());
    const std::uint32_t h = get_u32(bytes, 4);
    const std::uint32_t w = get_u32(bytes, 8);
    const std::size_t count = static_cast<std::size_t>(h) * w;
    if (bytes.size() != 12 + 4 * count) throw Error(ErrorKind::TruncatedRecord, path.string());
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
    return img::Plane(static_cast<int>(h), static_cast<int>(w), std::move(values));
}

}  // namespace eba::uncertainty
