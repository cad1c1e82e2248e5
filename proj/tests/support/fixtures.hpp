#pragma once

#include "eba/embed.hpp"
#include "eba/error.hpp"
#include "eba/imgcore.hpp"
#include "eba/random.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

namespace fx {

namespace fs = std::filesystem;

/// Integer-only texture so the same pixels can be rebuilt in numpy.
inline eba::img::ImageBuf pattern(int h, int w, long seed) {
    eba::img::ImageBuf im(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const long v = (x * (17 + 3 * c) + y * (29 + 5 * c) + static_cast<long>(x) * y * (seed + c) + 31 * seed) % 256;
                im.at(y, x, c) = static_cast<double>(v) / 255.0;
            }
    return im;
}

inline eba::img::ImageBuf random_image(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    eba::img::ImageBuf im(h, w);
    for (double& v : im.data()) v = lo + (hi - lo) * eba::rng::unit(gen);
    return im;
}

/// Random image already on the 8-bit grid, so save/load is lossless.
inline eba::img::ImageBuf random_u8_image(int h, int w, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    eba::img::ImageBuf im(h, w);
    for (double& v : im.data()) v = static_cast<double>(gen() % 256) / 255.0;
    return im;
}

inline eba::img::ImageBuf constant(int h, int w, double r, double g, double b) {
    eba::img::ImageBuf im(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            im.at(y, x, 0) = r;
            im.at(y, x, 1) = g;
            im.at(y, x, 2) = b;
        }
    return im;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("eba-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct SynthEntry {
    std::string id;
    std::string dataset;
    bool with_gt = true;
};

/// Writes input/<id>.png (a degraded copy) and gt/<id>.png plus
/// manifest.json under `dir`; returns the manifest path.
inline fs::path synth_dataset(const fs::path& dir, const std::vector<SynthEntry>& entries, int h = 48, int w = 64,
                              std::uint64_t seed = 7) {
    fs::create_directories(dir / "input");
    fs::create_directories(dir / "gt");
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto gt = random_u8_image(h, w, seed * 1000 + i);
        eba::img::ImageBuf in(h, w);
        std::mt19937_64 gen(seed * 7919 + i);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double tint[3] = {0.05, 0.25, 0.35};
                for (int c = 0; c < 3; ++c)
                    in.at(y, x, c) = 0.55 * gt.at(y, x, c) + tint[c] + 0.04 * (eba::rng::unit(gen) - 0.5);
            }
        for (double& v : in.data()) v = std::clamp(v, 0.0, 1.0);
        eba::img::save_image(in, dir / "input" / (entries[i].id + ".png"));
        nlohmann::json e = {{"id", entries[i].id}, {"input", "input/" + entries[i].id + ".png"},
                            {"dataset", entries[i].dataset}};
        if (entries[i].with_gt) {
            eba::img::save_image(gt, dir / "gt" / (entries[i].id + ".png"));
            e["gt"] = "gt/" + entries[i].id + ".png";
        }
        list.push_back(e);
    }
    const auto path = dir / "manifest.json";
    write_file(path, nlohmann::json{{"entries", list}}.dump(2));
    return path;
}

inline std::vector<SynthEntry> entries(std::size_t n, const std::string& dataset = "SYN") {
    std::vector<SynthEntry> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"img" + std::to_string(i), dataset, true});
    return out;
}

/// TestProvider that reports the sidecar as down for selected ids, or for
/// prompts when `fail_text` is set.
class FlakyProvider final : public eba::embed::EmbeddingProvider {
public:
    FlakyProvider(std::uint64_t seed, std::set<std::string> bad_ids, bool fail_text = false)
        : inner_(seed, 32), bad_(std::move(bad_ids)), fail_text_(fail_text) {}

    eba::embed::Embedding embed_image(std::string_view id, const std::filesystem::path& path) override {
        if (bad_.contains(std::string(id))) throw eba::Error(eba::ErrorKind::ProviderUnavailable, "down");
        return inner_.embed_image(id, path);
    }
    eba::embed::Embedding embed_text(std::string_view text) override {
        if (fail_text_) throw eba::Error(eba::ErrorKind::ProviderUnavailable, "down");
        return inner_.embed_text(text);
    }
    std::string name() const override { return "flaky"; }

private:
    eba::embed::TestProvider inner_;
    std::set<std::string> bad_;
    bool fail_text_;
};

}  // namespace fx
