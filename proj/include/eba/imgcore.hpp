#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eba::img {

/// Minimum side accepted at pipeline entry.
inline constexpr int kMinSide = 8;

/// H x W x 3 image, row-major, channels interleaved R,G,B, values in [0,1].
class ImageBuf {
public:
    ImageBuf() = default;
    ImageBuf(int height, int width, double fill = 0.0);
    ImageBuf(int height, int width, std::vector<double> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
    double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const ImageBuf&) const = default;

private:
    std::size_t index(int y, int x, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3U + static_cast<std::size_t>(c);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Single floating plane, row-major.
class Plane {
public:
    Plane() = default;
    Plane(int height, int width, double fill = 0.0);
    Plane(int height, int width, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& at(int y, int x) noexcept {
        return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }
    double at(int y, int x) const noexcept {
        return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const Plane&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> values_;
};

/// Luminance plane in [0,1].
struct LumaBuf : Plane {
    using Plane::Plane;
};

struct ManifestEntry {
    std::string id;
    std::filesystem::path input_path;
    std::optional<std::filesystem::path> gt_path;
    std::string dataset_label;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
};

// BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma_of(double r, double g, double b) noexcept {
    return kLumaR * r + kLumaG * g + kLumaB * b;
}

/// Decodes a PNG or JPEG. 8-bit value v maps to v/255; grayscale is replicated
/// to three channels. Throws FileNotFound, DecodeError or TooSmall.
ImageBuf load_image(const std::filesystem::path& path);

/// Same as load_image but without the minimum-size check.
ImageBuf load_image_any_size(const std::filesystem::path& path);

/// Writes an 8-bit PNG; v is stored as floor(v*255 + 0.5) clamped to [0,255].
void save_image(const ImageBuf& img, const std::filesystem::path& path);

/// Writes a plane as a 16-bit grayscale PNG, storing round(v*scale) clamped
/// to [0,65535].
void save_plane_png16(const Plane& plane, double scale, const std::filesystem::path& path);

/// Quantizes one channel value the way save_image does.
unsigned char quantize_u8(double v) noexcept;

LumaBuf luma(const ImageBuf& img);

/// Reads the manifest JSON. Relative paths resolve against the manifest's
/// directory. Throws ParseError or DuplicateId.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Parses manifest JSON text; relative paths resolve against base_dir.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace eba::img
