#include "eba/imgcore.hpp"

#include "eba/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace eba {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::FileNotFound: return "FileNotFound";
        case ErrorKind::DecodeError: return "DecodeError";
        case ErrorKind::TooSmall: return "TooSmall";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::TruncatedRecord: return "TruncatedRecord";
        case ErrorKind::ZeroNormEmbedding: return "ZeroNormEmbedding";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::EmptyAssignment: return "EmptyAssignment";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::PerplexityTooLarge: return "PerplexityTooLarge";
        case ErrorKind::MissingProfile: return "MissingProfile";
        case ErrorKind::WindowTooLarge: return "WindowTooLarge";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::PlanMismatch: return "PlanMismatch";
        case ErrorKind::EmptyScores: return "EmptyScores";
        case ErrorKind::MissingResult: return "MissingResult";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SerializationError: return "SerializationError";
        case ErrorKind::ManifestMismatch: return "ManifestMismatch";
        case ErrorKind::InconsistentReport: return "InconsistentReport";
    }
    return "Unknown";
}

}  // namespace eba

namespace eba::img {

ImageBuf::ImageBuf(int height, int width, double fill)
    : height_(height), width_(width),
      data_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)) * 3U,
            fill) {}

ImageBuf::ImageBuf(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (height < 0 || width < 0 ||
        data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3U) {
        throw Error(ErrorKind::InvalidParams, "image data size does not match H*W*3");
    }
}

Plane::Plane(int height, int width, double fill)
    : height_(height), width_(width),
      values_(static_cast<std::size_t>(std::max(height, 0)) * static_cast<std::size_t>(std::max(width, 0)), fill) {}

Plane::Plane(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height < 0 || width < 0 ||
        values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw Error(ErrorKind::InvalidParams, "plane data size does not match H*W");
    }
}

namespace {

enum class Format { Png, Jpeg, Unknown };

Format sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<unsigned char, 8> head{};
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    const auto got = in.gcount();
    static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (got == 8 && head == kPng) return Format::Png;
    if (got >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return Format::Jpeg;
    return Format::Unknown;
}

}  // namespace

ImageBuf load_image_any_size(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorKind::FileNotFound, path.string());
    }
    if (sniff(path) == Format::Unknown) {
        throw Error(ErrorKind::DecodeError, "not a PNG or JPEG file: " + path.string());
    }

    cv::Mat bgr;
    try {
        bgr = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
    } catch (const cv::Exception& e) {
        throw Error(ErrorKind::DecodeError, path.string() + ": " + e.what());
    }
    if (bgr.empty() || bgr.type() != CV_8UC3) {
        throw Error(ErrorKind::DecodeError, "cannot decode " + path.string());
    }

    ImageBuf out(bgr.rows, bgr.cols);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            out.at(y, x, 0) = row[x][2] / 255.0;
            out.at(y, x, 1) = row[x][1] / 255.0;
            out.at(y, x, 2) = row[x][0] / 255.0;
        }
    }
    return out;
}

ImageBuf load_image(const std::filesystem::path& path) {
    ImageBuf img = load_image_any_size(path);
    if (img.height() < kMinSide || img.width() < kMinSide) {
        throw Error(ErrorKind::TooSmall, path.string() + " is " + std::to_string(img.height()) + "x" +
                                             std::to_string(img.width()));
    }
    return img;
}

unsigned char quantize_u8(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    const double q = std::floor(v * 255.0 + 0.5);
    return static_cast<unsigned char>(std::min(q, 255.0));
}

namespace {

void write_png(const cv::Mat& mat, const std::filesystem::path& path) {
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), mat, {cv::IMWRITE_PNG_COMPRESSION, 6});
    } catch (const cv::Exception& e) {
        throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
    }
    if (!ok) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

}  // namespace

void save_image(const ImageBuf& img, const std::filesystem::path& path) {
    cv::Mat bgr(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width(); ++x) {
            row[x][0] = quantize_u8(img.at(y, x, 2));
            row[x][1] = quantize_u8(img.at(y, x, 1));
            row[x][2] = quantize_u8(img.at(y, x, 0));
        }
    }
    write_png(bgr, path);
}

void save_plane_png16(const Plane& plane, double scale, const std::filesystem::path& path) {
    cv::Mat gray(plane.height(), plane.width(), CV_16UC1);
    for (int y = 0; y < plane.height(); ++y) {
        auto* row = gray.ptr<std::uint16_t>(y);
        for (int x = 0; x < plane.width(); ++x) {
            const double q = std::floor(plane.at(y, x) * scale + 0.5);
            row[x] = static_cast<std::uint16_t>(std::clamp(std::isfinite(q) ? q : 0.0, 0.0, 65535.0));
        }
    }
    write_png(gray, path);
}

LumaBuf luma(const ImageBuf& img) {
    LumaBuf out(img.height(), img.width());
    auto src = img.data();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double r = src[3 * i];
        const double g = src[3 * i + 1];
        const double b = src[3 * i + 2];
        // Clamp into the channel hull; the weighted sum can overshoot by an ulp.
        const double lo = std::min({r, g, b});
        const double hi = std::max({r, g, b});
        dst[i] = std::clamp(luma_of(r, g, b), lo, hi);
    }
    return out;
}

}  // namespace eba::img
