#include "eba/error.hpp"
#include "eba/metrics.hpp"

#include <array>
#include <cmath>

namespace eba::metrics {

namespace {

void require_same_shape(const img::ImageBuf& a, const img::ImageBuf& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw Error(ErrorKind::DimensionMismatch, std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                                      " vs " + std::to_string(b.height()) + "x" +
                                                      std::to_string(b.width()));
    }
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        g[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable "valid" filtering: output is (H-10) x (W-10).
img::Plane filter_valid(const img::Plane& p, const std::array<double, kSsimWindow>& g) {
    const int h = p.height();
    const int w = p.width();
    const int ow = w - kSsimWindow + 1;
    const int oh = h - kSsimWindow + 1;
    img::Plane tmp(h, ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) s += g[static_cast<std::size_t>(k)] * p.at(y, x + k);
            tmp.at(y, x) = s;
        }
    }
    img::Plane out(oh, ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) s += g[static_cast<std::size_t>(k)] * tmp.at(y + k, x);
            out.at(y, x) = s;
        }
    }
    return out;
}

img::Plane product(const img::Plane& a, const img::Plane& b) {
    img::Plane out(a.height(), a.width());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    return out;
}

}  // namespace

double psnr(const img::ImageBuf& a, const img::ImageBuf& b) {
    require_same_shape(a, b);
    auto av = a.data();
    auto bv = b.data();
    if (av.empty()) throw Error(ErrorKind::EmptyInput, "psnr of empty images");
    double sse = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - bv[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(av.size());
    if (mse == 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

double ssim(const img::ImageBuf& a, const img::ImageBuf& b) {
    require_same_shape(a, b);
    if (std::min(a.height(), a.width()) < kSsimWindow) {
        throw Error(ErrorKind::TooSmall, "ssim needs min side >= 11");
    }
    static const auto g = gaussian_taps();
    const img::LumaBuf x = img::luma(a);
    const img::LumaBuf y = img::luma(b);

    const img::Plane mu1 = filter_valid(x, g);
    const img::Plane mu2 = filter_valid(y, g);
    const img::Plane exx = filter_valid(product(x, x), g);
    const img::Plane eyy = filter_valid(product(y, y), g);
    const img::Plane exy = filter_valid(product(x, y), g);

    double sum = 0.0;
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double m1 = mu1.values()[i];
        const double m2 = mu2.values()[i];
        const double s11 = exx.values()[i] - m1 * m1;
        const double s22 = eyy.values()[i] - m2 * m2;
        const double s12 = exy.values()[i] - m1 * m2;
        const double num = (2.0 * m1 * m2 + kC1) * (2.0 * s12 + kC2);
        const double den = (m1 * m1 + m2 * m2 + kC1) * (s11 + s22 + kC2);
        sum += num / den;
    }
    return sum / static_cast<double>(mu1.size());
}

}  // namespace eba::metrics
