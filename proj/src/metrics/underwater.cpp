#include "eba/error.hpp"
#include "eba/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace eba::metrics {

namespace {

constexpr int kBlock = 8;

constexpr double kUicmMeanWeight = -0.0268;
constexpr double kUicmSpreadWeight = 0.1586;
constexpr double kUiqmC1 = 0.0282;
constexpr double kUiqmC2 = 0.2953;
constexpr double kUiqmC3 = 3.5753;

// PLIP gamma (= k) of 1026 on the 0..255 scale, carried to the [0,1] domain.
constexpr double kPlipGamma = 1026.0 / 255.0;

constexpr double kUciqeC1 = 0.4680;
constexpr double kUciqeC2 = 0.2745;
constexpr double kUciqeC3 = 0.2576;

void require_min_side(const img::ImageBuf& im, int side, const char* what) {
    if (std::min(im.height(), im.width()) < side) {
        throw Error(ErrorKind::TooSmall, std::string(what) + " needs min side >= " + std::to_string(side));
    }
}

// Asymmetric alpha-trimmed mean with alpha = 0.1 on each tail:
// drop ceil(K/10) lowest and floor(K/10) highest samples.
double trimmed_mean(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    const std::size_t lo = (k + 9) / 10;
    const std::size_t hi = k / 10;
    double s = 0.0;
    for (std::size_t i = lo; i < k - hi; ++i) s += v[i];
    return s / static_cast<double>(k - lo - hi);
}

double spread_about(const std::vector<double>& v, double mu) {
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
}

double uicm(const img::ImageBuf& im) {
    const std::size_t n = im.pixel_count();
    std::vector<double> rg(n), yb(n);
    auto d = im.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = d[3 * i], g = d[3 * i + 1], b = d[3 * i + 2];
        rg[i] = r - g;
        yb[i] = (r + g) / 2.0 - b;
    }
    const double mu_rg = trimmed_mean(rg);
    const double mu_yb = trimmed_mean(yb);
    const double s_rg = spread_about(rg, mu_rg);
    const double s_yb = spread_about(yb, mu_yb);
    return kUicmMeanWeight * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) + kUicmSpreadWeight * std::sqrt(s_rg + s_yb);
}

img::Plane channel(const img::ImageBuf& im, int c) {
    img::Plane p(im.height(), im.width());
    for (int y = 0; y < im.height(); ++y)
        for (int x = 0; x < im.width(); ++x) p.at(y, x) = im.at(y, x, c);
    return p;
}

// 3x3 Sobel gradient magnitude, replicated borders.
img::Plane sobel_magnitude(const img::Plane& p) {
    const int h = p.height();
    const int w = p.width();
    auto at = [&](int y, int x) { return p.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1)); };
    img::Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                              (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            const double gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                              (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            out.at(y, x) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

template <class BlockFn>
double sum_blocks(const img::Plane& p, BlockFn&& fn) {
    const int k1 = p.width() / kBlock;
    const int k2 = p.height() / kBlock;
    double total = 0.0;
    for (int by = 0; by < k2; ++by) {
        for (int bx = 0; bx < k1; ++bx) {
            double lo = p.at(by * kBlock, bx * kBlock);
            double hi = lo;
            for (int y = by * kBlock; y < (by + 1) * kBlock; ++y) {
                for (int x = bx * kBlock; x < (bx + 1) * kBlock; ++x) {
                    lo = std::min(lo, p.at(y, x));
                    hi = std::max(hi, p.at(y, x));
                }
            }
            total += fn(lo, hi);
        }
    }
    return total;
}

double eme(const img::Plane& p) {
    const double blocks = static_cast<double>(p.width() / kBlock) * static_cast<double>(p.height() / kBlock);
    const double s = sum_blocks(p, [](double lo, double hi) { return lo > 0.0 ? std::log(hi / lo) : 0.0; });
    return 2.0 / blocks * s;
}

double uism(const img::ImageBuf& im) {
    static constexpr double kWeights[3] = {img::kLumaR, img::kLumaG, img::kLumaB};
    double out = 0.0;
    for (int c = 0; c < 3; ++c) {
        const img::Plane ch = channel(im, c);
        img::Plane edges = sobel_magnitude(ch);
        auto ev = edges.values();
        auto cv = ch.values();
        for (std::size_t i = 0; i < ev.size(); ++i) ev[i] *= cv[i];
        out += kWeights[c] * eme(edges);
    }
    return out;
}

double uiconm(const img::ImageBuf& im) {
    const img::LumaBuf l = img::luma(im);
    const double blocks = static_cast<double>(l.width() / kBlock) * static_cast<double>(l.height() / kBlock);
    const double s = sum_blocks(l, [](double lo, double hi) {
        if (hi == lo) return 0.0;  // degenerate block
        const double diff = kPlipGamma * (hi - lo) / (kPlipGamma - lo);  // PLIP subtraction
        const double sum = hi + lo - hi * lo / kPlipGamma;               // PLIP addition
        if (!(diff > 0.0) || !(sum > 0.0)) return 0.0;
        const double r = diff / sum;
        return r * std::log(r);
    });
    return -s / blocks;
}

}  // namespace

UiqmParts uiqm_parts(const img::ImageBuf& image) {
    require_min_side(image, kBlock, "uiqm");
    UiqmParts p;
    p.uicm = uicm(image);
    p.uism = uism(image);
    p.uiconm = uiconm(image);
    p.uiqm = kUiqmC1 * p.uicm + kUiqmC2 * p.uism + kUiqmC3 * p.uiconm;
    return p;
}

double uiqm(const img::ImageBuf& image) { return uiqm_parts(image).uiqm; }

Lab srgb_to_lab(double r, double g, double b) {
    auto linear = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
    auto f = [](double t) {
        constexpr double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
    };
    const double lr = linear(r), lg = linear(g), lb = linear(b);
    const double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb;
    const double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
    const double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb;
    const double fy = f(y / 1.0);
    Lab lab;
    lab.l = 116.0 * fy - 16.0;
    if (r == g && g == b) return lab;  // achromatic: a = b = 0 exactly
    lab.a = 500.0 * (f(x / 0.95047) - fy);
    lab.b = 200.0 * (fy - f(z / 1.08883));
    return lab;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "percentile of empty set");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

UciqeParts uciqe_parts(const img::ImageBuf& image) {
    require_min_side(image, kBlock, "uciqe");
    const std::size_t n = image.pixel_count();
    std::vector<double> chroma(n), lightness(n);
    double sat_sum = 0.0;
    double chroma_sum = 0.0;
    auto d = image.data();
    for (std::size_t i = 0; i < n; ++i) {
        const Lab lab = srgb_to_lab(d[3 * i], d[3 * i + 1], d[3 * i + 2]);
        const double c = std::sqrt(lab.a * lab.a + lab.b * lab.b);
        chroma[i] = c / 100.0;
        lightness[i] = lab.l;
        chroma_sum += chroma[i];
        const double mag = std::sqrt(c * c + lab.l * lab.l);
        sat_sum += mag > 0.0 ? c / mag : 0.0;
    }
    const double mean_c = chroma_sum / static_cast<double>(n);
    double var_c = 0.0;
    for (double c : chroma) var_c += (c - mean_c) * (c - mean_c);
    var_c /= static_cast<double>(n);

    UciqeParts p;
    p.sigma_chroma = std::sqrt(var_c);
    p.contrast_l = (percentile(lightness, 99.0) - percentile(lightness, 1.0)) / 100.0;
    p.mean_saturation = sat_sum / static_cast<double>(n);
    p.uciqe = kUciqeC1 * p.sigma_chroma + kUciqeC2 * p.contrast_l + kUciqeC3 * p.mean_saturation;
    return p;
}

double uciqe(const img::ImageBuf& image) { return uciqe_parts(image).uciqe; }

}  // namespace eba::metrics
