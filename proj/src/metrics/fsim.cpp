#include "eba/error.hpp"
#include "eba/metrics.hpp"

#include <opencv2/core.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

// Luma FSIM with the original phase-congruency model: log-Gabor bank of 4
// scales x 4 orientations (min wavelength 6, scale factor 2, sigma_on_f 0.55,
// orientation spacing / angular sigma ratio 1.2), Rayleigh noise threshold
// with k = 2, Scharr gradients, T1 = 0.85, T2 = 160.

namespace eba::metrics {

namespace {

constexpr int kScales = 4;
constexpr int kOrients = 4;
constexpr double kMinWavelength = 6.0;
constexpr double kMult = 2.0;
constexpr double kSigmaOnF = 0.55;
constexpr double kDThetaOnSigma = 1.2;
constexpr double kNoiseK = 2.0;
constexpr double kPcEpsilon = 1e-4;
constexpr double kLowpassCutoff = 0.45;
constexpr int kLowpassOrder = 15;
constexpr double kT1 = 0.85;
constexpr double kT2 = 160.0;

// Frequency coordinate for index i of an n-point axis, already
// ifftshift-ed so that index 0 is DC.
std::vector<double> freq_axis(int n) {
    std::vector<double> centered(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (n % 2) {
            centered[static_cast<std::size_t>(i)] = (i - (n - 1) / 2) / static_cast<double>(n - 1);
        } else {
            centered[static_cast<std::size_t>(i)] = (i - n / 2) / static_cast<double>(n);
        }
    }
    std::vector<double> shifted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) shifted[static_cast<std::size_t>(i)] = centered[static_cast<std::size_t>((i + n / 2) % n)];
    return shifted;
}

cv::Mat real_to_complex(const cv::Mat& real) {
    cv::Mat planes[] = {real, cv::Mat::zeros(real.size(), CV_64F)};
    cv::Mat out;
    cv::merge(planes, 2, out);
    return out;
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double hi = v[n / 2];
    if (n % 2) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lo + hi);
}

img::Plane downsample(const img::Plane& p, int f) {
    if (f <= 1) return p;
    const int h = p.height();
    const int w = p.width();
    const int half = f / 2;
    const int oh = (h + f - 1) / f;
    const int ow = (w + f - 1) / f;
    img::Plane out(oh, ow);
    // f x f average filter ('same' alignment, zero padding) sampled at every
    // f-th pixel starting from the first.
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int cy = oy * f;
            const int cx = ox * f;
            double s = 0.0;
            for (int y = cy + half - f + 1; y <= cy + half; ++y) {
                if (y < 0 || y >= h) continue;
                for (int x = cx + half - f + 1; x <= cx + half; ++x) {
                    if (x < 0 || x >= w) continue;
                    s += p.at(y, x);
                }
            }
            out.at(oy, ox) = s / (static_cast<double>(f) * f);
        }
    }
    return out;
}

img::Plane scharr_magnitude(const img::Plane& p) {
    const int h = p.height();
    const int w = p.width();
    auto at = [&](int y, int x) { return (y < 0 || y >= h || x < 0 || x >= w) ? 0.0 : p.at(y, x); };
    img::Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (3.0 * (at(y - 1, x + 1) - at(y - 1, x - 1)) + 10.0 * (at(y, x + 1) - at(y, x - 1)) +
                               3.0 * (at(y + 1, x + 1) - at(y + 1, x - 1))) / 16.0;
            const double gy = (3.0 * (at(y + 1, x - 1) - at(y - 1, x - 1)) + 10.0 * (at(y + 1, x) - at(y - 1, x)) +
                               3.0 * (at(y + 1, x + 1) - at(y - 1, x + 1))) / 16.0;
            out.at(y, x) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

}  // namespace

img::Plane phase_congruency(const img::Plane& plane) {
    const int rows = plane.height();
    const int cols = plane.width();
    const std::size_t n = plane.size();
    const double theta_sigma = std::numbers::pi / kOrients / kDThetaOnSigma;

    cv::Mat image(rows, cols, CV_64F);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) image.at<double>(y, x) = plane.at(y, x);
    cv::Mat image_fft;
    cv::dft(real_to_complex(image), image_fft, cv::DFT_COMPLEX_OUTPUT);

    const auto fx = freq_axis(cols);
    const auto fy = freq_axis(rows);
    cv::Mat radius(rows, cols, CV_64F), sin_t(rows, cols, CV_64F), cos_t(rows, cols, CV_64F), lowpass(rows, cols, CV_64F);
    for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < cols; ++x) {
            const double u = fx[static_cast<std::size_t>(x)];
            const double v = fy[static_cast<std::size_t>(y)];
            const double r = std::sqrt(u * u + v * v);
            const double t = std::atan2(-v, u);
            lowpass.at<double>(y, x) = 1.0 / (1.0 + std::pow(r / kLowpassCutoff, 2 * kLowpassOrder));
            radius.at<double>(y, x) = r;
            sin_t.at<double>(y, x) = std::sin(t);
            cos_t.at<double>(y, x) = std::cos(t);
        }
    }
    radius.at<double>(0, 0) = 1.0;

    std::vector<cv::Mat> log_gabor(kScales);
    const double denom = 2.0 * std::log(kSigmaOnF) * std::log(kSigmaOnF);
    for (int s = 0; s < kScales; ++s) {
        const double fo = 1.0 / (kMinWavelength * std::pow(kMult, s));
        cv::Mat lg(rows, cols, CV_64F);
        for (int y = 0; y < rows; ++y) {
            for (int x = 0; x < cols; ++x) {
                const double l = std::log(radius.at<double>(y, x) / fo);
                lg.at<double>(y, x) = std::exp(-(l * l) / denom) * lowpass.at<double>(y, x);
            }
        }
        lg.at<double>(0, 0) = 0.0;
        log_gabor[static_cast<std::size_t>(s)] = lg;
    }

    std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
    const double sqrt_size = std::sqrt(static_cast<double>(rows) * cols);

    for (int o = 0; o < kOrients; ++o) {
        const double angle = o * std::numbers::pi / kOrients;
        const double ca = std::cos(angle);
        const double sa = std::sin(angle);
        cv::Mat spread(rows, cols, CV_64F);
        for (int y = 0; y < rows; ++y) {
            for (int x = 0; x < cols; ++x) {
                const double ds = sin_t.at<double>(y, x) * ca - cos_t.at<double>(y, x) * sa;
                const double dc = cos_t.at<double>(y, x) * ca + sin_t.at<double>(y, x) * sa;
                const double dtheta = std::abs(std::atan2(ds, dc));
                spread.at<double>(y, x) = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
            }
        }

        std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
        std::vector<std::vector<double>> eo_re(kScales, std::vector<double>(n)), eo_im(kScales, std::vector<double>(n));
        std::vector<std::vector<double>> ifft_filters(kScales, std::vector<double>(n));
        double em_n = 0.0;

        for (int s = 0; s < kScales; ++s) {
            const cv::Mat filter = log_gabor[static_cast<std::size_t>(s)].mul(spread);
            if (s == 0) em_n = cv::sum(filter.mul(filter))[0];

            cv::Mat filt_spatial;
            cv::dft(real_to_complex(filter), filt_spatial, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);

            cv::Mat filter_c = real_to_complex(filter);
            cv::Mat product;
            cv::mulSpectrums(image_fft, filter_c, product, 0);
            cv::Mat eo;
            cv::dft(product, eo, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);

            auto& re = eo_re[static_cast<std::size_t>(s)];
            auto& im = eo_im[static_cast<std::size_t>(s)];
            auto& ff = ifft_filters[static_cast<std::size_t>(s)];
            for (int y = 0; y < rows; ++y) {
                const auto* row = eo.ptr<cv::Vec2d>(y);
                const auto* frow = filt_spatial.ptr<cv::Vec2d>(y);
                for (int x = 0; x < cols; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(cols) +
                                          static_cast<std::size_t>(x);
                    re[i] = row[x][0];
                    im[i] = row[x][1];
                    ff[i] = frow[x][0] * sqrt_size;
                    sum_an[i] += std::hypot(re[i], im[i]);
                    sum_e[i] += re[i];
                    sum_o[i] += im[i];
                }
            }
        }

        std::vector<double> energy(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double xe = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kPcEpsilon;
            const double mean_e = sum_e[i] / xe;
            const double mean_o = sum_o[i] / xe;
            for (int s = 0; s < kScales; ++s) {
                const double e = eo_re[static_cast<std::size_t>(s)][i];
                const double od = eo_im[static_cast<std::size_t>(s)][i];
                energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
            }
        }

        // Noise threshold from the smallest-scale response (Rayleigh model).
        std::vector<double> e2(n);
        for (std::size_t i = 0; i < n; ++i) e2[i] = eo_re[0][i] * eo_re[0][i] + eo_im[0][i] * eo_im[0][i];
        const double mean_e2n = -median_of(std::move(e2)) / std::log(0.5);
        const double noise_power = em_n > 0.0 ? mean_e2n / em_n : 0.0;

        double sum_an2 = 0.0;
        double sum_aiaj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int s = 0; s < kScales; ++s) {
                const double a = ifft_filters[static_cast<std::size_t>(s)][i];
                sum_an2 += a * a;
                for (int t = s + 1; t < kScales; ++t) sum_aiaj += a * ifft_filters[static_cast<std::size_t>(t)][i];
            }
        }
        const double noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
        const double tau = std::sqrt(std::max(noise_energy2, 0.0) / 2.0);
        const double noise_mean = tau * std::sqrt(std::numbers::pi / 2.0);
        const double noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
        const double threshold = (noise_mean + kNoiseK * noise_sigma) / 1.7;

        for (std::size_t i = 0; i < n; ++i) {
            energy_all[i] += std::max(energy[i] - threshold, 0.0);
            an_all[i] += sum_an[i];
        }
    }

    img::Plane pc(rows, cols);
    auto out = pc.values();
    for (std::size_t i = 0; i < n; ++i) out[i] = an_all[i] > 0.0 ? energy_all[i] / an_all[i] : 0.0;
    return pc;
}

double fsim(const img::ImageBuf& a, const img::ImageBuf& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw Error(ErrorKind::DimensionMismatch, "fsim inputs differ in size");
    }
    if (std::min(a.height(), a.width()) < 32) throw Error(ErrorKind::TooSmall, "fsim needs min side >= 32");

    auto scaled_luma = [](const img::ImageBuf& im) {
        img::LumaBuf l = img::luma(im);
        for (double& v : l.values()) v *= 255.0;
        return img::Plane(l.height(), l.width(), std::vector<double>(l.values().begin(), l.values().end()));
    };
    const int f = std::max(1, static_cast<int>(std::lround(std::min(a.height(), a.width()) / 256.0)));
    const img::Plane y1 = downsample(scaled_luma(a), f);
    const img::Plane y2 = downsample(scaled_luma(b), f);

    const img::Plane pc1 = phase_congruency(y1);
    const img::Plane pc2 = phase_congruency(y2);
    const img::Plane g1 = scharr_magnitude(y1);
    const img::Plane g2 = scharr_magnitude(y2);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < pc1.size(); ++i) {
        const double p1 = pc1.values()[i];
        const double p2 = pc2.values()[i];
        const double m1 = g1.values()[i];
        const double m2 = g2.values()[i];
        const double s_pc = (2.0 * p1 * p2 + kT1) / (p1 * p1 + p2 * p2 + kT1);
        const double s_g = (2.0 * m1 * m2 + kT2) / (m1 * m1 + m2 * m2 + kT2);
        const double pcm = std::max(p1, p2);
        num += s_g * s_pc * pcm;
        den += pcm;
    }
    // Featureless pairs (no phase congruency anywhere) are treated as identical.
    if (!(den > 0.0)) return 1.0;
    return std::min(1.0, num / den);
}

}  // namespace eba::metrics
