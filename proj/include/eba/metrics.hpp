#pragma once

#include "eba/imgcore.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace eba::metrics {

/// Identifies the metric definitions below; stored in every report.
inline constexpr std::string_view kMetricVersion = "eba-metrics-1 (psnr=rgb-mse, ssim=luma, fsim=luma)";

inline constexpr double kPsnrCapDb = 100.0;

struct MetricSet {
    double ssim = 0.0;
    double psnr_db = 0.0;
    double uiqm = 0.0;
    double uciqe = 0.0;
    double fsim = 0.0;

    bool operator==(const MetricSet&) const = default;
};

/// PSNR over all pixels and channels with MAX = 1; MSE = 0 gives 100 dB.
double psnr(const img::ImageBuf& a, const img::ImageBuf& b);

/// Mean of the SSIM map on BT.601 luma: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 1, evaluated at every fully-contained window
/// position. Requires min side >= 11.
double ssim(const img::ImageBuf& a, const img::ImageBuf& b);

/// Luma FSIM. Requires min side >= 32.
double fsim(const img::ImageBuf& a, const img::ImageBuf& b);

/// Phase congruency of a plane (log-Gabor bank, 4 scales x 4 orientations).
img::Plane phase_congruency(const img::Plane& plane);

struct UiqmParts {
    double uicm = 0.0;
    double uism = 0.0;
    double uiconm = 0.0;
    double uiqm = 0.0;
};

/// UIQM = 0.0282*UICM + 0.2953*UISM + 3.5753*UIConM. Requires min side >= 8.
UiqmParts uiqm_parts(const img::ImageBuf& image);
double uiqm(const img::ImageBuf& image);

struct UciqeParts {
    double sigma_chroma = 0.0;
    double contrast_l = 0.0;
    double mean_saturation = 0.0;
    double uciqe = 0.0;
};

/// UCIQE = 0.4680*sigma_c + 0.2745*con_l + 0.2576*mu_s in CIELab (D65).
/// Requires min side >= 8.
UciqeParts uciqe_parts(const img::ImageBuf& image);
double uciqe(const img::ImageBuf& image);

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// sRGB in [0,1] -> CIELab (D65 white).
Lab srgb_to_lab(double r, double g, double b);

/// Linear-interpolated percentile (q in [0,100]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// All five metrics; UIQM and UCIQE are measured on `out`.
MetricSet evaluate_pair(const img::ImageBuf& out, const img::ImageBuf& gt);

/// Field-wise arithmetic mean. Throws EmptyInput.
MetricSet dataset_means(std::span<const MetricSet> sets);

}  // namespace eba::metrics
