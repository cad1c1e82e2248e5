#include "eba/error.hpp"
#include "eba/metrics.hpp"

namespace eba::metrics {

MetricSet evaluate_pair(const img::ImageBuf& out, const img::ImageBuf& gt) {
    MetricSet m;
    m.psnr_db = psnr(out, gt);
    m.ssim = ssim(out, gt);
    m.fsim = fsim(out, gt);
    m.uiqm = uiqm(out);
    m.uciqe = uciqe(out);
    return m;
}

MetricSet dataset_means(std::span<const MetricSet> sets) {
    if (sets.empty()) throw Error(ErrorKind::EmptyInput, "no metric sets to average");
    MetricSet m;
    for (const auto& s : sets) {
        m.ssim += s.ssim;
        m.psnr_db += s.psnr_db;
        m.uiqm += s.uiqm;
        m.uciqe += s.uciqe;
        m.fsim += s.fsim;
    }
    const double n = static_cast<double>(sets.size());
    m.ssim /= n;
    m.psnr_db /= n;
    m.uiqm /= n;
    m.uciqe /= n;
    m.fsim /= n;
    return m;
}

}  // namespace eba::metrics
