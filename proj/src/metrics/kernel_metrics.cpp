#include "blurgs/metrics/kernel_metrics.hpp"

#include "blurgs/metrics/image_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blurgs {

KernelMetrics kernel_metrics(const BlurField& estimate, std::span<const double> gt, std::span<const double> region) {
    const std::size_t taps = estimate.taps(), n = estimate.pixels();
    const bool per_pixel = gt.size() == n * taps;
    if (!per_pixel && gt.size() != taps) throw std::invalid_argument("kernel_metrics: kernel size mismatch");
    if (estimate.kernels.size() != n * taps) throw std::invalid_argument("kernel_metrics: malformed estimate");
    if (!region.empty() && region.size() != n) throw std::invalid_argument("kernel_metrics: region shape mismatch");

    KernelMetrics m;
    double sse = 0.0, kl = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        if (!region.empty() && !(region[p] > 0.0)) continue;
        const double* q = estimate.kernels.data() + p * taps;
        const double* g = gt.data() + (per_pixel ? p * taps : 0);
        double pixel_kl = 0.0;
        for (std::size_t i = 0; i < taps; ++i) {
            sse += (q[i] - g[i]) * (q[i] - g[i]);
            if (g[i] > 0.0) pixel_kl += g[i] * std::log(g[i] / (q[i] + kKernelKlEpsilon));
        }
        // The epsilon can push a near-exact match a few 1e-7 below zero.
        kl += std::max(pixel_kl, 0.0);
        ++m.pixels;
    }
    if (m.pixels == 0) return m;
    m.kl = kl / static_cast<double>(m.pixels);
    m.psnr = sse == 0.0 ? kPsnrIdentical : 10.0 * std::log10(static_cast<double>(m.pixels * taps) / sse);
    return m;
}

BlurField effective_kernels(const BlurField& field) {
    BlurField out = field;
    const int taps = field.taps(), c = field.center_tap();
    for (std::size_t p = 0; p < field.pixels(); ++p) {
        const double m = field.intensity[p];
        for (int i = 0; i < taps; ++i) out.kernels[p * taps + i] = m * field.kernels[p * taps + i] + (i == c ? 1.0 - m : 0.0);
        out.intensity[p] = 1.0;
    }
    return out;
}

}  // namespace blurgs
