#pragma once

#include "blurgs/blur/blur_field.hpp"

#include <span>

namespace blurgs {

inline constexpr double kKernelKlEpsilon = 1e-8;

struct KernelMetrics {
    double psnr = 0.0;  // taps treated as an image on [0, 1], MSE pooled over evaluated pixels
    double kl = 0.0;    // mean over evaluated pixels of sum p_gt log(p_gt / (p_est + eps))
    std::size_t pixels = 0;
};

// Compares each evaluated pixel's estimated kernel with `gt`, which is either one K x K kernel
// broadcast to every pixel or a full per-pixel field (pixels x K^2). `region` (H x W, optional)
// selects pixels with value > 0. Throws std::invalid_argument on mismatched K or shapes.
KernelMetrics kernel_metrics(const BlurField& estimate, std::span<const double> gt,
                             std::span<const double> region = {});

// The kernel actually applied after blending: (1 - m) delta + m k.
BlurField effective_kernels(const BlurField& field);

}  // namespace blurgs
