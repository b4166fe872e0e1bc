#pragma once

#include "blurgs/blur/blur_net.hpp"
#include "blurgs/metrics/kernel_metrics.hpp"
#include "blurgs/optimize/training_data.hpp"
#include "blurgs/render/rasterizer.hpp"
#include "blurgs/scene/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blurgs {

struct EvalReport {
    // Sharp renders at the held-out cameras against the GT sharp images.
    std::vector<double> psnr;
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    // Same comparison restricted to pixels covered by the depth warp of the blurred training
    // observation, next to that warped observation itself (the no-reconstruction baseline).
    double covered_psnr = 0.0;
    double baseline_psnr = 0.0;
    // Predicted per-pixel kernels at the training views against the GT kernel (all pixels carry
    // GT blur). `effective` compares (1 - m) delta + m k instead of k.
    std::optional<KernelMetrics> kernel;
    std::optional<KernelMetrics> kernel_effective;
    double seconds = 0.0;
};

// `net` may be null (no blur model); kernels are then not evaluated.
EvalReport evaluate(const Scene& scene, const BlurNet<float>* net, const TrainingData& data,
                    const RenderSettings& settings);

// Structured-text form of a report. Infinite PSNR is written as the string "inf", LPIPS as
// null (not computed). Wall-clock timings are left out when `timings` is false so that
// deterministic runs produce byte-identical reports.
std::string eval_report_to_json(const EvalReport& report, bool timings = true);

}  // namespace blurgs
