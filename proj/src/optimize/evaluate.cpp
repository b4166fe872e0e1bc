#include "blurgs/optimize/evaluate.hpp"

#include "blurgs/metrics/image_metrics.hpp"
#include "blurgs/render/render.hpp"
#include "blurgs/unseen/unseen.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace blurgs {

namespace {

double mse_to_psnr(double mse) { return mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : kPsnrIdentical; }

// Pools per-view kernel metrics by pixel count.
struct KernelPool {
    double sq = 0.0, kl = 0.0;
    std::size_t taps = 0, pixels = 0;

    void add(const KernelMetrics& m, int taps_per_pixel) {
        const double mse = std::isinf(m.psnr) ? 0.0 : std::pow(10.0, -m.psnr / 10.0);
        sq += mse * static_cast<double>(m.pixels * taps_per_pixel);
        taps += m.pixels * taps_per_pixel;
        kl += m.kl * static_cast<double>(m.pixels);
        pixels += m.pixels;
    }
    KernelMetrics result() const {
        return {mse_to_psnr(sq / static_cast<double>(taps)), kl / static_cast<double>(pixels), pixels};
    }
};

nlohmann::ordered_json db(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::ordered_json ordered_views(const EvalReport& r) {
    nlohmann::ordered_json views = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.psnr.size(); ++i) views.push_back({{"view", i}, {"psnr", db(r.psnr[i])}, {"ssim", r.ssim[i]}});
    return views;
}

nlohmann::ordered_json kernel_json(const KernelMetrics& m) {
    return {{"psnr", db(m.psnr)}, {"kl", m.kl}, {"pixels", m.pixels}};
}

}  // namespace

EvalReport evaluate(const Scene& scene, const BlurNet<float>* net, const TrainingData& data,
                    const RenderSettings& settings) {
    const auto start = std::chrono::steady_clock::now();
    EvalReport rep;
    double cov_sq = 0.0, base_sq = 0.0;
    std::size_t cov_n = 0;
    for (std::size_t f = 0; f < data.novel_cameras.size(); ++f) {
        const Camera& cam = data.novel_cameras[f];
        const RenderOutput out = render(scene, cam, cam.frame, settings);
        const auto& gt = data.novel_sharp[f];
        rep.psnr.push_back(psnr(out.image, gt));
        rep.ssim.push_back(ssim(out.image, gt, data.width, data.height, 3));
        const int src = cam.frame;
        const WarpedTargets warped =
            warp_to_unseen(data.observed[src], data.mask[src], data.depth[src], data.cameras[src], cam);
        for (std::size_t p = 0; p < data.pixels(); ++p) {
            if (warped.valid[p] < 0.5) continue;
            for (int c = 0; c < 3; ++c) {
                cov_sq += std::pow(out.image[3 * p + c] - gt[3 * p + c], 2);
                base_sq += std::pow(warped.color[3 * p + c] - gt[3 * p + c], 2);
            }
            cov_n += 3;
        }
    }
    if (!rep.psnr.empty()) {
        for (std::size_t i = 0; i < rep.psnr.size(); ++i) {
            rep.mean_psnr += rep.psnr[i];
            rep.mean_ssim += rep.ssim[i];
        }
        rep.mean_psnr /= static_cast<double>(rep.psnr.size());
        rep.mean_ssim /= static_cast<double>(rep.ssim.size());
    }
    if (cov_n > 0) {
        rep.covered_psnr = mse_to_psnr(cov_sq / static_cast<double>(cov_n));
        rep.baseline_psnr = mse_to_psnr(base_sq / static_cast<double>(cov_n));
    }

    if (net && !data.gt_kernel.empty() && data.kernel_size == net->config.kernel_size) {
        KernelPool raw, eff;
        const int taps = data.kernel_size * data.kernel_size;
        for (int f = 0; f < data.frames(); ++f) {
            const RenderOutput out = render(scene, data.cameras[f], data.cameras[f].frame, settings);
            const BlurField field = predict_blur(*net, out, f);
            raw.add(kernel_metrics(field, data.gt_kernel), taps);
            eff.add(kernel_metrics(effective_kernels(field), data.gt_kernel), taps);
        }
        rep.kernel = raw.result();
        rep.kernel_effective = eff.result();
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::string eval_report_to_json(const EvalReport& r, bool timings) {
    nlohmann::ordered_json j;
    j["kernel_psnr_convention"] = "taps as an image on [0, 1], MSE pooled over evaluated pixels";
    j["views"] = ordered_views(r);
    j["mean_psnr"] = db(r.mean_psnr);
    j["mean_ssim"] = r.mean_ssim;
    j["lpips"] = nullptr;
    j["covered_psnr"] = db(r.covered_psnr);
    j["warped_baseline_psnr"] = db(r.baseline_psnr);
    if (r.kernel) j["kernel"] = kernel_json(*r.kernel);
    if (r.kernel_effective) j["kernel_effective"] = kernel_json(*r.kernel_effective);
    if (timings) j["seconds"] = r.seconds;
    return j.dump(2) + "\n";
}

}  // namespace blurgs
