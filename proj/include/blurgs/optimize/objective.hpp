#pragma once

#include "blurgs/blur/blur_path.hpp"
#include "blurgs/optimize/losses.hpp"
#include "blurgs/render/render.hpp"

#include <span>

namespace blurgs {

struct StageFlags {
    bool blur = false;      // B^ from the blur path; otherwise B^ = I~
    bool sparsity = false;  // add L_spa (only meaningful with blur)
    bool unseen = false;    // mask-only geometry term, losses restricted to `valid`
};

// One supervised view: the camera and timestamp to render, the BP-Net embedding to use and the
// targets. `depth` may be empty for unseen views; `valid` empty means every pixel counts.
struct ViewTargets {
    const Camera* camera = nullptr;
    int frame = 0;
    int embedding = 0;
    std::span<const double> color;
    std::span<const double> depth;
    std::span<const double> mask;
    std::span<const double> valid;
};

struct LossTerms {
    double reconstruction = 0.0;
    double geometry = 0.0;
    double smoothing = 0.0;
    double sparsity = 0.0;
    double total() const { return reconstruction + geometry + smoothing + sparsity; }
};

// L = L_rec + L_geo + L_smo + L_spa with the given stage gates. When the gradient buffers are
// non-null, gradients of the total accumulate into them (net_grad may be null without blur).
template <typename T>
LossTerms total_loss(const Scene& scene, const BlurNet<T>& net, const ViewTargets& view, const StageFlags& flags,
                     const LossWeights& weights, const RenderSettings& settings, Scene* scene_grad = nullptr,
                     BlurNet<T>* net_grad = nullptr, RenderOutput* rendered = nullptr,
                     std::vector<double>* prediction = nullptr);

}  // namespace blurgs
