#include "blurgs/optimize/objective.hpp"

#include <stdexcept>

namespace blurgs {

template <typename T>
LossTerms total_loss(const Scene& scene, const BlurNet<T>& net, const ViewTargets& view, const StageFlags& flags,
                     const LossWeights& weights, const RenderSettings& settings, Scene* scene_grad,
                     BlurNet<T>* net_grad, RenderOutput* rendered, std::vector<double>* prediction) {
    if (!view.camera) throw std::invalid_argument("total_loss: view has no camera");
    const bool want_grad = scene_grad != nullptr;
    if (want_grad && flags.blur && !net_grad) throw std::invalid_argument("total_loss: blur gradients need a buffer");
    SceneRenderCache rcache;
    const RenderOutput out = render(scene, *view.camera, view.frame, settings, want_grad ? &rcache : nullptr);
    const int w = out.width, h = out.height;
    const std::size_t n = out.pixels();

    LossTerms terms;
    BlurPathCache<T> bcache;
    std::vector<double> pred = flags.blur ? blur_forward(net, out, view.embedding, bcache) : out.image;
    std::vector<double> d_pred(want_grad ? 3 * n : 0, 0.0);
    terms.reconstruction = reconstruction_loss(pred, view.color, w, h, weights.beta, view.valid, d_pred);

    RenderGrad d_render;
    if (want_grad) d_render = RenderGrad::zeros(w, h);
    terms.geometry = geometry_loss(out, view.depth, view.mask, weights, flags.unseen, view.valid,
                                   want_grad ? &d_render : nullptr);

    std::vector<double> d_kernels;
    if (flags.blur && flags.sparsity) {
        if (want_grad) d_kernels.assign(n * bcache.field().taps(), 0.0);
        terms.sparsity = weights.sparsity *
                         sparsity_loss(bcache.field(), weights.sparsity_scale, d_kernels, weights.sparsity);
    }
    terms.smoothing = smoothing_loss(scene, weights, scene_grad);

    if (want_grad) {
        if (flags.blur) {
            blur_backward(net, bcache, d_pred, d_kernels, *net_grad, d_render);
        } else {
            for (std::size_t i = 0; i < d_pred.size(); ++i) d_render.image[i] += d_pred[i];
        }
        render_backward(scene, *view.camera, rcache, d_render, settings, *scene_grad);
    }
    if (rendered) *rendered = out;
    if (prediction) *prediction = std::move(pred);
    return terms;
}

template LossTerms total_loss<float>(const Scene&, const BlurNet<float>&, const ViewTargets&, const StageFlags&,
                                     const LossWeights&, const RenderSettings&, Scene*, BlurNet<float>*,
                                     RenderOutput*, std::vector<double>*);
template LossTerms total_loss<double>(const Scene&, const BlurNet<double>&, const ViewTargets&, const StageFlags&,
                                      const LossWeights&, const RenderSettings&, Scene*, BlurNet<double>*,
                                      RenderOutput*, std::vector<double>*);

}  // namespace blurgs
