#include "blurgs/render/render.hpp"

#include <stdexcept>

namespace blurgs {

RenderOutput render(const Scene& scene, const Camera& cam, int frame, const RenderSettings& settings,
                    SceneRenderCache* cache) {
    scene.bases.check_frame(frame);
    SceneRenderCache local;
    SceneRenderCache& c = cache ? *cache : local;
    c.sources.clear();
    c.projected.clear();
    c.frame = frame;
    std::vector<Splat2D> splats;
    splats.reserve(scene.statics.size() + scene.dynamics.size());

    auto push = [&](const Gaussian& g, bool dynamic, std::size_t index) {
        auto s = splat_project(g, cam, settings.cov_floor);
        if (!s) return;
        s->dynamic = dynamic;
        splats.push_back(*s);
        c.sources.push_back({dynamic, index});
        c.projected.push_back(g);
    };
    for (std::size_t i = 0; i < scene.statics.size(); ++i) push(scene.statics.gaussian(i), false, i);
    for (std::size_t i = 0; i < scene.dynamics.size(); ++i) push(scene.dynamic_at(i, frame), true, i);

    return rasterize(splats, cam, settings, &c.raster);
}

void render_backward(const Scene& scene, const Camera& cam, const SceneRenderCache& cache,
                     const RenderGrad& dout, const RenderSettings& settings, Scene& grad) {
    if (!cache.raster.valid || cache.frame < 0)
        throw std::logic_error("render_backward: forward cache is missing");
    const std::vector<Splat2DGrad> sg = rasterize_backward(cache.raster, dout, settings);
    for (std::size_t i = 0; i < sg.size(); ++i) {
        const SplatSource src = cache.sources[i];
        GaussianGrad gg = splat_project_backward(cache.projected[i], cam, settings.cov_floor, sg[i]);
        if (!src.dynamic) {
            grad.statics.accumulate(src.index, gg, scene.statics);
            continue;
        }
        deform_gaussian_backward(scene.dynamics.gaussian(src.index), scene.logits(src.index), scene.bases,
                                 cache.frame, gg, grad.logits(src.index), grad.bases);
        grad.dynamics.accumulate(src.index, gg, scene.dynamics);
    }
}

}  // namespace blurgs
