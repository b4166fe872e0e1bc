#pragma once

#include "blurgs/render/rasterizer.hpp"
#include "blurgs/scene/scene.hpp"

namespace blurgs {

// Splat i of the rasterizer came from Gaussian `index` of the static or dynamic cloud.
struct SplatSource {
    bool dynamic;
    std::size_t index;
};

struct SceneRenderCache {
    RasterCache raster;
    std::vector<SplatSource> sources;
    std::vector<Gaussian> projected;  // frame-t Gaussians fed to splat_project
    int frame = -1;
};

// Renders static Gaussians plus dynamic Gaussians deformed into `frame`.
RenderOutput render(const Scene& scene, const Camera& cam, int frame, const RenderSettings& settings,
                    SceneRenderCache* cache = nullptr);

// Accumulates dL/d(scene parameters) into `grad` (same layout as scene).
void render_backward(const Scene& scene, const Camera& cam, const SceneRenderCache& cache,
                     const RenderGrad& dout, const RenderSettings& settings, Scene& grad);

}  // namespace blurgs
