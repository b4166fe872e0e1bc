#pragma once

#include "blurgs/scene/camera.hpp"
#include "blurgs/scene/gaussian.hpp"

#include <optional>
#include <span>
#include <vector>

namespace blurgs {

struct RenderSettings {
    Vec3 background = Vec3::Zero();
    // Depth is N / A for accumulated opacity A >= min_depth_alpha; below it the deficit is
    // filled with far_depth, (N + (min_depth_alpha - A) far_depth) / min_depth_alpha, which
    // reaches far_depth for an empty pixel and stays continuous at the threshold.
    double far_depth = 100.0;
    double min_depth_alpha = 1e-4;
    double cov_floor = 0.1;            // px^2 added to the projected covariance diagonal
    double alpha_max = 0.99;
    double extent_sigma = 3.0;         // half-width of each splat's evaluation box, in std-devs
    int threads = 1;                   // 1 = deterministic single-threaded mode
};

// Screen-space Gaussian produced by EWA projection.
struct Splat2D {
    Vec2 mean = Vec2::Zero();
    Mat2 cov = Mat2::Identity();  // includes the floor
    Mat2 conic = Mat2::Identity();  // inverse of cov
    double depth = 1.0;
    double opacity = 0.0;
    Vec3 color = Vec3::Zero();
    bool dynamic = false;
};

struct Splat2DGrad {
    Vec2 mean = Vec2::Zero();
    Mat2 conic = Mat2::Zero();
    double depth = 0.0;
    double opacity = 0.0;
    Vec3 color = Vec3::Zero();
};

// Image H x W x 3 (row-major, channel-last); depth, mask and alpha are H x W.
struct RenderOutput {
    int width = 0;
    int height = 0;
    std::vector<double> image;
    std::vector<double> depth;
    std::vector<double> mask;
    std::vector<double> alpha;

    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
};

// Loss gradients on the rendered image, depth and mask. Empty vectors mean zero.
struct RenderGrad {
    std::vector<double> image;
    std::vector<double> depth;
    std::vector<double> mask;

    static RenderGrad zeros(int width, int height);
};

struct Fragment {
    int splat;
    double alpha;
    double transmittance;  // product of (1 - alpha) over fragments in front
    bool clamped;
};

// Forward state needed by rasterize_backward.
struct RasterCache {
    bool valid = false;
    int width = 0;
    int height = 0;
    std::vector<Splat2D> splats;        // as passed in
    std::vector<std::size_t> offsets;   // per pixel into fragments, size H*W + 1
    std::vector<Fragment> fragments;    // front to back per pixel
    std::vector<double> depth_numerator;
    std::vector<double> accumulated;    // A per pixel
    std::vector<double> final_transmittance;
};

// Returns nullopt when the Gaussian is behind the near plane.
std::optional<Splat2D> splat_project(const Gaussian& g, const Camera& cam, double cov_floor);

// Adjoint of splat_project (mean, raw rotation, scale, opacity, color).
GaussianGrad splat_project_backward(const Gaussian& g, const Camera& cam, double cov_floor,
                                    const Splat2DGrad& grad);

// Front-to-back alpha compositing in increasing depth; ties broken by splat index.
RenderOutput rasterize(std::span<const Splat2D> splats, const Camera& cam,
                       const RenderSettings& settings, RasterCache* cache = nullptr);

// Gradients per input splat. Throws std::logic_error if the cache is not populated.
std::vector<Splat2DGrad> rasterize_backward(const RasterCache& cache, const RenderGrad& grad,
                                            const RenderSettings& settings);

}  // namespace blurgs
