#pragma once

#include "blurgs/scene/camera.hpp"
#include "blurgs/scene/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace blurgs {

struct DensifyConfig {
    bool enabled = true;
    int trigger_iteration = 2500;
    int pixels_per_frame = 32;
    bool use_gt_depth = true;  // false: use the rendered depth instead
    double opacity = 0.5;

    void validate() const;
};

struct PixelSample {
    int x = 0;
    int y = 0;
    double depth = 0.0;
};

// Up to n distinct pixels with mask == 1 (mask > 0.5), uniformly without replacement, in the
// order drawn. Deterministic in the seed; an empty mask yields an empty list.
std::vector<PixelSample> sample_dynamic_pixels(std::span<const double> mask, std::span<const double> depth,
                                               int width, int height, int n, std::uint64_t seed);

Vec3 lift_to_observation(const PixelSample& s, const Camera& cam);

struct Remapped {
    Vec3 canonical;
    std::size_t neighbor;  // index of the nearest dynamic Gaussian at frame t
};

// Nearest existing dynamic Gaussian after deformation to t (ties to the lowest index), then the
// inverse of its composed transform. Throws std::logic_error when there are no dynamic Gaussians.
Remapped remap_to_canonical(const Vec3& observed, const Scene& scene, int t);

struct DensifyFrame {
    std::span<const double> image;  // H x W x 3 observation used for colors
    std::span<const double> depth;
    std::span<const double> mask;
    const Camera* camera = nullptr;
    int frame = 0;
};

// Appends one Gaussian per sampled pixel across all frames and returns the count. Existing
// Gaussians are never touched. New Gaussians inherit the neighbor's motion logits, take the
// observed color, the configured opacity and an isotropic scale equal to the mean
// nearest-neighbor distance among the appended points.
std::size_t densify(Scene& scene, std::span<const DensifyFrame> frames, const DensifyConfig& config,
                    std::uint64_t seed);

}  // namespace blurgs
