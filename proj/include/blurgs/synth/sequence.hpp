#pragma once

#include "blurgs/scene/camera.hpp"
#include "blurgs/scene/scene.hpp"
#include "blurgs/synth/kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace blurgs {

struct SynthConfig {
    std::string preset = "orbiting-spheres";  // orbiting-spheres, sliding-sprite, two-body
    bool static_scene = false;                // drop the dynamic objects
    int width = 64;
    int height = 64;
    int frames = 12;
    double focal = 70.0;
    std::uint64_t seed = 7;
    KernelSpec kernel;

    void validate() const;
};

// Ground-truth layout before rendering. Scene coordinates are normalized so the training camera
// centers have a unit bounding-box diagonal.
struct GtScene {
    Scene scene;  // one motion basis per rigid object, coefficients saturated on the owner
    std::vector<int> object_of;           // per dynamic Gaussian
    std::vector<Vec3> object_centers;     // canonical frame
    std::vector<Camera> cameras;          // training view per frame
    std::vector<Camera> novel_cameras;    // held-out view per frame
    double look_depth = 0.0;              // scene-unit distance to the look-at point
    double normalization = 1.0;           // nominal-to-normalized scale factor
    int num_objects = 0;
};

// Throws std::invalid_argument for an unknown preset.
GtScene build_scene(const SynthConfig& config);

struct SyntheticSequence {
    SynthConfig config;
    GtScene gt;
    std::vector<double> kernel;  // global K x K blur kernel applied to every frame
    // Per training frame; images are H x W x 3 quantized to 8 bits, depth is float precision.
    std::vector<std::vector<double>> sharp, blurred, depth, mask;
    // GT sharp images at the held-out novel cameras.
    std::vector<std::vector<double>> novel_sharp;

    int frames() const { return static_cast<int>(sharp.size()); }
    int width() const { return config.width; }
    int height() const { return config.height; }
};

// Renders the GT scene at every camera and blurs each sharp frame with the configured kernel
// (replicate borders). Deterministic in the seed.
SyntheticSequence generate_sequence(const SynthConfig& config);

// Quantizes to k / 255.
double quantize8(double v);

}  // namespace blurgs
