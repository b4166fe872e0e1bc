#pragma once

#include "blurgs/scene/camera.hpp"
#include "blurgs/synth/sequence.hpp"

#include <vector>

namespace blurgs {

// Everything the optimizer sees: blurred observations, depth and mask priors, 3-D point tracks
// and cameras. The held-out views and the GT kernel are only used for evaluation.
struct TrainingData {
    int width = 0;
    int height = 0;
    std::vector<Camera> cameras;
    std::vector<std::vector<double>> observed;  // blurred images, H x W x 3
    std::vector<std::vector<double>> depth;
    std::vector<std::vector<double>> mask;
    // Each track holds one world-space point per frame (a lifted 2-D track).
    std::vector<std::vector<Vec3>> tracks;
    double look_depth = 0.0;

    std::vector<Camera> novel_cameras;
    std::vector<std::vector<double>> novel_sharp;
    std::vector<double> gt_kernel;  // empty when unknown
    int kernel_size = 0;

    int frames() const { return static_cast<int>(cameras.size()); }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

    // Throws std::invalid_argument on inconsistent sizes.
    void validate() const;
};

// Lifted tracks standing in for a 2-D tracker plus depth: frame-0 foreground pixels on a
// `stride` grid are unprojected with the GT depth and moved with the GT motion of the nearest
// GT dynamic Gaussian.
std::vector<std::vector<Vec3>> make_tracks(const SyntheticSequence& seq, int stride);

TrainingData training_data_from(const SyntheticSequence& seq, int track_stride = 2);

}  // namespace blurgs
