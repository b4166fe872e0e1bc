#pragma once

#include "blurgs/optimize/training_data.hpp"
#include "blurgs/scene/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace blurgs {

struct InitConfig {
    int num_bases = 4;
    int static_stride = 3;       // pixel grid for lifting background points
    int kmeans_iterations = 50;
    double logit_scale = 2.0;    // initial logit of a track's own cluster
    double logit_noise = 0.1;
    double opacity = 0.7;
    double footprint = 0.5;      // isotropic scale in units of the lifted pixel spacing

    void validate() const;
};

// Best rigid transform (least squares) with dst ~ R src + t. Requires at least one point; fewer
// than three non-collinear points give a valid but non-unique rotation.
RigidTransform kabsch(std::span<const Vec3> src, std::span<const Vec3> dst);

// Lloyd's k-means with k-means++ seeding over equally sized feature rows. Returns the cluster of
// every row; deterministic in the seed.
std::vector<int> kmeans(const std::vector<std::vector<double>>& rows, int k, int iterations, std::uint64_t seed);

// Initial scene: dynamic Gaussians at the tracks' frame-0 points, motion bases fitted to
// k-means clusters of the track displacements, and static Gaussians lifted from background
// pixels of the first, middle and last frames with the depth prior. Colors come from the
// observations.
Scene initialize_scene(const TrainingData& data, const InitConfig& config, std::uint64_t seed);

}  // namespace blurgs
