#pragma once

#include "blurgs/scene/camera.hpp"

#include <span>
#include <vector>

namespace blurgs {

// Camera between two adjacent training cameras: center lerped, rotation slerped, intrinsics
// and frame taken from cam_a. Throws std::domain_error unless 0 < alpha < 1.
Camera make_parallel_view(const Camera& cam_a, const Camera& cam_b, double alpha);

enum class PerpendicularMode {
    ViewPlane,   // normal to the tangent and the viewing direction (in the image plane)
    Horizontal,  // normal to the tangent and the camera up vector
};

// Offsets the source camera by `offset` along the unit normal to the local trajectory tangent,
// then re-aims it at the source's look-at point (the point `look_depth` along its optical axis).
// `side` is +1 or -1. A stationary trajectory falls back to the camera-right axis. Throws
// std::invalid_argument when the trajectory has fewer than two cameras.
Camera make_perpendicular_view(const Camera& source, std::span<const Camera> trajectory, int index, double offset,
                               double look_depth, int side = 1, PerpendicularMode mode = PerpendicularMode::ViewPlane);

// Unit trajectory normal used by make_perpendicular_view (before the side sign).
Vec3 perpendicular_direction(std::span<const Camera> trajectory, int index, PerpendicularMode mode);

struct WarpedTargets {
    int width = 0;
    int height = 0;
    std::vector<double> color;  // H x W x 3
    std::vector<double> mask;   // H x W
    std::vector<double> valid;  // H x W, 1 where at least one sample was kept
};

struct WarpOptions {
    double zbuffer_tolerance = 0.01;  // keep samples within this relative depth of the nearest
};

// Forward-warps every source pixel with positive depth into cam_t and splats its color and mask
// onto the four neighboring target pixels with bilinear weights (reversed bilinear sampling).
// Per target pixel only samples within the z-buffer tolerance of the nearest warped depth are
// kept; kept weights are normalized.
WarpedTargets warp_to_unseen(std::span<const double> color, std::span<const double> mask,
                             std::span<const double> depth, const Camera& cam_s, const Camera& cam_t,
                             const WarpOptions& options = {});

}  // namespace blurgs
