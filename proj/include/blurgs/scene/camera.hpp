#pragma once

#include "blurgs/scene/math.hpp"

#include <optional>
#include <stdexcept>

namespace blurgs {

inline constexpr double kNearPlane = 1e-4;

// Pinhole camera. Pixel (x, y) has its center at continuous coordinates (x, y).
struct Camera {
    Mat3 intrinsics = Mat3::Identity();
    Mat3 rotation = Mat3::Identity();   // world -> camera
    Vec3 translation = Vec3::Zero();    // world -> camera
    int width = 0;
    int height = 0;
    int frame = 0;

    Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
    Vec3 center() const { return -rotation.transpose() * translation; }
    double fx() const { return intrinsics(0, 0); }
    double fy() const { return intrinsics(1, 1); }

    // Throws std::invalid_argument on a malformed camera.
    void validate() const;

    static Camera look_at(const Mat3& intrinsics, int width, int height, const Vec3& eye,
                          const Vec3& target, const Vec3& up_hint);
};

struct Projection {
    Vec2 pixel;
    double depth;
};

// Empty when the point lies behind the near plane.
std::optional<Projection> project(const Vec3& world, const Camera& cam);

// Throws std::domain_error when depth <= 0.
Vec3 unproject(const Vec2& pixel, double depth, const Camera& cam);

}  // namespace blurgs
