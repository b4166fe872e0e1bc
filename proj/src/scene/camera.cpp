#include "blurgs/scene/camera.hpp"

#include <cmath>

namespace blurgs {

void Camera::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera: non-positive image size");
    if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0)
        throw std::invalid_argument("camera: intrinsics must be upper triangular");
    if (intrinsics(2, 2) != 1.0) throw std::invalid_argument("camera: K[2][2] must be 1");
    if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0))
        throw std::invalid_argument("camera: focal lengths must be positive");
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-6 || std::abs(rotation.determinant() - 1.0) > 1e-6)
        throw std::invalid_argument("camera: extrinsic rotation is not a proper rotation");
}

Camera Camera::look_at(const Mat3& intrinsics, int width, int height, const Vec3& eye,
                       const Vec3& target, const Vec3& up_hint) {
    // Camera axes: x right, y down, z forward.
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up_hint);
    if (right.norm() < 1e-12) right = forward.unitOrthogonal();
    right.normalize();
    const Vec3 down = forward.cross(right);
    Camera cam;
    cam.intrinsics = intrinsics;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * eye;
    cam.width = width;
    cam.height = height;
    return cam;
}

std::optional<Projection> project(const Vec3& world, const Camera& cam) {
    const Vec3 pc = cam.to_camera(world);
    if (pc.z() <= kNearPlane) return std::nullopt;
    const Vec3 h = cam.intrinsics * pc;
    return Projection{{h.x() / h.z(), h.y() / h.z()}, pc.z()};
}

Vec3 unproject(const Vec2& pixel, double depth, const Camera& cam) {
    if (!(depth > 0.0)) throw std::domain_error("unproject: depth must be positive");
    const Vec3 ray = cam.intrinsics.triangularView<Eigen::Upper>().solve(Vec3(pixel.x(), pixel.y(), 1.0));
    const Vec3 pc = ray * (depth / ray.z());
    return cam.rotation.transpose() * (pc - cam.translation);
}

}  // namespace blurgs
