#include "blurgs/unseen/unseen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blurgs {

namespace {

constexpr double kMinWeight = 1e-9;

Camera with_pose(const Camera& base, const Mat3& rotation, const Vec3& center) {
    Camera c = base;
    c.rotation = rotation;
    c.translation = -rotation * center;
    return c;
}

}  // namespace

Camera make_parallel_view(const Camera& cam_a, const Camera& cam_b, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("make_parallel_view: alpha must lie in (0, 1)");
    const Vec3 center = (1.0 - alpha) * cam_a.center() + alpha * cam_b.center();
    const Vec4 q = quat::slerp(quat::from_matrix(cam_a.rotation), quat::from_matrix(cam_b.rotation), alpha);
    return with_pose(cam_a, quat::to_matrix(q), center);
}

Vec3 perpendicular_direction(std::span<const Camera> trajectory, int index, PerpendicularMode mode) {
    if (trajectory.size() < 2) throw std::invalid_argument("perpendicular view needs at least two cameras");
    const int n = static_cast<int>(trajectory.size());
    if (index < 0 || index >= n) throw std::out_of_range("perpendicular view: camera index out of range");
    const int lo = std::max(0, index - 1), hi = std::min(n - 1, index + 1);
    const Vec3 tangent = trajectory[hi].center() - trajectory[lo].center();
    const Camera& cam = trajectory[index];
    const Vec3 right = cam.rotation.row(0).transpose();
    if (tangent.norm() < 1e-9) return right.normalized();
    const Vec3 other = mode == PerpendicularMode::ViewPlane ? Vec3(cam.rotation.row(2).transpose())
                                                          : Vec3(-cam.rotation.row(1).transpose());
    const Vec3 nrm = tangent.normalized().cross(other);
    if (nrm.norm() < 1e-9) return right.normalized();
    return nrm.normalized();
}

Camera make_perpendicular_view(const Camera& source, std::span<const Camera> trajectory, int index, double offset,
                               double look_depth, int side, PerpendicularMode mode) {
    const Vec3 dir = perpendicular_direction(trajectory, index, mode);
    if (offset == 0.0) return source;
    const Vec3 forward = source.rotation.row(2).transpose();
    const Vec3 up = -source.rotation.row(1).transpose();
    const Vec3 look_point = source.center() + look_depth * forward;
    const Vec3 center = source.center() + (side < 0 ? -offset : offset) * dir;
    Camera c = Camera::look_at(source.intrinsics, source.width, source.height, center, look_point, up);
    c.frame = source.frame;
    return c;
}

WarpedTargets warp_to_unseen(std::span<const double> color, std::span<const double> mask,
                             std::span<const double> depth, const Camera& cam_s, const Camera& cam_t,
                             const WarpOptions& options) {
    const int ws = cam_s.width, hs = cam_s.height, wt = cam_t.width, ht = cam_t.height;
    const std::size_t ns = static_cast<std::size_t>(ws) * hs, nt = static_cast<std::size_t>(wt) * ht;
    if (color.size() != 3 * ns || mask.size() != ns || depth.size() != ns) {
        throw std::invalid_argument("warp_to_unseen: source buffers do not match the camera");
    }
    struct Sample {
        std::size_t src;
        int x0, y0;
        double fx, fy, z;
    };
    std::vector<Sample> samples;
    samples.reserve(ns);
    for (int y = 0; y < hs; ++y) {
        for (int x = 0; x < ws; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * ws + x;
            if (!(depth[p] > 0.0)) continue;
            const Vec3 world = unproject(Vec2(x, y), depth[p], cam_s);
            const auto proj = project(world, cam_t);
            if (!proj) continue;
            const double px = proj->pixel.x(), py = proj->pixel.y();
            if (!(px > -1.0 && px < wt && py > -1.0 && py < ht)) continue;
            const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
            samples.push_back({p, x0, y0, px - x0, py - y0, proj->depth});
        }
    }

    auto for_each_target = [&](const Sample& s, auto&& fn) {
        const double w[4] = {(1 - s.fx) * (1 - s.fy), s.fx * (1 - s.fy), (1 - s.fx) * s.fy, s.fx * s.fy};
        const int xs[4] = {s.x0, s.x0 + 1, s.x0, s.x0 + 1}, ys[4] = {s.y0, s.y0, s.y0 + 1, s.y0 + 1};
        for (int k = 0; k < 4; ++k) {
            if (w[k] < kMinWeight || xs[k] < 0 || xs[k] >= wt || ys[k] < 0 || ys[k] >= ht) continue;
            fn(static_cast<std::size_t>(ys[k]) * wt + xs[k], w[k]);
        }
    };

    std::vector<double> zmin(nt, std::numeric_limits<double>::infinity());
    for (const Sample& s : samples) {
        for_each_target(s, [&](std::size_t q, double) { zmin[q] = std::min(zmin[q], s.z); });
    }
    WarpedTargets out;
    out.width = wt;
    out.height = ht;
    out.color.assign(3 * nt, 0.0);
    out.mask.assign(nt, 0.0);
    out.valid.assign(nt, 0.0);
    std::vector<double> wsum(nt, 0.0);
    for (const Sample& s : samples) {
        for_each_target(s, [&](std::size_t q, double w) {
            if (s.z > zmin[q] * (1.0 + options.zbuffer_tolerance)) return;
            wsum[q] += w;
            for (int c = 0; c < 3; ++c) out.color[3 * q + c] += w * color[3 * s.src + c];
            out.mask[q] += w * mask[s.src];
        });
    }
    for (std::size_t q = 0; q < nt; ++q) {
        if (wsum[q] <= 0.0) continue;
        out.valid[q] = 1.0;
        for (int c = 0; c < 3; ++c) out.color[3 * q + c] /= wsum[q];
        out.mask[q] /= wsum[q];
    }
    return out;
}

}  // namespace blurgs
