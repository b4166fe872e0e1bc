#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>

namespace blurgs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

// Quaternions are stored as (w, x, y, z) in a Vec4.
namespace quat {

inline Vec4 identity() { return {1.0, 0.0, 0.0, 0.0}; }

inline Vec4 mul(const Vec4& p, const Vec4& q) {
    return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
            p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
            p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
            p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

// Adjoint of mul: given dL/dr for r = p*q, accumulate dL/dp and dL/dq.
inline void mul_backward(const Vec4& p, const Vec4& q, const Vec4& dr, Vec4& dp, Vec4& dq) {
    Eigen::Matrix4d left;  // r = left(p) * q
    left << p[0], -p[1], -p[2], -p[3],
            p[1], p[0], -p[3], p[2],
            p[2], p[3], p[0], -p[1],
            p[3], -p[2], p[1], p[0];
    Eigen::Matrix4d right;  // r = right(q) * p
    right << q[0], -q[1], -q[2], -q[3],
             q[1], q[0], q[3], -q[2],
             q[2], -q[3], q[0], q[1],
             q[3], q[2], -q[1], q[0];
    dq += left.transpose() * dr;
    dp += right.transpose() * dr;
}

inline Vec4 conjugate(const Vec4& q) { return {q[0], -q[1], -q[2], -q[3]}; }

inline Vec4 normalized(const Vec4& q) { return q / q.norm(); }

// y = x / |x|; returns dL/dx given dL/dy.
inline Vec4 normalize_backward(const Vec4& x, const Vec4& dy) {
    const double n = x.norm();
    const Vec4 y = x / n;
    return (dy - y * y.dot(dy)) / n;
}

inline Vec3 normalize_backward(const Vec3& x, const Vec3& dy) {
    const double n = x.norm();
    const Vec3 y = x / n;
    return (dy - y * y.dot(dy)) / n;
}

// Rotation matrix of a unit quaternion.
inline Mat3 to_matrix(const Vec4& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

// Differentiates the polynomial form above (q treated as unconstrained).
inline Vec4 to_matrix_backward(const Vec4& q, const Mat3& g) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Vec4 d;
    d[0] = 2 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
    d[1] = 2 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2 * x * g(1, 1) - w * g(1, 2) +
                z * g(2, 0) + w * g(2, 1) - 2 * x * g(2, 2));
    d[2] = 2 * (-2 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                w * g(2, 0) + z * g(2, 1) - 2 * y * g(2, 2));
    d[3] = 2 * (-2 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2 * z * g(1, 1) +
                y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
    return d;
}

inline Vec4 from_matrix(const Mat3& r) {
    Eigen::Quaterniond e(r);
    Vec4 q{e.w(), e.x(), e.y(), e.z()};
    return q[0] < 0 ? Vec4(-q) : q;
}

inline Vec4 from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized() * std::sin(angle / 2);
    return {std::cos(angle / 2), a[0], a[1], a[2]};
}

inline Vec3 rotate(const Vec4& q, const Vec3& v) { return to_matrix(q) * v; }

// Log map of a unit quaternion to an axis-angle vector (angle in [0, pi]).
Vec3 log_map(const Vec4& q);
// Adjoint of log_map with respect to the (unit) input quaternion components.
Vec4 log_map_backward(const Vec4& q, const Vec3& dlog);

// Normalized linear blend (nlerp); falls back to slerp for the angle test.
Vec4 slerp(const Vec4& a, const Vec4& b, double alpha);

// Rotation angle between two unit quaternions in radians.
double angle_between(const Vec4& a, const Vec4& b);

}  // namespace quat

struct RigidTransform {
    Vec4 rotation = quat::identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return quat::rotate(rotation, p) + translation; }
    Vec3 apply_inverse(const Vec3& p) const {
        return quat::to_matrix(rotation).transpose() * (p - translation);
    }
    Mat3 matrix() const { return quat::to_matrix(rotation); }
};

}  // namespace blurgs
