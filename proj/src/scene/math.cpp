#include "blurgs/scene/math.hpp"

#include <algorithm>

namespace blurgs::quat {

namespace {

// f(n, w) = 2 atan2(n, w) / n, and its partials, stable near n = 0.
struct LogScale {
    double f, df_dn_over_n, df_dw;
};

LogScale log_scale(double n, double w) {
    const double r2 = n * n + w * w;
    if (n < 1e-6) {
        // Series in n around 0 for w > 0.
        const double w2 = w * w;
        return {2.0 / w - 2.0 * n * n / (3.0 * w2 * w), -4.0 / (3.0 * w2 * w), -2.0 / r2};
    }
    const double theta = 2.0 * std::atan2(n, w);
    const double f = theta / n;
    const double df_dn = (2.0 * w / r2) / n - theta / (n * n);
    return {f, df_dn / n, -2.0 / r2};
}

}  // namespace

Vec3 log_map(const Vec4& q_in) {
    const Vec4 q = q_in[0] < 0 ? Vec4(-q_in) : q_in;
    const Vec3 v = q.tail<3>();
    const LogScale s = log_scale(v.norm(), q[0]);
    return s.f * v;
}

Vec4 log_map_backward(const Vec4& q_in, const Vec3& dlog) {
    const double sign = q_in[0] < 0 ? -1.0 : 1.0;
    const Vec4 q = sign * q_in;
    const Vec3 v = q.tail<3>();
    const LogScale s = log_scale(v.norm(), q[0]);
    // out = f(n, w) v
    Vec4 d;
    d.tail<3>() = s.f * dlog + v * (s.df_dn_over_n * v.dot(dlog));
    d[0] = s.df_dw * v.dot(dlog);
    return sign * d;
}

Vec4 slerp(const Vec4& a, const Vec4& b_in, double alpha) {
    Vec4 b = b_in;
    double d = a.dot(b);
    if (d < 0) {
        b = -b;
        d = -d;
    }
    if (d > 1.0 - 1e-12) return normalized((1 - alpha) * a + alpha * b);
    const double theta = std::acos(std::clamp(d, -1.0, 1.0));
    const double s = std::sin(theta);
    return normalized((std::sin((1 - alpha) * theta) / s) * a + (std::sin(alpha * theta) / s) * b);
}

double angle_between(const Vec4& a, const Vec4& b) {
    const double d = std::min(1.0, std::abs(a.dot(b)));
    return 2.0 * std::acos(d);
}

}  // namespace blurgs::quat
