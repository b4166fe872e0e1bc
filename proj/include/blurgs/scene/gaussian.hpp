#pragma once

#include "blurgs/scene/math.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace blurgs {

// Activated Gaussian in a single frame.
struct Gaussian {
    Vec3 mean = Vec3::Zero();
    Vec4 rotation = quat::identity();
    Vec3 scale = Vec3::Constant(0.01);
    double opacity = 0.5;
    Vec3 color = Vec3::Constant(0.5);
};

// Gradient of a loss with respect to the activated fields of a Gaussian.
// `rotation` is the gradient with respect to the raw (unnormalized) quaternion.
struct GaussianGrad {
    Vec3 mean = Vec3::Zero();
    Vec4 rotation = Vec4::Zero();
    Vec3 scale = Vec3::Zero();
    double opacity = 0.0;
    Vec3 color = Vec3::Zero();
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Structure-of-arrays storage of learnable Gaussian parameters.
// Scales are stored as logs, opacities as logits, colors raw (clamped by the optimizer).
struct GaussianCloud {
    std::vector<double> means;           // N x 3
    std::vector<double> quats;           // N x 4, (w, x, y, z)
    std::vector<double> log_scales;      // N x 3
    std::vector<double> opacity_logits;  // N
    std::vector<double> colors;          // N x 3

    std::size_t size() const { return opacity_logits.size(); }

    Gaussian gaussian(std::size_t i) const;
    void append(const Gaussian& g);
    void resize(std::size_t n);

    Vec3 mean(std::size_t i) const { return Vec3(means[3 * i], means[3 * i + 1], means[3 * i + 2]); }
    Vec4 quat(std::size_t i) const {
        return Vec4(quats[4 * i], quats[4 * i + 1], quats[4 * i + 2], quats[4 * i + 3]);
    }

    // Adds a gradient expressed on activated fields to this cloud, used as a gradient buffer.
    void accumulate(std::size_t i, const GaussianGrad& grad, const GaussianCloud& params);

    template <typename F>
    void for_each_tensor(const std::string& prefix, F&& f) {
        f(prefix + "means", std::span<double>(means));
        f(prefix + "quats", std::span<double>(quats));
        f(prefix + "log_scales", std::span<double>(log_scales));
        f(prefix + "opacity_logits", std::span<double>(opacity_logits));
        f(prefix + "colors", std::span<double>(colors));
    }

    // A cloud of the same size with all entries zero.
    GaussianCloud zeros_like() const;
    // Unit quaternions and colors in [0, 1].
    void project_to_constraints();
};

}  // namespace blurgs
