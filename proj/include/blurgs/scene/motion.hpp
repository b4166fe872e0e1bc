#pragma once

#include "blurgs/scene/gaussian.hpp"

#include <span>
#include <string>
#include <vector>

namespace blurgs {

// Per-frame rigid transforms of N_b motion bases, mapping the canonical frame 0 to frame t.
// Frame 0 is the canonical frame: its transforms are the identity and are never learned.
struct MotionBasisSet {
    int num_bases = 0;
    int num_frames = 0;
    std::vector<double> rotations;     // T x B x 4, raw quaternions (normalized on use)
    std::vector<double> translations;  // T x B x 3

    static MotionBasisSet identity(int num_bases, int num_frames);

    Vec4 rotation(int t, int b) const;
    Vec3 translation(int t, int b) const;
    RigidTransform transform(int t, int b) const;
    void set(int t, int b, const RigidTransform& tr);

    void check_frame(int t) const;
    MotionBasisSet zeros_like() const;
    void project_to_constraints();

    template <typename F>
    void for_each_tensor(const std::string& prefix, F&& f) {
        f(prefix + "rotations", std::span<double>(rotations));
        f(prefix + "translations", std::span<double>(translations));
    }
};

std::vector<double> softmax(std::span<const double> logits);

// Blends basis transforms with simplex weights: translations linearly, rotations as the
// normalized, sign-aligned weighted quaternion sum. Throws std::out_of_range on a bad frame.
RigidTransform blend_motion(std::span<const double> weights, const MotionBasisSet& bases, int t);

// blend_motion(softmax(coeff_logits), ...).
RigidTransform compose_motion(std::span<const double> coeff_logits, const MotionBasisSet& bases,
                              int t);

// Adjoint of compose_motion. Accumulates into d_logits and d_bases (frame t entries).
void compose_motion_backward(std::span<const double> coeff_logits, const MotionBasisSet& bases,
                             int t, const Vec4& d_rotation, const Vec3& d_translation,
                             std::span<double> d_logits, MotionBasisSet& d_bases);

// mu_t = R mu_0 + t, R_t = R R_0. Scale, opacity and color pass through.
Gaussian deform_gaussian(const Gaussian& canonical, std::span<const double> coeff_logits,
                         const MotionBasisSet& bases, int t);

// Adjoint of deform_gaussian. `grad` holds gradients on the deformed gaussian; its mean and
// rotation entries are replaced by gradients on the canonical mean and raw rotation.
void deform_gaussian_backward(const Gaussian& canonical, std::span<const double> coeff_logits,
                              const MotionBasisSet& bases, int t, GaussianGrad& grad,
                              std::span<double> d_logits, MotionBasisSet& d_bases);

}  // namespace blurgs
