#pragma once

#include "blurgs/scene/gaussian.hpp"
#include "blurgs/scene/motion.hpp"

#include <span>
#include <string>
#include <vector>

namespace blurgs {

// Static and dynamic Gaussians plus the shared motion bases. Dynamic Gaussians are stored in
// the canonical frame (frame 0); `motion_logits` holds one N_b row per dynamic Gaussian.
// The same type doubles as a gradient / optimizer-moment buffer.
struct Scene {
    GaussianCloud statics;
    GaussianCloud dynamics;
    std::vector<double> motion_logits;  // dynamics.size() x num_bases
    MotionBasisSet bases;

    int num_bases() const { return bases.num_bases; }
    int num_frames() const { return bases.num_frames; }

    std::span<const double> logits(std::size_t dyn) const {
        return {motion_logits.data() + dyn * bases.num_bases, static_cast<std::size_t>(bases.num_bases)};
    }
    std::span<double> logits(std::size_t dyn) {
        return {motion_logits.data() + dyn * bases.num_bases, static_cast<std::size_t>(bases.num_bases)};
    }

    // Dynamic Gaussian `dyn` deformed into frame t.
    Gaussian dynamic_at(std::size_t dyn, int t) const;

    void append_dynamic(const Gaussian& canonical, std::span<const double> logits);

    Scene zeros_like() const;
    void project_to_constraints();

    template <typename F>
    void for_each_tensor(F&& f) {
        statics.for_each_tensor("static.", f);
        dynamics.for_each_tensor("dynamic.", f);
        f(std::string("dynamic.motion_logits"), std::span<double>(motion_logits));
        bases.for_each_tensor("bases.", f);
    }
};

// Validates the structural invariants (sizes, unit quaternions, identity canonical frame).
// Throws std::invalid_argument with a description on failure.
void validate_scene(const Scene& scene);

}  // namespace blurgs
