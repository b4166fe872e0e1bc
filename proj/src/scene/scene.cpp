#include "blurgs/scene/scene.hpp"

#include <stdexcept>

namespace blurgs {

Gaussian Scene::dynamic_at(std::size_t dyn, int t) const {
    return deform_gaussian(dynamics.gaussian(dyn), logits(dyn), bases, t);
}

void Scene::append_dynamic(const Gaussian& canonical, std::span<const double> logits_row) {
    if (static_cast<int>(logits_row.size()) != bases.num_bases)
        throw std::invalid_argument("append_dynamic: coefficient length must equal basis count");
    dynamics.append(canonical);
    motion_logits.insert(motion_logits.end(), logits_row.begin(), logits_row.end());
}

Scene Scene::zeros_like() const {
    Scene z;
    z.statics = statics.zeros_like();
    z.dynamics = dynamics.zeros_like();
    z.motion_logits.assign(motion_logits.size(), 0.0);
    z.bases = bases.zeros_like();
    return z;
}

void Scene::project_to_constraints() {
    statics.project_to_constraints();
    dynamics.project_to_constraints();
    bases.project_to_constraints();
}

void validate_scene(const Scene& scene) {
    auto check_cloud = [](const GaussianCloud& c, const char* what) {
        const std::size_t n = c.size();
        if (c.means.size() != 3 * n || c.quats.size() != 4 * n || c.log_scales.size() != 3 * n ||
            c.colors.size() != 3 * n)
            throw std::invalid_argument(std::string(what) + ": inconsistent tensor sizes");
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(c.quat(i).norm() - 1.0) > 1e-6)
                throw std::invalid_argument(std::string(what) + ": non-unit quaternion");
        }
    };
    check_cloud(scene.statics, "static gaussians");
    check_cloud(scene.dynamics, "dynamic gaussians");
    if (scene.motion_logits.size() != scene.dynamics.size() * scene.bases.num_bases)
        throw std::invalid_argument("motion coefficients: length must equal basis count");
    const MotionBasisSet& b = scene.bases;
    const std::size_t n = static_cast<std::size_t>(b.num_bases) * b.num_frames;
    if (b.rotations.size() != 4 * n || b.translations.size() != 3 * n)
        throw std::invalid_argument("motion bases: inconsistent tensor sizes");
    for (int t = 0; t < b.num_frames; ++t) {
        for (int k = 0; k < b.num_bases; ++k) {
            const Vec4 q = b.rotation(t, k);
            if (std::abs(q.norm() - 1.0) > 1e-6)
                throw std::invalid_argument("motion bases: non-unit quaternion");
            if (t == 0 && ((q - quat::identity()).norm() > 1e-12 || b.translation(0, k).norm() > 1e-12))
                throw std::invalid_argument("motion bases: canonical frame must be identity");
        }
    }
}

}  // namespace blurgs
