#include "blurgs/densify/densify.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace blurgs {

void DensifyConfig::validate() const {
    if (trigger_iteration <= 0) throw std::invalid_argument("densify trigger iteration must be positive");
    if (pixels_per_frame <= 0) throw std::invalid_argument("densify pixels per frame must be positive");
    if (!(opacity > 0.0 && opacity < 1.0)) throw std::invalid_argument("densify opacity must lie in (0, 1)");
}

std::vector<PixelSample> sample_dynamic_pixels(std::span<const double> mask, std::span<const double> depth,
                                               int width, int height, int n, std::uint64_t seed) {
    const std::size_t np = static_cast<std::size_t>(width) * height;
    if (mask.size() != np || depth.size() != np) throw std::invalid_argument("sample_dynamic_pixels: shape mismatch");
    std::vector<std::size_t> support;
    for (std::size_t p = 0; p < np; ++p) {
        if (mask[p] > 0.5) support.push_back(p);
    }
    std::mt19937_64 rng(seed);
    const std::size_t take = std::min<std::size_t>(support.size(), static_cast<std::size_t>(std::max(n, 0)));
    // Partial Fisher-Yates: the first `take` entries are a uniform sample without replacement.
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, support.size() - 1);
        std::swap(support[i], support[pick(rng)]);
    }
    std::vector<PixelSample> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t p = support[i];
        out.push_back({static_cast<int>(p % width), static_cast<int>(p / width), depth[p]});
    }
    return out;
}

Vec3 lift_to_observation(const PixelSample& s, const Camera& cam) {
    return unproject(Vec2(s.x, s.y), s.depth, cam);
}

Remapped remap_to_canonical(const Vec3& observed, const Scene& scene, int t) {
    if (scene.dynamics.size() == 0) throw std::logic_error("remap_to_canonical: no dynamic Gaussians");
    scene.bases.check_frame(t);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < scene.dynamics.size(); ++g) {
        const RigidTransform tr = compose_motion(scene.logits(g), scene.bases, t);
        const double d = (tr.apply(scene.dynamics.mean(g)) - observed).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = g;
        }
    }
    const RigidTransform tr = compose_motion(scene.logits(best), scene.bases, t);
    return {tr.apply_inverse(observed), best};
}

std::size_t densify(Scene& scene, std::span<const DensifyFrame> frames, const DensifyConfig& config,
                    std::uint64_t seed) {
    config.validate();
    if (scene.dynamics.size() == 0) return 0;
    struct Pending {
        Vec3 canonical;
        Vec3 color;
        std::size_t neighbor;
    };
    std::vector<Pending> pending;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const DensifyFrame& fr = frames[f];
        const Camera& cam = *fr.camera;
        const auto samples = sample_dynamic_pixels(fr.mask, fr.depth, cam.width, cam.height, config.pixels_per_frame,
                                                   seed + 7919 * static_cast<std::uint64_t>(f + 1));
        for (const PixelSample& s : samples) {
            if (!(s.depth > 0.0)) continue;
            const Vec3 obs = lift_to_observation(s, cam);
            const Remapped r = remap_to_canonical(obs, scene, fr.frame);
            const std::size_t p = static_cast<std::size_t>(s.y) * cam.width + s.x;
            pending.push_back({r.canonical, Vec3(fr.image[3 * p], fr.image[3 * p + 1], fr.image[3 * p + 2]), r.neighbor});
        }
    }
    if (pending.empty()) return 0;

    double scale = 0.0;
    if (pending.size() > 1) {
        for (std::size_t i = 0; i < pending.size(); ++i) {
            double nn = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < pending.size(); ++j) {
                if (i != j) nn = std::min(nn, (pending[i].canonical - pending[j].canonical).norm());
            }
            scale += nn;
        }
        scale /= static_cast<double>(pending.size());
    }
    if (!(scale > 1e-6)) scale = 0.01;

    const std::size_t nb = static_cast<std::size_t>(scene.num_bases());
    for (const Pending& p : pending) {
        Gaussian g;
        g.mean = p.canonical;
        g.scale = Vec3::Constant(scale);
        g.opacity = config.opacity;
        g.color = p.color;
        const std::vector<double> logits(scene.motion_logits.begin() + p.neighbor * nb,
                                         scene.motion_logits.begin() + (p.neighbor + 1) * nb);
        scene.append_dynamic(g, logits);
    }
    return pending.size();
}

}  // namespace blurgs
