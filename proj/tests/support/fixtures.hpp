#pragma once

// Shared fixtures for the unit and acceptance suites: random micro-scenes and a central
// finite-difference gradient checker that is independent of the analytic backward passes.

#include "blurgs/blur/blur_path.hpp"
#include "blurgs/optimize/objective.hpp"
#include "blurgs/render/render.hpp"
#include "blurgs/scene/camera.hpp"
#include "blurgs/scene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace blurgs::testing {

inline Camera make_camera(int width, int height, double focal, const Vec3& eye = Vec3::Zero(),
                          const Vec3& target = Vec3(0, 0, 1)) {
    Mat3 k = Mat3::Identity();
    k(0, 0) = focal;
    k(1, 1) = focal;
    k(0, 2) = (width - 1) / 2.0;
    k(1, 2) = (height - 1) / 2.0;
    return Camera::look_at(k, width, height, eye, target, Vec3(0, -1, 0));
}

inline Vec4 random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return quat::normalized(Vec4(n(rng), n(rng), n(rng), n(rng)));
}

inline Vec4 small_rotation(std::mt19937_64& rng, double max_angle) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, max_angle);
    return quat::from_axis_angle(Vec3(n(rng), n(rng), n(rng)), u(rng));
}

// Random scene in front of a camera at the origin looking down +z.
inline Scene random_scene(std::mt19937_64& rng, int num_static, int num_dynamic, int num_bases,
                          int num_frames, double focal = 30.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scene s;
    s.bases = MotionBasisSet::identity(num_bases, num_frames);
    for (int t = 1; t < num_frames; ++t) {
        for (int b = 0; b < num_bases; ++b) {
            s.bases.set(t, b, {small_rotation(rng, 0.3), Vec3(0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5),
                                                             0.1 * (u(rng) - 0.5))});
        }
    }
    auto make = [&] {
        Gaussian g;
        const double z = 2.0 + 2.0 * u(rng);
        const double half = 0.45 * z * 32.0 / focal;
        g.mean = Vec3((2 * u(rng) - 1) * half, (2 * u(rng) - 1) * half, z);
        g.rotation = random_quat(rng);
        g.scale = Vec3(0.04 + 0.12 * u(rng), 0.04 + 0.12 * u(rng), 0.04 + 0.12 * u(rng));
        g.opacity = 0.15 + 0.7 * u(rng);
        g.color = Vec3(u(rng), u(rng), u(rng));
        return g;
    };
    for (int i = 0; i < num_static; ++i) s.statics.append(make());
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < num_dynamic; ++i) {
        std::vector<double> logits(num_bases);
        for (double& l : logits) l = n(rng);
        s.append_dynamic(make(), logits);
    }
    return s;
}

struct TensorCheck {
    std::string name;
    std::size_t checked = 0;
    double max_error = 0.0;  // |a - fd| / max(floor, |a|, |fd|)
};

// Compares `analytic` (a Scene used as a gradient buffer) with central differences of `loss`
// at `scene`, over up to `per_tensor` entries of each tensor. Frame-0 basis entries are skipped
// because they are fixed by construction.
inline std::vector<TensorCheck> check_scene_gradient(Scene scene, Scene analytic,
                                                     const std::function<double(const Scene&)>& loss,
                                                     double step, std::size_t per_tensor,
                                                     std::mt19937_64& rng, double floor = 1.0) {
    std::vector<std::pair<std::string, std::span<double>>> params, grads;
    scene.for_each_tensor([&](const std::string& n, std::span<double> v) { params.emplace_back(n, v); });
    analytic.for_each_tensor([&](const std::string& n, std::span<double> v) { grads.emplace_back(n, v); });
    const std::size_t frame0_rot = 4 * static_cast<std::size_t>(scene.bases.num_bases);
    const std::size_t frame0_trans = 3 * static_cast<std::size_t>(scene.bases.num_bases);
    std::vector<TensorCheck> out;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& [name, values] = params[k];
        TensorCheck tc{name};
        std::size_t first = 0;
        if (name == "bases.rotations") first = frame0_rot;
        if (name == "bases.translations") first = frame0_trans;
        if (values.size() <= first) {
            out.push_back(tc);
            continue;
        }
        std::vector<std::size_t> idx(values.size() - first);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = first + i;
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(idx.size(), per_tensor));
        for (std::size_t i : idx) {
            const double orig = values[i];
            values[i] = orig + step;
            const double lp = loss(scene);
            values[i] = orig - step;
            const double lm = loss(scene);
            values[i] = orig;
            const double fd = (lp - lm) / (2 * step);
            const double a = grads[k].second[i];
            tc.max_error = std::max(tc.max_error, std::abs(a - fd) / std::max({floor, std::abs(a), std::abs(fd)}));
            ++tc.checked;
        }
        out.push_back(tc);
    }
    return out;
}

inline double linear_functional(const RenderOutput& out, const RenderGrad& w) {
    double l = 0.0;
    for (std::size_t i = 0; i < out.image.size(); ++i) l += w.image[i] * out.image[i];
    for (std::size_t i = 0; i < out.depth.size(); ++i) l += w.depth[i] * out.depth[i] + w.mask[i] * out.mask[i];
    return l;
}

inline RenderGrad random_functional(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RenderGrad g = RenderGrad::zeros(width, height);
    for (double& v : g.image) v = u(rng);
    for (double& v : g.depth) v = 0.1 * u(rng);
    for (double& v : g.mask) v = u(rng);
    return g;
}

// Forward-only recomposition of the total loss from the public building blocks. The sparsity
// target uses `frozen_intensity` so that finite differences see the stop-gradient.
inline double composed_total_loss(const Scene& scene, const BlurNet<double>& net, const ViewTargets& view,
                                  const StageFlags& flags, const LossWeights& weights,
                                  const RenderSettings& settings, std::span<const double> frozen_intensity) {
    const RenderOutput out = render(scene, *view.camera, view.frame, settings);
    double loss = 0.0;
    std::vector<double> pred = out.image;
    if (flags.blur) {
        BlurPathCache<double> c;
        pred = blur_forward(net, out, view.embedding, c);
        if (flags.sparsity) {
            BlurField f = c.field();
            f.intensity.assign(frozen_intensity.begin(), frozen_intensity.end());
            loss += weights.sparsity * sparsity_loss(f, weights.sparsity_scale);
        }
    }
    loss += reconstruction_loss(pred, view.color, out.width, out.height, weights.beta, view.valid);
    loss += geometry_loss(out, view.depth, view.mask, weights, flags.unseen, view.valid);
    return loss + smoothing_loss(scene, weights);
}

// Central differences over up to `per_tensor` random entries of every BP-Net tensor.
inline std::vector<TensorCheck> check_net_gradient(BlurNet<double> net, BlurNet<double> analytic,
                                                   const std::function<double(const BlurNet<double>&)>& loss,
                                                   double step, std::size_t per_tensor, std::mt19937_64& rng,
                                                   double floor = 1.0) {
    std::vector<std::pair<std::string, std::span<double>>> params, grads;
    net.for_each_tensor([&](const std::string& n, std::span<double> v) { params.emplace_back(n, v); });
    analytic.for_each_tensor([&](const std::string& n, std::span<double> v) { grads.emplace_back(n, v); });
    std::vector<TensorCheck> out;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& [name, values] = params[k];
        TensorCheck tc{name};
        std::vector<std::size_t> idx(values.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(idx.size(), per_tensor));
        for (std::size_t i : idx) {
            const double orig = values[i];
            values[i] = orig + step;
            const double lp = loss(net);
            values[i] = orig - step;
            const double lm = loss(net);
            values[i] = orig;
            const double fd = (lp - lm) / (2 * step);
            const double a = grads[k].second[i];
            tc.max_error = std::max(tc.max_error, std::abs(a - fd) / std::max({floor, std::abs(a), std::abs(fd)}));
            ++tc.checked;
        }
        out.push_back(tc);
    }
    return out;
}

// Gives the final BP-Net layer random weights so gradients reach every tensor.
template <typename T>
void randomize_head(BlurNet<T>& net, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    for (Eigen::Index i = 0; i < net.predict[3].weight.size(); ++i) net.predict[3].weight.data()[i] = static_cast<T>(n(rng));
    for (Eigen::Index i = 0; i < net.predict[3].bias.size(); ++i) net.predict[3].bias.data()[i] = static_cast<T>(n(rng));
    for (auto& c : net.features) {
        for (Eigen::Index i = 0; i < c.bias.size(); ++i) c.bias.data()[i] = static_cast<T>(0.1 * n(rng) / scale);
    }
}

// Direct-summation SSIM: every fully inside 11 x 11 Gaussian window (sigma 1.5), every channel.
inline double naive_ssim(const std::vector<double>& a, const std::vector<double>& b, int w, int h, int channels) {
    const int k = 11, r = 5;
    double wsum = 0.0;
    std::vector<double> win(k * k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            win[i * k + j] = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / (2 * 1.5 * 1.5));
            wsum += win[i * k + j];
        }
    }
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    int count = 0;
    for (int c = 0; c < channels; ++c) {
        for (int y = r; y < h - r; ++y) {
            for (int x = r; x < w - r; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < k; ++i) {
                    for (int j = 0; j < k; ++j) {
                        const std::size_t p = static_cast<std::size_t>((y + i - r) * w + (x + j - r)) * channels + c;
                        const double wt = win[i * k + j] / wsum;
                        ma += wt * a[p];
                        mb += wt * b[p];
                        saa += wt * a[p] * a[p];
                        sbb += wt * b[p] * b[p];
                        sab += wt * a[p] * b[p];
                    }
                }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        }
    }
    return total / count;
}

}  // namespace blurgs::testing
