#include "blurgs/optimize/losses.hpp"

#include "blurgs/metrics/image_metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace blurgs {

namespace {

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

std::size_t valid_count(std::span<const double> valid, std::size_t n) {
    if (valid.empty()) return n;
    std::size_t c = 0;
    for (double v : valid) c += v > 0.5;
    return c;
}

bool is_valid(std::span<const double> valid, std::size_t p) { return valid.empty() || valid[p] > 0.5; }

}  // namespace

void LossWeights::validate() const {
    for (double w : {beta, depth, mask, smooth_bases, smooth_means, sparsity, sparsity_scale}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("loss weights must be finite and nonnegative");
    }
    if (beta > 1.0) throw std::invalid_argument("beta must lie in [0, 1]");
}

double reconstruction_loss(std::span<const double> pred, std::span<const double> target, int width, int height,
                           double beta, std::span<const double> valid, std::span<double> d_pred) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (pred.size() != 3 * n || target.size() != 3 * n) throw std::invalid_argument("reconstruction_loss: shape mismatch");
    const std::size_t count = valid_count(valid, n);
    if (count == 0) return 0.0;
    const double norm = 1.0 / (3.0 * static_cast<double>(count));
    double l1 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        if (!is_valid(valid, p)) continue;
        for (int c = 0; c < 3; ++c) {
            const double d = pred[3 * p + c] - target[3 * p + c];
            l1 += std::abs(d);
            if (!d_pred.empty()) d_pred[3 * p + c] += (1.0 - beta) * norm * sign(d);
        }
    }
    double loss = (1.0 - beta) * l1 * norm;
    if (beta > 0.0) {
        const double s = ssim(pred, target, width, height, 3, SsimOptions{}, valid, d_pred, -beta);
        loss += beta * (1.0 - s);
    }
    return loss;
}

double geometry_loss(const RenderOutput& render, std::span<const double> depth, std::span<const double> mask,
                     const LossWeights& weights, bool unseen, std::span<const double> valid, RenderGrad* d) {
    const std::size_t n = render.pixels();
    if (mask.size() != n || (!unseen && depth.size() != n)) throw std::invalid_argument("geometry_loss: shape mismatch");
    const std::size_t count = valid_count(valid, n);
    if (count == 0) return 0.0;
    const double norm = 1.0 / static_cast<double>(count);
    if (d) {
        if (d->depth.empty()) d->depth.assign(n, 0.0);
        if (d->mask.empty()) d->mask.assign(n, 0.0);
    }
    double ld = 0.0, lm = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        if (!is_valid(valid, p)) continue;
        const double em = render.mask[p] - mask[p];
        lm += std::abs(em);
        if (d) d->mask[p] += weights.mask * norm * sign(em);
        if (unseen) continue;
        const double ed = render.depth[p] - depth[p];
        ld += std::abs(ed);
        if (d) d->depth[p] += weights.depth * norm * sign(ed);
    }
    return weights.depth * ld * norm + weights.mask * lm * norm;
}

double smoothing_loss(const Scene& scene, const LossWeights& weights, Scene* grad) {
    const int frames = scene.num_frames(), nb = scene.num_bases();
    if (frames < 3) return 0.0;
    double loss = 0.0;
    const MotionBasisSet& bases = scene.bases;
    static constexpr double coeff[3] = {1.0, -2.0, 1.0};

    if (weights.smooth_bases > 0.0) {
        for (int b = 0; b < nb; ++b) {
            for (int t = 1; t + 1 < frames; ++t) {
                Vec3 acc_t = Vec3::Zero(), acc_r = Vec3::Zero();
                Vec4 qhat[3];
                for (int j = 0; j < 3; ++j) {
                    qhat[j] = quat::normalized(bases.rotation(t - 1 + j, b));
                    acc_t += coeff[j] * bases.translation(t - 1 + j, b);
                    acc_r += coeff[j] * quat::log_map(qhat[j]);
                }
                const double nt = acc_t.norm(), nr = acc_r.norm();
                loss += weights.smooth_bases * (nt + nr);
                if (!grad) continue;
                for (int j = 0; j < 3; ++j) {
                    const int f = t - 1 + j;
                    if (f == 0) continue;  // canonical frame is fixed
                    if (nt > 0) {
                        const Vec3 g = weights.smooth_bases * coeff[j] * acc_t / nt;
                        for (int k = 0; k < 3; ++k) grad->bases.translations[(f * nb + b) * 3 + k] += g[k];
                    }
                    if (nr > 0) {
                        const Vec3 dlog = weights.smooth_bases * coeff[j] * acc_r / nr;
                        const Vec4 dq = quat::normalize_backward(bases.rotation(f, b), quat::log_map_backward(qhat[j], dlog));
                        for (int k = 0; k < 4; ++k) grad->bases.rotations[(f * nb + b) * 4 + k] += dq[k];
                    }
                }
            }
        }
    }

    if (weights.smooth_means > 0.0) {
        std::vector<Vec3> mu(frames), dmu(frames);
        for (std::size_t g = 0; g < scene.dynamics.size(); ++g) {
            const Gaussian canonical = scene.dynamics.gaussian(g);
            const auto logits = scene.logits(g);
            for (int t = 0; t < frames; ++t) mu[t] = deform_gaussian(canonical, logits, bases, t).mean;
            for (auto& v : dmu) v.setZero();
            for (int t = 1; t + 1 < frames; ++t) {
                const Vec3 acc = mu[t - 1] - 2 * mu[t] + mu[t + 1];
                loss += weights.smooth_means * acc.squaredNorm();
                for (int j = 0; j < 3; ++j) dmu[t - 1 + j] += weights.smooth_means * 2 * coeff[j] * acc;
            }
            if (!grad) continue;
            for (int t = 0; t < frames; ++t) {
                GaussianGrad gg;
                gg.mean = dmu[t];
                deform_gaussian_backward(canonical, logits, bases, t, gg, grad->logits(g), grad->bases);
                grad->dynamics.accumulate(g, gg, scene.dynamics);
            }
        }
    }
    return loss;
}

}  // namespace blurgs
