#pragma once

#include "blurgs/render/rasterizer.hpp"
#include "blurgs/scene/scene.hpp"

#include <span>

namespace blurgs {

struct LossWeights {
    double beta = 0.2;  // SSIM share of the reconstruction loss
    double depth = 0.075;
    double mask = 0.075;
    double smooth_bases = 0.1;
    double smooth_means = 0.1;
    double sparsity = 1.0;
    double sparsity_scale = 5.0;

    void validate() const;
};

// (1 - beta) mean|pred - target| + beta (1 - SSIM(pred, target)) over H x W x 3 images. With a
// validity map the L1 mean runs over valid pixels and SSIM over fully valid windows. Gradients
// with respect to `pred` accumulate into d_pred when it is non-empty.
double reconstruction_loss(std::span<const double> pred, std::span<const double> target, int width, int height,
                           double beta, std::span<const double> valid = {}, std::span<double> d_pred = {});

// lambda_depth mean|D~ - D| + lambda_mask mean|M~ - M|. The depth term is dropped entirely when
// `unseen` is set; means run over valid pixels when a validity map is given. Gradients accumulate
// into d.depth / d.mask (resized if empty).
double geometry_loss(const RenderOutput& render, std::span<const double> depth, std::span<const double> mask,
                     const LossWeights& weights, bool unseen, std::span<const double> valid = {},
                     RenderGrad* d = nullptr);

// w_b sum_{b,t} (|acc translation| + |acc log-rotation|) + w_mu sum_{g,t} |mu_{t-1} - 2 mu_t + mu_{t+1}|^2
// over interior frames, with mu_t the deformed dynamic means. Zero for fewer than three frames.
double smoothing_loss(const Scene& scene, const LossWeights& weights, Scene* grad = nullptr);

}  // namespace blurgs
