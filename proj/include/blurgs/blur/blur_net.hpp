#pragma once

#include "blurgs/blur/blur_field.hpp"
#include "blurgs/blur/conv.hpp"
#include "blurgs/render/rasterizer.hpp"

#include <array>
#include <random>
#include <span>
#include <string>

namespace blurgs {

struct BlurNetConfig {
    int kernel_size = 9;
    int hidden = 64;
    int embed_dim = 16;
    int pe_octaves = 6;
    std::array<int, 3> feature_kernels{3, 1, 1};
    int num_views = 1;
    bool skip = true;                 // re-inject f_scene after the first two prediction layers
    bool propagate_to_render = true;  // backpropagate through the feature extractor into (I, D, M)

    int pe_dim() const { return 2 + 4 * pe_octaves; }
    void validate() const;
};

// Scene feature extractor (three convolutions over image, inverse depth and mask) followed by
// a four-layer per-pixel prediction network over [f_scene, e(view), p(x)]. The final layer emits
// K^2 kernel logits (softmax) and one intensity logit (sigmoid).
template <typename T>
struct BlurNet {
    BlurNetConfig config;
    std::array<Conv2d<T>, 3> features;
    std::array<Conv2d<T>, 4> predict;
    MatX<T> embedding;  // embed_dim x num_views

    // Hidden layers He-initialized, final layer zero, embeddings N(0, 1).
    static BlurNet create(const BlurNetConfig& config, std::mt19937_64& rng);
    BlurNet zeros_like() const;

    template <typename F>
    void for_each_tensor(F&& f) {
        for (int i = 0; i < 3; ++i) {
            f("blur.features" + std::to_string(i) + ".weight", span(features[i].weight));
            f("blur.features" + std::to_string(i) + ".bias", span(features[i].bias));
        }
        for (int i = 0; i < 4; ++i) {
            f("blur.predict" + std::to_string(i) + ".weight", span(predict[i].weight));
            f("blur.predict" + std::to_string(i) + ".bias", span(predict[i].bias));
        }
        f(std::string("blur.embedding"), span(embedding));
    }

private:
    template <typename M>
    static std::span<T> span(M& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
};

template <typename T>
struct BlurNetCache {
    bool valid = false;
    int width = 0;
    int height = 0;
    int view = 0;
    std::vector<double> depth;  // network depth input is 1 / max(depth, floor)
    MatX<T> input;
    std::array<MatX<T>, 3> cols;
    std::array<MatX<T>, 3> feature;  // post-activation outputs; feature[2] is f_scene
    MatX<T> z1, h1, z2, h2, z3, h3;
    MatX<T> logits;
    BlurField field;
};

// Fixed pixel encoding over u, v in [-1, 1]: (u, v, sin(2^j pi u), cos(2^j pi u), sin(2^j pi v), cos(2^j pi v)).
template <typename T>
MatX<T> positional_encoding(int width, int height, int octaves);

// Five-channel network input (r, g, b, 1 / depth, mask).
template <typename T>
MatX<T> scene_input(const RenderOutput& render);

// f_scene for a render. Throws std::invalid_argument if the render is empty or mismatched.
template <typename T>
MatX<T> extract_scene_features(const BlurNet<T>& net, const MatX<T>& input, int width, int height,
                               BlurNetCache<T>* cache = nullptr);

// Throws std::out_of_range for an unknown view.
template <typename T>
BlurField predict_blur(const BlurNet<T>& net, const RenderOutput& render, int view,
                       BlurNetCache<T>* cache = nullptr);

// Accumulates parameter gradients into `grad` and, when d_render is given and the config allows
// it, adds the feature-path gradients to its image, depth and mask buffers (resized if empty).
// Throws std::logic_error without a populated cache.
template <typename T>
void predict_blur_backward(const BlurNet<T>& net, const BlurNetCache<T>& cache,
                           std::span<const double> d_kernels, std::span<const double> d_intensity,
                           BlurNet<T>& grad, RenderGrad* d_render);

}  // namespace blurgs
