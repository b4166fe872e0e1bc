#pragma once

#include "blurgs/blur/blur_net.hpp"

namespace blurgs {

// Full blur synthesis: predict the field from the render, convolve the sharp image with it and
// blend by intensity.
template <typename T>
struct BlurPathCache {
    BlurNetCache<T> net;
    std::vector<double> sharp;
    std::vector<double> blurred;  // B~, before blending

    const BlurField& field() const { return net.field; }
};

template <typename T>
std::vector<double> blur_forward(const BlurNet<T>& net, const RenderOutput& render, int view,
                                 BlurPathCache<T>& cache);

// Backward from dL/dB^ plus an optional extra kernel gradient (for example from the sparsity
// loss). Parameter gradients accumulate into `grad`; gradients on the rendered image (blend,
// convolution and feature paths), depth and mask accumulate into d_render.
template <typename T>
void blur_backward(const BlurNet<T>& net, const BlurPathCache<T>& cache, std::span<const double> d_output,
                   std::span<const double> d_kernels_extra, BlurNet<T>& grad, RenderGrad& d_render);

}  // namespace blurgs
