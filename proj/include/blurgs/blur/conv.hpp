#pragma once

#include <Eigen/Dense>

#include <random>

namespace blurgs {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Feature maps are channels x pixels matrices; pixel index is y * width + x, so each column
// holds one pixel's channel vector.

// Square "same" convolution with zero padding, stride 1, odd kernel size. The weight matrix
// is out x (in * k * k), column index (ci * k + ky) * k + kx, and output pixel (y, x) reads
// input (y + ky - k/2, x + kx - k/2). With k = 1 this is a per-pixel dense layer.
template <typename T>
struct Conv2d {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    MatX<T> weight;
    VecX<T> bias;

    Conv2d() = default;
    Conv2d(int in, int out, int k);

    // He-normal weights, zero bias.
    void init_he(std::mt19937_64& rng);
    void set_zero();

    // `cols` receives the im2col matrix (unused when kernel == 1).
    MatX<T> forward(const MatX<T>& x, int width, int height, MatX<T>& cols) const;

    // Accumulates into d_weight / d_bias; returns the input gradient unless `want_input` is false.
    MatX<T> backward(const MatX<T>& dy, const MatX<T>& x, const MatX<T>& cols, int width, int height,
                     MatX<T>& d_weight, VecX<T>& d_bias, bool want_input = true) const;
};

template <typename T>
void im2col(const MatX<T>& x, int width, int height, int k, MatX<T>& cols);

// Adjoint of im2col: scatters column gradients back to the input layout.
template <typename T>
MatX<T> col2im(const MatX<T>& cols, int channels, int width, int height, int k);

}  // namespace blurgs
