#include "blurgs/blur/conv.hpp"

#include <cmath>
#include <stdexcept>

namespace blurgs {

template <typename T>
Conv2d<T>::Conv2d(int in, int out, int k) : in_channels(in), out_channels(out), kernel(k) {
    if (in <= 0 || out <= 0 || k <= 0 || k % 2 == 0) throw std::invalid_argument("Conv2d: bad shape");
    weight = MatX<T>::Zero(out, in * k * k);
    bias = VecX<T>::Zero(out);
}

template <typename T>
void Conv2d<T>::init_he(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / (in_channels * kernel * kernel)));
    for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = static_cast<T>(n(rng));
    bias.setZero();
}

template <typename T>
void Conv2d<T>::set_zero() {
    weight.setZero();
    bias.setZero();
}

template <typename T>
void im2col(const MatX<T>& x, int width, int height, int k, MatX<T>& cols) {
    const int channels = static_cast<int>(x.rows());
    const int r = k / 2;
    cols.setZero(static_cast<Eigen::Index>(channels) * k * k, static_cast<Eigen::Index>(width) * height);
    for (int ci = 0; ci < channels; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
                for (int y = 0; y < height; ++y) {
                    const int sy = y + ky - r;
                    if (sy < 0 || sy >= height) continue;
                    for (int xx = 0; xx < width; ++xx) {
                        const int sx = xx + kx - r;
                        if (sx < 0 || sx >= width) continue;
                        cols(row, y * width + xx) = x(ci, sy * width + sx);
                    }
                }
            }
        }
    }
}

template <typename T>
MatX<T> col2im(const MatX<T>& cols, int channels, int width, int height, int k) {
    const int r = k / 2;
    MatX<T> x = MatX<T>::Zero(channels, static_cast<Eigen::Index>(width) * height);
    for (int ci = 0; ci < channels; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
                for (int y = 0; y < height; ++y) {
                    const int sy = y + ky - r;
                    if (sy < 0 || sy >= height) continue;
                    for (int xx = 0; xx < width; ++xx) {
                        const int sx = xx + kx - r;
                        if (sx < 0 || sx >= width) continue;
                        x(ci, sy * width + sx) += cols(row, y * width + xx);
                    }
                }
            }
        }
    }
    return x;
}

template <typename T>
MatX<T> Conv2d<T>::forward(const MatX<T>& x, int width, int height, MatX<T>& cols) const {
    if (x.rows() != in_channels || x.cols() != static_cast<Eigen::Index>(width) * height) {
        throw std::invalid_argument("Conv2d::forward: input shape mismatch");
    }
    MatX<T> y;
    if (kernel == 1) {
        y.noalias() = weight * x;
    } else {
        im2col(x, width, height, kernel, cols);
        y.noalias() = weight * cols;
    }
    y.colwise() += bias;
    return y;
}

template <typename T>
MatX<T> Conv2d<T>::backward(const MatX<T>& dy, const MatX<T>& x, const MatX<T>& cols, int width,
                            int height, MatX<T>& d_weight, VecX<T>& d_bias, bool want_input) const {
    const MatX<T>& src = kernel == 1 ? x : cols;
    d_weight.noalias() += dy * src.transpose();
    d_bias += dy.rowwise().sum();
    if (!want_input) return {};
    MatX<T> d_src;
    d_src.noalias() = weight.transpose() * dy;
    if (kernel == 1) return d_src;
    return col2im(d_src, in_channels, width, height, kernel);
}

template struct Conv2d<float>;
template struct Conv2d<double>;
template void im2col(const MatX<float>&, int, int, int, MatX<float>&);
template void im2col(const MatX<double>&, int, int, int, MatX<double>&);
template MatX<float> col2im(const MatX<float>&, int, int, int, int);
template MatX<double> col2im(const MatX<double>&, int, int, int, int);

}  // namespace blurgs
