#include "blurgs/blur/blur_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blurgs {

namespace {

void check_field(const BlurField& field, std::size_t image_size) {
    if (field.kernel_size <= 0 || field.kernel_size % 2 == 0) {
        throw std::invalid_argument("blur kernel size must be odd");
    }
    if (field.kernels.size() != field.pixels() * field.taps() || field.intensity.size() != field.pixels()) {
        throw std::invalid_argument("blur field storage does not match its dimensions");
    }
    if (image_size != 3 * field.pixels()) throw std::invalid_argument("image does not match blur field");
}

}  // namespace

BlurField BlurField::broadcast(int width, int height, std::span<const double> kernel, double intensity) {
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(kernel.size()))));
    if (k * k != static_cast<int>(kernel.size()) || k % 2 == 0) {
        throw std::invalid_argument("broadcast: kernel must be K x K with K odd");
    }
    BlurField f;
    f.width = width;
    f.height = height;
    f.kernel_size = k;
    f.kernels.resize(f.pixels() * kernel.size());
    for (std::size_t p = 0; p < f.pixels(); ++p) std::copy(kernel.begin(), kernel.end(), f.kernels.begin() + p * kernel.size());
    f.intensity.assign(f.pixels(), intensity);
    return f;
}

std::vector<double> convolve_blur(std::span<const double> image, const BlurField& field) {
    check_field(field, image.size());
    const int w = field.width, h = field.height, k = field.kernel_size, r = k / 2;
    std::vector<double> out(image.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const double* kp = field.kernels.data() + p * field.taps();
            double acc[3] = {0.0, 0.0, 0.0};
            for (int ky = 0; ky < k; ++ky) {
                const int sy = std::clamp(y + ky - r, 0, h - 1);
                for (int kx = 0; kx < k; ++kx) {
                    const int sx = std::clamp(x + kx - r, 0, w - 1);
                    const double wt = kp[ky * k + kx];
                    const double* src = image.data() + 3 * (static_cast<std::size_t>(sy) * w + sx);
                    acc[0] += wt * src[0];
                    acc[1] += wt * src[1];
                    acc[2] += wt * src[2];
                }
            }
            for (int c = 0; c < 3; ++c) out[3 * p + c] = acc[c];
        }
    }
    return out;
}

void convolve_blur_backward(std::span<const double> image, const BlurField& field,
                            std::span<const double> d_blurred, std::span<double> d_image,
                            std::span<double> d_kernels) {
    check_field(field, image.size());
    const int w = field.width, h = field.height, k = field.kernel_size, r = k / 2;
    const bool want_image = !d_image.empty(), want_kernels = !d_kernels.empty();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const double* g = d_blurred.data() + 3 * p;
            if (g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0) continue;
            const double* kp = field.kernels.data() + p * field.taps();
            for (int ky = 0; ky < k; ++ky) {
                const int sy = std::clamp(y + ky - r, 0, h - 1);
                for (int kx = 0; kx < k; ++kx) {
                    const int sx = std::clamp(x + kx - r, 0, w - 1);
                    const std::size_t s = 3 * (static_cast<std::size_t>(sy) * w + sx);
                    const int tap = ky * k + kx;
                    if (want_image) {
                        for (int c = 0; c < 3; ++c) d_image[s + c] += kp[tap] * g[c];
                    }
                    if (want_kernels) {
                        d_kernels[p * field.taps() + tap] += g[0] * image[s] + g[1] * image[s + 1] + g[2] * image[s + 2];
                    }
                }
            }
        }
    }
}

std::vector<double> blend(std::span<const double> sharp, std::span<const double> blurred,
                          std::span<const double> intensity) {
    if (sharp.size() != blurred.size() || sharp.size() != 3 * intensity.size()) {
        throw std::invalid_argument("blend: shape mismatch");
    }
    std::vector<double> out(sharp.size());
    for (std::size_t i = 0; i < sharp.size(); ++i) {
        const double m = intensity[i / 3];
        out[i] = (1.0 - m) * sharp[i] + m * blurred[i];
    }
    return out;
}

void blend_backward(std::span<const double> sharp, std::span<const double> blurred,
                    std::span<const double> intensity, std::span<const double> d_out,
                    std::span<double> d_sharp, std::span<double> d_blurred, std::span<double> d_intensity) {
    for (std::size_t i = 0; i < sharp.size(); ++i) {
        const double m = intensity[i / 3];
        if (!d_sharp.empty()) d_sharp[i] += (1.0 - m) * d_out[i];
        if (!d_blurred.empty()) d_blurred[i] += m * d_out[i];
        if (!d_intensity.empty()) d_intensity[i / 3] += (blurred[i] - sharp[i]) * d_out[i];
    }
}

double center_target(double intensity, double scale) {
    return 1.0 / (1.0 + std::exp(-scale * (1.0 - intensity)));
}

double sparsity_loss(const BlurField& field, double scale, std::span<double> d_kernels, double weight) {
    const std::size_t n = field.pixels();
    if (n == 0) return 0.0;
    const int c = field.center_tap();
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double diff = center_target(field.intensity[p], scale) - field.kernels[p * field.taps() + c];
        total += std::abs(diff);
        if (!d_kernels.empty() && diff != 0.0) {
            d_kernels[p * field.taps() + c] += weight * (diff > 0 ? -1.0 : 1.0) / static_cast<double>(n);
        }
    }
    return total / static_cast<double>(n);
}

}  // namespace blurgs
