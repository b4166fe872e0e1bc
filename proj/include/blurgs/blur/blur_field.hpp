#pragma once

#include <span>
#include <vector>

namespace blurgs {

// Per-pixel K x K kernels (pixel-major, tap index ky * K + kx for offset (ky - K/2, kx - K/2))
// and per-pixel blur intensity in [0, 1].
struct BlurField {
    int width = 0;
    int height = 0;
    int kernel_size = 9;
    std::vector<double> kernels;
    std::vector<double> intensity;

    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
    int taps() const { return kernel_size * kernel_size; }
    int center_tap() const { return (taps() - 1) / 2; }
    std::span<const double> kernel(std::size_t pixel) const {
        return {kernels.data() + pixel * taps(), static_cast<std::size_t>(taps())};
    }

    // Same kernel at every pixel with the given intensity. Throws on non-square or even size.
    static BlurField broadcast(int width, int height, std::span<const double> kernel, double intensity = 1.0);
};

// B~(x) = sum over the K x K window of I(x_i) k_x(x_i), with replicate padding at the borders.
// Images are H x W x 3 channel-last. Throws std::invalid_argument on even K or shape mismatch.
std::vector<double> convolve_blur(std::span<const double> image, const BlurField& field);

// Accumulates the adjoint into d_image (H x W x 3) and d_kernels (same layout as field.kernels).
// Either output may be empty to skip it.
void convolve_blur_backward(std::span<const double> image, const BlurField& field,
                            std::span<const double> d_blurred, std::span<double> d_image,
                            std::span<double> d_kernels);

// B^ = (1 - m) I + m B~ per pixel and channel.
std::vector<double> blend(std::span<const double> sharp, std::span<const double> blurred,
                          std::span<const double> intensity);

void blend_backward(std::span<const double> sharp, std::span<const double> blurred,
                    std::span<const double> intensity, std::span<const double> d_out,
                    std::span<double> d_sharp, std::span<double> d_blurred, std::span<double> d_intensity);

// Center-tap target sigmoid(scale * (1 - m)). The intensity enters as a constant.
double center_target(double intensity, double scale);

// L_spa = mean over pixels of |center_target(m_x) - k_x(center)|. If d_kernels is non-empty the
// gradient with respect to the center taps is accumulated into it; nothing flows to m.
double sparsity_loss(const BlurField& field, double scale, std::span<double> d_kernels = {}, double weight = 1.0);

}  // namespace blurgs
