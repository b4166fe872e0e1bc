#pragma once

#include <limits>
#include <span>
#include <vector>

namespace blurgs {

// Returned by psnr for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// 10 log10(1 / MSE) over all entries. Throws std::invalid_argument on size mismatch or empty input.
double psnr(std::span<const double> a, std::span<const double> b);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;
};

// Mean SSIM over every fully-inside Gaussian window and channel of H x W x C images. When
// `valid` (H x W) is given, only windows whose pixels are all valid count. If d_a is non-empty
// it receives (accumulates) dSSIM/da. Returns 1 when no window qualifies and `valid` was given;
// throws std::invalid_argument if the image is smaller than the window.
double ssim(std::span<const double> a, std::span<const double> b, int width, int height, int channels,
            const SsimOptions& options = {}, std::span<const double> valid = {}, std::span<double> d_a = {},
            double grad_scale = 1.0);

// Normalized 1-D Gaussian taps of the SSIM window.
std::vector<double> gaussian_window(int size, double sigma);

}  // namespace blurgs
