#pragma once

#include <string>
#include <vector>

namespace blurgs {

// Square kernels are row-major K x K; tap (i, j) weights the pixel at offset (i - K/2, j - K/2)
// in (row, column), matching BlurField.

// Normalized discrete Gaussian exp(-r^2 / 2 sigma^2). Throws std::invalid_argument unless
// sigma > 0 and K is odd.
std::vector<double> make_defocus_kernel(double sigma, int size);

// Antialiased line segment of length `length` pixels through the center at angle `theta`
// (radians, from the +column axis toward +row), built from symmetric supersampled points
// splatted bilinearly. length = 1 gives a delta. Throws std::invalid_argument if length > K,
// length < 1 or K is even.
std::vector<double> make_motion_kernel(double theta, double length, int size);

std::vector<double> transpose_kernel(const std::vector<double>& kernel);

struct KernelSpec {
    std::string type = "gaussian";  // "gaussian", "motion" or "none"
    int size = 9;
    double sigma = 1.5;
    double theta = 0.0;
    double length = 5.0;

    std::vector<double> build() const;
};

}  // namespace blurgs
