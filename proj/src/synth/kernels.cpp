#include "blurgs/synth/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace blurgs {

namespace {

void check_size(int size) {
    if (size <= 0 || size % 2 == 0) throw std::invalid_argument("kernel size must be odd and positive");
}

}  // namespace

std::vector<double> make_defocus_kernel(double sigma, int size) {
    check_size(size);
    if (!(sigma > 0.0)) throw std::invalid_argument("defocus sigma must be positive");
    const int r = size / 2;
    std::vector<double> k(size * size);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const double d2 = (i - r) * (i - r) + (j - r) * (j - r);
            sum += (k[i * size + j] = std::exp(-d2 / (2 * sigma * sigma)));
        }
    }
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> make_motion_kernel(double theta, double length, int size) {
    check_size(size);
    if (!(length >= 1.0)) throw std::invalid_argument("motion length must be at least 1");
    if (length > size) throw std::invalid_argument("motion length exceeds kernel size");
    const int r = size / 2;
    std::vector<double> k(size * size, 0.0);
    const double half = (length - 1.0) / 2.0;
    const double dc = std::cos(theta), dr = std::sin(theta);
    constexpr int kSamples = 2001;  // odd, so the center is sampled and samples are symmetric
    for (int s = 0; s < kSamples; ++s) {
        const double t = half * (2.0 * s / (kSamples - 1) - 1.0);
        const double row = r + t * dr, col = r + t * dc;
        const int r0 = static_cast<int>(std::floor(row)), c0 = static_cast<int>(std::floor(col));
        const double fr = row - r0, fc = col - c0;
        const double w[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
        const int rr[4] = {r0, r0, r0 + 1, r0 + 1}, cc[4] = {c0, c0 + 1, c0, c0 + 1};
        for (int q = 0; q < 4; ++q) {
            if (w[q] == 0.0) continue;
            if (rr[q] < 0 || rr[q] >= size || cc[q] < 0 || cc[q] >= size) continue;
            k[rr[q] * size + cc[q]] += w[q];
        }
    }
    double sum = 0.0;
    for (double v : k) sum += v;
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> transpose_kernel(const std::vector<double>& kernel) {
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(kernel.size()))));
    std::vector<double> t(kernel.size());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) t[j * k + i] = kernel[i * k + j];
    }
    return t;
}

std::vector<double> KernelSpec::build() const {
    if (type == "gaussian") return make_defocus_kernel(sigma, size);
    if (type == "motion") return make_motion_kernel(theta, length, size);
    if (type == "none") {
        check_size(size);
        std::vector<double> d(size * size, 0.0);
        d[(size * size - 1) / 2] = 1.0;
        return d;
    }
    throw std::invalid_argument("unknown kernel type: " + type);
}

}  // namespace blurgs
