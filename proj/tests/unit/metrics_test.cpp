#include "blurgs/metrics/image_metrics.hpp"
#include "blurgs/metrics/kernel_metrics.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace blurgs {
namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) s += (x = e(rng));
    for (double& x : v) x /= s;
    return v;
}

TEST(Psnr, IdenticalIsSentinel) {
    const std::vector<double> a{0.1, 0.2, 0.3};
    EXPECT_EQ(psnr(a, a), kPsnrIdentical);
}

TEST(Psnr, UniformTenthDifferenceIsTwentyDecibels) {
    std::vector<double> a(300, 0.4), b(300, 0.5);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-10);
}

TEST(Psnr, MatchesNaiveOracle) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_values(rng, 777), b = random_values(rng, 777);
        double mse = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
        mse /= a.size();
        EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(1.0 / mse), 1e-8);
        EXPECT_GT(psnr(a, b), 0.0);
    }
}

TEST(Psnr, RejectsMismatch) {
    EXPECT_THROW(psnr(std::vector<double>(3), std::vector<double>(4)), std::invalid_argument);
    EXPECT_THROW(psnr(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Ssim, IdenticalIsOne) {
    std::mt19937_64 rng(2);
    const auto a = random_values(rng, 3 * 20 * 20);
    EXPECT_NEAR(ssim(a, a, 20, 20, 3), 1.0, 1e-12);
}

TEST(Ssim, MatchesNaiveOracleAndIsSymmetric) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_values(rng, 3 * 23 * 19), b = random_values(rng, 3 * 23 * 19);
        const double s = ssim(a, b, 23, 19, 3);
        EXPECT_NEAR(s, testing::naive_ssim(a, b, 23, 19, 3), 1e-8);
        EXPECT_NEAR(s, ssim(b, a, 23, 19, 3), 1e-12);
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Ssim, InvertedHighContrastPatternScoresLow) {
    const int w = 24, h = 24;
    std::vector<double> a(w * h), inv(w * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) a[y * w + x] = ((x / 2 + y / 2) % 2) ? 0.95 : 0.05;
    }
    for (int i = 0; i < w * h; ++i) inv[i] = 1.0 - a[i];
    const double s = ssim(a, inv, w, h, 1);
    EXPECT_LT(s, 0.5);
    EXPECT_NEAR(s, testing::naive_ssim(a, inv, w, h, 1), 1e-8);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(4);
    auto a = random_values(rng, 2 * 14 * 13);
    const auto b = random_values(rng, 2 * 14 * 13);
    std::vector<double> g(a.size(), 0.0);
    ssim(a, b, 14, 13, 2, SsimOptions{}, {}, g);
    for (std::size_t i = 0; i < a.size(); i += 5) {
        const double orig = a[i], step = 1e-6;
        a[i] = orig + step;
        const double sp = ssim(a, b, 14, 13, 2);
        a[i] = orig - step;
        const double sm = ssim(a, b, 14, 13, 2);
        a[i] = orig;
        EXPECT_NEAR(g[i], (sp - sm) / (2 * step), 1e-7);
    }
}

TEST(Ssim, TooSmallImageThrows) {
    const std::vector<double> a(3 * 10 * 10, 0.5);
    EXPECT_THROW(ssim(a, a, 10, 10, 3), std::invalid_argument);
}

TEST(KernelMetrics, EqualKernelsGiveZeroDivergence) {
    std::mt19937_64 rng(5);
    const auto k = random_simplex(rng, 81);
    const BlurField f = BlurField::broadcast(6, 5, k);
    const KernelMetrics m = kernel_metrics(f, k);
    EXPECT_EQ(m.psnr, kPsnrIdentical);
    EXPECT_EQ(m.kl, 0.0);
    EXPECT_GE(m.kl, 0.0);
    EXPECT_EQ(m.pixels, 30u);
}

TEST(KernelMetrics, UniformEstimateAgainstDelta) {
    std::vector<double> delta(81, 0.0);
    delta[40] = 1.0;
    const BlurField f = BlurField::broadcast(4, 4, std::vector<double>(81, 1.0 / 81));
    const KernelMetrics m = kernel_metrics(f, delta);
    EXPECT_NEAR(m.kl, -std::log(1.0 / 81 + kKernelKlEpsilon), 1e-12);
    EXPECT_NEAR(m.kl, 4.394, 1e-3);
}

TEST(KernelMetrics, RandomSimplexPairsMatchDirectSummation) {
    std::mt19937_64 rng(6);
    const int w = 5, h = 4, taps = 49;
    BlurField est;
    est.width = w;
    est.height = h;
    est.kernel_size = 7;
    est.intensity.assign(w * h, 1.0);
    std::vector<double> gt;
    std::vector<double> region(w * h, 1.0);
    region[3] = 0.0;
    region[11] = 0.0;
    for (int p = 0; p < w * h; ++p) {
        const auto e = random_simplex(rng, taps), g = random_simplex(rng, taps);
        est.kernels.insert(est.kernels.end(), e.begin(), e.end());
        gt.insert(gt.end(), g.begin(), g.end());
    }
    double kl = 0.0, se = 0.0;
    int n = 0;
    for (int p = 0; p < w * h; ++p) {
        if (region[p] <= 0.0) continue;
        double pixel = 0.0;
        for (int t = 0; t < taps; ++t) {
            const double a = gt[p * taps + t], b = est.kernels[p * taps + t];
            if (a > 0.0) pixel += a * std::log(a / (b + kKernelKlEpsilon));
            se += (a - b) * (a - b);
        }
        kl += std::max(pixel, 0.0);
        ++n;
    }
    const KernelMetrics m = kernel_metrics(est, gt, region);
    EXPECT_EQ(m.pixels, static_cast<std::size_t>(n));
    EXPECT_NEAR(m.kl, kl / n, 1e-8);
    EXPECT_NEAR(m.psnr, 10.0 * std::log10(1.0 / (se / (n * taps))), 1e-8);
}

TEST(KernelMetrics, RejectsMismatchedSize) {
    const BlurField f = BlurField::broadcast(3, 3, std::vector<double>(25, 1.0 / 25));
    EXPECT_THROW(kernel_metrics(f, std::vector<double>(81, 1.0 / 81)), std::invalid_argument);
}

TEST(EffectiveKernels, BlendWithDelta) {
    std::vector<double> k(9, 0.1);
    k[4] = 0.2;
    const BlurField eff = effective_kernels(BlurField::broadcast(2, 2, k, 0.25));
    EXPECT_NEAR(eff.kernel(0)[4], 0.75 + 0.25 * 0.2, 1e-15);
    EXPECT_NEAR(eff.kernel(3)[0], 0.025, 1e-15);
}

}  // namespace
}  // namespace blurgs
