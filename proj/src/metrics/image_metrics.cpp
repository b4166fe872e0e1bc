#include "blurgs/metrics/image_metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace blurgs {

double psnr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("psnr: images must match and be non-empty");
    double sse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
    if (sse == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(static_cast<double>(a.size()) / sse);
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> g(size);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - (size - 1) / 2.0;
        sum += (g[i] = std::exp(-d * d / (2 * sigma * sigma)));
    }
    for (double& v : g) v /= sum;
    return g;
}

namespace {

// Separable "valid" filtering of one W x H plane into (W - k + 1) x (H - k + 1).
struct ValidFilter {
    std::vector<double> taps;
    int width, height, out_w, out_h;

    std::vector<double> apply(const std::vector<double>& in) const {
        const int k = static_cast<int>(taps.size());
        std::vector<double> tmp(static_cast<std::size_t>(out_w) * height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < out_w; ++x) {
                double s = 0.0;
                for (int i = 0; i < k; ++i) s += taps[i] * in[y * width + x + i];
                tmp[y * out_w + x] = s;
            }
        }
        std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                double s = 0.0;
                for (int i = 0; i < k; ++i) s += taps[i] * tmp[(y + i) * out_w + x];
                out[y * out_w + x] = s;
            }
        }
        return out;
    }

    std::vector<double> adjoint(const std::vector<double>& g) const {
        const int k = static_cast<int>(taps.size());
        std::vector<double> tmp(static_cast<std::size_t>(out_w) * height, 0.0);
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const double v = g[y * out_w + x];
                if (v == 0.0) continue;
                for (int i = 0; i < k; ++i) tmp[(y + i) * out_w + x] += taps[i] * v;
            }
        }
        std::vector<double> out(static_cast<std::size_t>(width) * height, 0.0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const double v = tmp[y * out_w + x];
                if (v == 0.0) continue;
                for (int i = 0; i < k; ++i) out[y * width + x + i] += taps[i] * v;
            }
        }
        return out;
    }
};

}  // namespace

double ssim(std::span<const double> a, std::span<const double> b, int width, int height, int channels,
            const SsimOptions& o, std::span<const double> valid, std::span<double> d_a, double grad_scale) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (a.size() != b.size() || a.size() != n * channels) throw std::invalid_argument("ssim: shape mismatch");
    if (width < o.window || height < o.window) throw std::invalid_argument("ssim: image smaller than window");
    if (!valid.empty() && valid.size() != n) throw std::invalid_argument("ssim: validity map shape mismatch");
    const ValidFilter f{gaussian_window(o.window, o.sigma), width, height, width - o.window + 1,
                        height - o.window + 1};
    const std::size_t nw = static_cast<std::size_t>(f.out_w) * f.out_h;

    // Windows that lie entirely on valid pixels.
    std::vector<char> use(nw, 1);
    std::size_t count = nw;
    if (!valid.empty()) {
        count = 0;
        for (int y = 0; y < f.out_h; ++y) {
            for (int x = 0; x < f.out_w; ++x) {
                bool ok = true;
                for (int dy = 0; dy < o.window && ok; ++dy) {
                    for (int dx = 0; dx < o.window && ok; ++dx) ok = valid[(y + dy) * width + x + dx] > 0.5;
                }
                use[y * f.out_w + x] = ok;
                count += ok;
            }
        }
        if (count == 0) return 1.0;
    }

    const bool want_grad = !d_a.empty();
    const double norm = 1.0 / (static_cast<double>(count) * channels);
    double total = 0.0;
    std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
    for (int c = 0; c < channels; ++c) {
        for (std::size_t p = 0; p < n; ++p) {
            pa[p] = a[p * channels + c];
            pb[p] = b[p * channels + c];
            paa[p] = pa[p] * pa[p];
            pbb[p] = pb[p] * pb[p];
            pab[p] = pa[p] * pb[p];
        }
        const auto ma = f.apply(pa), mb = f.apply(pb), eaa = f.apply(paa), ebb = f.apply(pbb), eab = f.apply(pab);
        std::vector<double> g_ma, g_eaa, g_eab;
        if (want_grad) {
            g_ma.assign(nw, 0.0);
            g_eaa.assign(nw, 0.0);
            g_eab.assign(nw, 0.0);
        }
        for (std::size_t w = 0; w < nw; ++w) {
            if (!use[w]) continue;
            const double va = eaa[w] - ma[w] * ma[w], vb = ebb[w] - mb[w] * mb[w], cov = eab[w] - ma[w] * mb[w];
            const double a1 = 2 * ma[w] * mb[w] + o.c1, a2 = 2 * cov + o.c2;
            const double b1 = ma[w] * ma[w] + mb[w] * mb[w] + o.c1, b2 = va + vb + o.c2;
            const double s = a1 * a2 / (b1 * b2);
            total += s;
            if (want_grad) {
                g_ma[w] = norm * (2 * mb[w] * (a2 - a1) / (b1 * b2) - 2 * ma[w] * s * (1 / b1 - 1 / b2));
                g_eaa[w] = norm * (-s / b2);
                g_eab[w] = norm * (2 * a1 / (b1 * b2));
            }
        }
        if (want_grad) {
            const auto d_ma = f.adjoint(g_ma), d_eaa = f.adjoint(g_eaa), d_eab = f.adjoint(g_eab);
            for (std::size_t p = 0; p < n; ++p) {
                d_a[p * channels + c] += grad_scale * (d_ma[p] + 2 * pa[p] * d_eaa[p] + pb[p] * d_eab[p]);
            }
        }
    }
    return total * norm;
}

}  // namespace blurgs
