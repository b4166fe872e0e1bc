#include "blurgs/blur/blur_net.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blurgs {

namespace {

constexpr double kDepthFloor = 1e-3;

template <typename T>
void relu_inplace(MatX<T>& m) {
    m = m.cwiseMax(T(0));
}

template <typename T>
void relu_backward(MatX<T>& d, const MatX<T>& post) {
    d = (post.array() > T(0)).select(d, T(0));
}

template <typename T>
MatX<T> stack(const MatX<T>& a, const MatX<T>& b) {
    MatX<T> out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

}  // namespace

void BlurNetConfig::validate() const {
    if (kernel_size <= 0 || kernel_size % 2 == 0) throw std::invalid_argument("blur kernel size must be odd");
    if (hidden <= 0 || embed_dim < 0 || pe_octaves < 0 || num_views <= 0) {
        throw std::invalid_argument("blur network dimensions must be positive");
    }
    for (int k : feature_kernels) {
        if (k <= 0 || k % 2 == 0) throw std::invalid_argument("feature kernels must be odd");
    }
}

template <typename T>
BlurNet<T> BlurNet<T>::create(const BlurNetConfig& config, std::mt19937_64& rng) {
    config.validate();
    BlurNet net;
    net.config = config;
    const int h = config.hidden;
    const int skip_in = config.skip ? h : 0;
    net.features[0] = Conv2d<T>(5, h, config.feature_kernels[0]);
    net.features[1] = Conv2d<T>(h, h, config.feature_kernels[1]);
    net.features[2] = Conv2d<T>(h, h, config.feature_kernels[2]);
    net.predict[0] = Conv2d<T>(h + config.embed_dim + config.pe_dim(), h, 1);
    net.predict[1] = Conv2d<T>(h + skip_in, h, 1);
    net.predict[2] = Conv2d<T>(h + skip_in, h, 1);
    net.predict[3] = Conv2d<T>(h, config.kernel_size * config.kernel_size + 1, 1);
    for (auto& c : net.features) c.init_he(rng);
    for (int i = 0; i < 3; ++i) net.predict[i].init_he(rng);
    net.predict[3].set_zero();
    std::normal_distribution<double> n(0.0, 1.0);
    net.embedding.resize(config.embed_dim, config.num_views);
    for (Eigen::Index i = 0; i < net.embedding.size(); ++i) net.embedding.data()[i] = static_cast<T>(n(rng));
    return net;
}

template <typename T>
BlurNet<T> BlurNet<T>::zeros_like() const {
    BlurNet z = *this;
    for (auto& c : z.features) c.set_zero();
    for (auto& c : z.predict) c.set_zero();
    z.embedding.setZero();
    return z;
}

template <typename T>
MatX<T> positional_encoding(int width, int height, int octaves) {
    MatX<T> pe(2 + 4 * octaves, static_cast<Eigen::Index>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = width > 1 ? 2.0 * x / (width - 1) - 1.0 : 0.0;
            const double v = height > 1 ? 2.0 * y / (height - 1) - 1.0 : 0.0;
            const Eigen::Index p = static_cast<Eigen::Index>(y) * width + x;
            pe(0, p) = static_cast<T>(u);
            pe(1, p) = static_cast<T>(v);
            for (int j = 0; j < octaves; ++j) {
                const double f = std::ldexp(std::numbers::pi, j);
                pe(2 + 4 * j, p) = static_cast<T>(std::sin(f * u));
                pe(3 + 4 * j, p) = static_cast<T>(std::cos(f * u));
                pe(4 + 4 * j, p) = static_cast<T>(std::sin(f * v));
                pe(5 + 4 * j, p) = static_cast<T>(std::cos(f * v));
            }
        }
    }
    return pe;
}

template <typename T>
MatX<T> scene_input(const RenderOutput& render) {
    const std::size_t n = render.pixels();
    if (n == 0 || render.image.size() != 3 * n || render.depth.size() != n || render.mask.size() != n) {
        throw std::invalid_argument("scene_input: render buffers do not match its dimensions");
    }
    MatX<T> x(5, static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) x(c, p) = static_cast<T>(render.image[3 * p + c]);
        x(3, p) = static_cast<T>(1.0 / std::max(render.depth[p], kDepthFloor));
        x(4, p) = static_cast<T>(render.mask[p]);
    }
    return x;
}

template <typename T>
MatX<T> extract_scene_features(const BlurNet<T>& net, const MatX<T>& input, int width, int height,
                               BlurNetCache<T>* cache) {
    if (input.rows() != 5 || input.cols() != static_cast<Eigen::Index>(width) * height || input.cols() == 0) {
        throw std::invalid_argument("extract_scene_features: input must be 5 x (W * H)");
    }
    std::array<MatX<T>, 3> cols;
    MatX<T> a0 = net.features[0].forward(input, width, height, cols[0]);
    relu_inplace(a0);
    MatX<T> a1 = net.features[1].forward(a0, width, height, cols[1]);
    relu_inplace(a1);
    MatX<T> f = net.features[2].forward(a1, width, height, cols[2]);
    if (cache) {
        cache->cols = std::move(cols);
        cache->feature = {std::move(a0), std::move(a1), f};
    }
    return f;
}

template <typename T>
BlurField predict_blur(const BlurNet<T>& net, const RenderOutput& render, int view, BlurNetCache<T>* cache) {
    const BlurNetConfig& cfg = net.config;
    if (view < 0 || view >= net.embedding.cols()) throw std::out_of_range("predict_blur: unknown view index");
    const int w = render.width, h = render.height;
    const Eigen::Index n = static_cast<Eigen::Index>(w) * h;

    BlurNetCache<T> local;
    BlurNetCache<T>& c = cache ? *cache : local;
    c.width = w;
    c.height = h;
    c.view = view;
    c.depth = render.depth;
    c.input = scene_input<T>(render);
    const MatX<T> f = extract_scene_features(net, c.input, w, h, &c);

    MatX<T> scratch;
    c.z1.resize(cfg.hidden + cfg.embed_dim + cfg.pe_dim(), n);
    c.z1.topRows(cfg.hidden) = f;
    c.z1.middleRows(cfg.hidden, cfg.embed_dim) = net.embedding.col(view).replicate(1, n);
    c.z1.bottomRows(cfg.pe_dim()) = positional_encoding<T>(w, h, cfg.pe_octaves);
    c.h1 = net.predict[0].forward(c.z1, w, h, scratch);
    relu_inplace(c.h1);
    c.z2 = cfg.skip ? stack(c.h1, f) : c.h1;
    c.h2 = net.predict[1].forward(c.z2, w, h, scratch);
    relu_inplace(c.h2);
    c.z3 = cfg.skip ? stack(c.h2, f) : c.h2;
    c.h3 = net.predict[2].forward(c.z3, w, h, scratch);
    relu_inplace(c.h3);
    c.logits = net.predict[3].forward(c.h3, w, h, scratch);

    const int taps = cfg.kernel_size * cfg.kernel_size;
    BlurField field;
    field.width = w;
    field.height = h;
    field.kernel_size = cfg.kernel_size;
    field.kernels.resize(static_cast<std::size_t>(n) * taps);
    field.intensity.resize(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto col = c.logits.col(p);
        double mx = col(0);
        for (int i = 1; i < taps; ++i) mx = std::max(mx, static_cast<double>(col(i)));
        double z = 0.0;
        double* k = field.kernels.data() + p * taps;
        for (int i = 0; i < taps; ++i) z += (k[i] = std::exp(static_cast<double>(col(i)) - mx));
        for (int i = 0; i < taps; ++i) k[i] /= z;
        field.intensity[p] = 1.0 / (1.0 + std::exp(-static_cast<double>(col(taps))));
    }
    c.field = field;
    c.valid = true;
    return field;
}

template <typename T>
void predict_blur_backward(const BlurNet<T>& net, const BlurNetCache<T>& c, std::span<const double> d_kernels,
                           std::span<const double> d_intensity, BlurNet<T>& grad, RenderGrad* d_render) {
    if (!c.valid) throw std::logic_error("predict_blur_backward: forward cache is missing");
    const BlurNetConfig& cfg = net.config;
    const int w = c.width, h = c.height, hid = cfg.hidden;
    const Eigen::Index n = static_cast<Eigen::Index>(w) * h;
    const int taps = cfg.kernel_size * cfg.kernel_size;

    MatX<T> d_logits(taps + 1, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        const double* k = c.field.kernels.data() + p * taps;
        const double* g = d_kernels.empty() ? nullptr : d_kernels.data() + p * taps;
        double dot = 0.0;
        if (g) {
            for (int i = 0; i < taps; ++i) dot += k[i] * g[i];
        }
        for (int i = 0; i < taps; ++i) d_logits(i, p) = static_cast<T>(g ? k[i] * (g[i] - dot) : 0.0);
        const double m = c.field.intensity[p];
        d_logits(taps, p) = static_cast<T>(d_intensity.empty() ? 0.0 : d_intensity[p] * m * (1.0 - m));
    }

    const MatX<T> none;
    MatX<T> d_h3 = net.predict[3].backward(d_logits, c.h3, none, w, h, grad.predict[3].weight, grad.predict[3].bias);
    relu_backward(d_h3, c.h3);
    MatX<T> d_z3 = net.predict[2].backward(d_h3, c.z3, none, w, h, grad.predict[2].weight, grad.predict[2].bias);
    MatX<T> d_f = MatX<T>::Zero(hid, n);
    MatX<T> d_h2 = d_z3.topRows(hid);
    if (cfg.skip) d_f += d_z3.bottomRows(hid);
    relu_backward(d_h2, c.h2);
    MatX<T> d_z2 = net.predict[1].backward(d_h2, c.z2, none, w, h, grad.predict[1].weight, grad.predict[1].bias);
    MatX<T> d_h1 = d_z2.topRows(hid);
    if (cfg.skip) d_f += d_z2.bottomRows(hid);
    relu_backward(d_h1, c.h1);
    MatX<T> d_z1 = net.predict[0].backward(d_h1, c.z1, none, w, h, grad.predict[0].weight, grad.predict[0].bias);
    d_f += d_z1.topRows(hid);
    grad.embedding.col(c.view) += d_z1.middleRows(hid, cfg.embed_dim).rowwise().sum();

    const bool to_render = d_render && cfg.propagate_to_render;
    MatX<T> d_a1 = net.features[2].backward(d_f, c.feature[1], c.cols[2], w, h, grad.features[2].weight,
                                             grad.features[2].bias);
    relu_backward(d_a1, c.feature[1]);
    MatX<T> d_a0 = net.features[1].backward(d_a1, c.feature[0], c.cols[1], w, h, grad.features[1].weight,
                                             grad.features[1].bias);
    relu_backward(d_a0, c.feature[0]);
    MatX<T> d_in = net.features[0].backward(d_a0, c.input, c.cols[0], w, h, grad.features[0].weight,
                                             grad.features[0].bias, to_render);
    if (!to_render) return;

    const std::size_t np = static_cast<std::size_t>(n);
    if (d_render->image.empty()) d_render->image.assign(3 * np, 0.0);
    if (d_render->depth.empty()) d_render->depth.assign(np, 0.0);
    if (d_render->mask.empty()) d_render->mask.assign(np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        for (int ch = 0; ch < 3; ++ch) d_render->image[3 * p + ch] += static_cast<double>(d_in(ch, p));
        const double d = c.depth[p];
        if (d > kDepthFloor) d_render->depth[p] -= static_cast<double>(d_in(3, p)) / (d * d);
        d_render->mask[p] += static_cast<double>(d_in(4, p));
    }
}

#define BLURGS_INSTANTIATE(T)                                                                          \
    template struct BlurNet<T>;                                                                        \
    template MatX<T> positional_encoding<T>(int, int, int);                                            \
    template MatX<T> scene_input<T>(const RenderOutput&);                                              \
    template MatX<T> extract_scene_features<T>(const BlurNet<T>&, const MatX<T>&, int, int, BlurNetCache<T>*); \
    template BlurField predict_blur<T>(const BlurNet<T>&, const RenderOutput&, int, BlurNetCache<T>*);  \
    template void predict_blur_backward<T>(const BlurNet<T>&, const BlurNetCache<T>&, std::span<const double>, \
                                           std::span<const double>, BlurNet<T>&, RenderGrad*);

BLURGS_INSTANTIATE(float)
BLURGS_INSTANTIATE(double)

}  // namespace blurgs
