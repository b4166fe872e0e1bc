#include "blurgs/scene/gaussian.hpp"

#include <algorithm>

namespace blurgs {

Gaussian GaussianCloud::gaussian(std::size_t i) const {
    Gaussian g;
    g.mean = mean(i);
    g.rotation = quat(i);
    for (int k = 0; k < 3; ++k) {
        g.scale[k] = std::exp(log_scales[3 * i + k]);
        g.color[k] = colors[3 * i + k];
    }
    g.opacity = sigmoid(opacity_logits[i]);
    return g;
}

void GaussianCloud::append(const Gaussian& g) {
    const Vec4 q = quat::normalized(g.rotation);
    for (int k = 0; k < 3; ++k) {
        means.push_back(g.mean[k]);
        log_scales.push_back(std::log(g.scale[k]));
        colors.push_back(std::clamp(g.color[k], 0.0, 1.0));
    }
    for (int k = 0; k < 4; ++k) quats.push_back(q[k]);
    const double o = std::clamp(g.opacity, 1e-6, 1.0 - 1e-6);
    opacity_logits.push_back(logit(o));
}

void GaussianCloud::resize(std::size_t n) {
    means.resize(3 * n);
    quats.resize(4 * n);
    log_scales.resize(3 * n);
    opacity_logits.resize(n);
    colors.resize(3 * n);
}

void GaussianCloud::accumulate(std::size_t i, const GaussianGrad& grad, const GaussianCloud& params) {
    const double o = sigmoid(params.opacity_logits[i]);
    for (int k = 0; k < 3; ++k) {
        means[3 * i + k] += grad.mean[k];
        log_scales[3 * i + k] += grad.scale[k] * std::exp(params.log_scales[3 * i + k]);
        colors[3 * i + k] += grad.color[k];
    }
    for (int k = 0; k < 4; ++k) quats[4 * i + k] += grad.rotation[k];
    opacity_logits[i] += grad.opacity * o * (1.0 - o);
}

GaussianCloud GaussianCloud::zeros_like() const {
    GaussianCloud z;
    z.resize(size());
    return z;
}

void GaussianCloud::project_to_constraints() {
    for (std::size_t i = 0; i < size(); ++i) {
        Vec4 q = quat(i);
        const double n = q.norm();
        q = n > 1e-12 ? Vec4(q / n) : quat::identity();
        for (int k = 0; k < 4; ++k) quats[4 * i + k] = q[k];
    }
    for (double& c : colors) c = std::clamp(c, 0.0, 1.0);
}

}  // namespace blurgs
