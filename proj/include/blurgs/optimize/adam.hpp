#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace blurgs {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moments for a set of named tensors sharing one step counter. Tensors may grow between steps
// (densification appends); new entries start with zero moments.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    // Advances the shared step counter; call once per optimizer step before update().
    void begin_step() { ++step_; }
    long step() const { return step_; }

    // Bias-corrected update of `params` in place. Returns false and leaves the tensor (and its
    // moments) untouched if any gradient entry is non-finite.
    template <typename T>
    bool update(const std::string& name, std::span<T> params, std::span<const T> grads, double lr);

    struct Moments {
        std::vector<double> m, v;
    };
    const std::map<std::string, Moments>& moments() const { return moments_; }
    std::map<std::string, Moments>& moments() { return moments_; }
    void set_step(long step) { step_ = step; }

private:
    AdamConfig config_;
    long step_ = 0;
    std::map<std::string, Moments> moments_;
};

template <typename T>
bool Adam::update(const std::string& name, std::span<T> params, std::span<const T> grads, double lr) {
    for (T g : grads) {
        if (!std::isfinite(static_cast<double>(g))) return false;
    }
    Moments& mo = moments_[name];
    if (mo.m.size() < params.size()) {
        mo.m.resize(params.size(), 0.0);
        mo.v.resize(params.size(), 0.0);
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = static_cast<double>(grads[i]);
        mo.m[i] = config_.beta1 * mo.m[i] + (1.0 - config_.beta1) * g;
        mo.v[i] = config_.beta2 * mo.v[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = mo.m[i] / bc1, vhat = mo.v[i] / bc2;
        params[i] = static_cast<T>(static_cast<double>(params[i]) - lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
    return true;
}

}  // namespace blurgs
