#include "blurgs/scene/motion.hpp"

#include <algorithm>
#include <stdexcept>

namespace blurgs {

MotionBasisSet MotionBasisSet::identity(int num_bases, int num_frames) {
    MotionBasisSet m;
    m.num_bases = num_bases;
    m.num_frames = num_frames;
    const std::size_t n = static_cast<std::size_t>(num_bases) * num_frames;
    m.rotations.assign(4 * n, 0.0);
    m.translations.assign(3 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m.rotations[4 * i] = 1.0;
    return m;
}

void MotionBasisSet::check_frame(int t) const {
    if (t < 0 || t >= num_frames) throw std::out_of_range("motion bases: frame index out of range");
}

Vec4 MotionBasisSet::rotation(int t, int b) const {
    const std::size_t o = 4 * (static_cast<std::size_t>(t) * num_bases + b);
    return {rotations[o], rotations[o + 1], rotations[o + 2], rotations[o + 3]};
}

Vec3 MotionBasisSet::translation(int t, int b) const {
    const std::size_t o = 3 * (static_cast<std::size_t>(t) * num_bases + b);
    return {translations[o], translations[o + 1], translations[o + 2]};
}

RigidTransform MotionBasisSet::transform(int t, int b) const {
    return {quat::normalized(rotation(t, b)), translation(t, b)};
}

void MotionBasisSet::set(int t, int b, const RigidTransform& tr) {
    const std::size_t o = static_cast<std::size_t>(t) * num_bases + b;
    const Vec4 q = quat::normalized(tr.rotation);
    for (int k = 0; k < 4; ++k) rotations[4 * o + k] = q[k];
    for (int k = 0; k < 3; ++k) translations[3 * o + k] = tr.translation[k];
}

MotionBasisSet MotionBasisSet::zeros_like() const {
    MotionBasisSet z;
    z.num_bases = num_bases;
    z.num_frames = num_frames;
    z.rotations.assign(rotations.size(), 0.0);
    z.translations.assign(translations.size(), 0.0);
    return z;
}

void MotionBasisSet::project_to_constraints() {
    for (int t = 0; t < num_frames; ++t) {
        for (int b = 0; b < num_bases; ++b) {
            if (t == 0) {
                set(t, b, RigidTransform{});
                continue;
            }
            const Vec4 q = rotation(t, b);
            const double n = q.norm();
            set(t, b, {n > 1e-12 ? Vec4(q / n) : quat::identity(), translation(t, b)});
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> w(logits.begin(), logits.end());
    if (w.empty()) return w;
    const double mx = *std::max_element(w.begin(), w.end());
    double sum = 0.0;
    for (double& v : w) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

namespace {

struct Blend {
    std::vector<Vec4> unit;  // normalized basis rotations
    std::vector<double> sign;
    Vec4 sum = Vec4::Zero();  // unnormalized blended quaternion
    RigidTransform result;
};

Blend blend(std::span<const double> weights, const MotionBasisSet& bases, int t) {
    bases.check_frame(t);
    if (static_cast<int>(weights.size()) != bases.num_bases)
        throw std::invalid_argument("motion coefficients: length must equal basis count");
    Blend out;
    out.unit.resize(weights.size());
    out.sign.resize(weights.size());
    for (int b = 0; b < bases.num_bases; ++b) {
        out.unit[b] = quat::normalized(bases.rotation(t, b));
        out.sign[b] = (b == 0 || out.unit[b].dot(out.unit[0]) >= 0.0) ? 1.0 : -1.0;
        out.sum += weights[b] * out.sign[b] * out.unit[b];
        out.result.translation += weights[b] * bases.translation(t, b);
    }
    out.result.rotation = quat::normalized(out.sum);
    return out;
}

}  // namespace

RigidTransform blend_motion(std::span<const double> weights, const MotionBasisSet& bases, int t) {
    return blend(weights, bases, t).result;
}

RigidTransform compose_motion(std::span<const double> coeff_logits, const MotionBasisSet& bases,
                              int t) {
    const std::vector<double> w = softmax(coeff_logits);
    return blend(w, bases, t).result;
}

void compose_motion_backward(std::span<const double> coeff_logits, const MotionBasisSet& bases,
                             int t, const Vec4& d_rotation, const Vec3& d_translation,
                             std::span<double> d_logits, MotionBasisSet& d_bases) {
    const std::vector<double> w = softmax(coeff_logits);
    const Blend bl = blend(w, bases, t);
    const Vec4 d_sum = quat::normalize_backward(bl.sum, d_rotation);
    std::vector<double> dw(w.size());
    for (int b = 0; b < bases.num_bases; ++b) {
        dw[b] = bl.sign[b] * bl.unit[b].dot(d_sum) + bases.translation(t, b).dot(d_translation);
        if (t == 0) continue;  // canonical frame is fixed
        const Vec4 d_unit = w[b] * bl.sign[b] * d_sum;
        const Vec4 d_raw = quat::normalize_backward(bases.rotation(t, b), d_unit);
        const std::size_t o = static_cast<std::size_t>(t) * bases.num_bases + b;
        for (int k = 0; k < 4; ++k) d_bases.rotations[4 * o + k] += d_raw[k];
        for (int k = 0; k < 3; ++k) d_bases.translations[3 * o + k] += w[b] * d_translation[k];
    }
    // softmax adjoint
    double dot = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) dot += w[b] * dw[b];
    for (std::size_t b = 0; b < w.size(); ++b) d_logits[b] += w[b] * (dw[b] - dot);
}

Gaussian deform_gaussian(const Gaussian& canonical, std::span<const double> coeff_logits,
                         const MotionBasisSet& bases, int t) {
    const RigidTransform tr = compose_motion(coeff_logits, bases, t);
    Gaussian g = canonical;
    g.mean = tr.apply(canonical.mean);
    g.rotation = quat::mul(tr.rotation, quat::normalized(canonical.rotation));
    return g;
}

void deform_gaussian_backward(const Gaussian& canonical, std::span<const double> coeff_logits,
                              const MotionBasisSet& bases, int t, GaussianGrad& grad,
                              std::span<double> d_logits, MotionBasisSet& d_bases) {
    const RigidTransform tr = compose_motion(coeff_logits, bases, t);
    const Vec4 q0 = quat::normalized(canonical.rotation);
    const Mat3 r = tr.matrix();

    Vec4 d_motion_q = Vec4::Zero();
    Vec4 d_q0 = Vec4::Zero();
    quat::mul_backward(tr.rotation, q0, grad.rotation, d_motion_q, d_q0);

    const Mat3 d_r = grad.mean * canonical.mean.transpose();
    d_motion_q += quat::to_matrix_backward(tr.rotation, d_r);
    const Vec3 d_mean0 = r.transpose() * grad.mean;
    const Vec3 d_trans = grad.mean;

    compose_motion_backward(coeff_logits, bases, t, d_motion_q, d_trans, d_logits, d_bases);

    grad.mean = d_mean0;
    grad.rotation = quat::normalize_backward(canonical.rotation, d_q0);
}

}  // namespace blurgs
