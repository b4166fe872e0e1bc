#include "blurgs/synth/sequence.hpp"

#include "blurgs/blur/blur_field.hpp"
#include "blurgs/render/render.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace blurgs {

namespace {

// Nominal layout (before normalization): cameras on a shallow arc about z = 3, a textured
// background plane at z = 4 and rigid objects around z = 2.6.
constexpr double kArcRadius = 3.0;
constexpr double kArcHalfAngle = 0.16;
constexpr double kPlaneDepth = 4.0;
constexpr double kPlaneHalfExtent = 3.0;
constexpr double kPlaneSpacing = 0.16;

struct RigidObject {
    std::vector<Gaussian> gaussians;
    std::vector<RigidTransform> motion;  // per frame, frame 0 identity
    Vec3 center;
};

// Rotation taking +z to `normal`.
Vec4 frame_for_normal(const Vec3& normal) {
    const Vec3 z = normal.normalized();
    const Vec3 helper = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 x = helper.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return quat::from_matrix(r);
}

std::vector<Gaussian> make_sphere(const Vec3& center, double radius, int count, const Vec3& color_a,
                                  const Vec3& color_b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(-0.06, 0.06);
    std::vector<Gaussian> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double s = 0.85 * std::sqrt(4 * std::numbers::pi * radius * radius / count);
    for (int i = 0; i < count; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / count;
        const double rr = std::sqrt(1.0 - y * y);
        const double phi = golden * i;
        const Vec3 n(rr * std::cos(phi), y, rr * std::sin(phi));
        Gaussian g;
        g.mean = center + radius * n;
        g.rotation = frame_for_normal(n);
        g.scale = Vec3(s, s, 0.3 * s);
        g.opacity = 0.95;
        const bool stripe = static_cast<int>(std::floor((std::atan2(n.z(), n.x()) + std::numbers::pi) * 3.0 / std::numbers::pi)) % 2 == 0;
        const Vec3 base = (stripe ? color_a : color_b) * (0.75 + 0.25 * (y + 1) / 2);
        g.color = (base + Vec3(jitter(rng), jitter(rng), jitter(rng))).cwiseMax(0.0).cwiseMin(1.0);
        out.push_back(g);
    }
    return out;
}

// X_t = R(angle_rate t) (X - pivot) + pivot + velocity t.
std::vector<RigidTransform> spin_and_drift(int frames, const Vec3& pivot, const Vec3& axis, double angle_rate,
                                           const Vec3& velocity) {
    std::vector<RigidTransform> m(frames);
    for (int t = 0; t < frames; ++t) {
        RigidTransform tr;
        tr.rotation = t == 0 ? quat::identity() : quat::from_axis_angle(axis, angle_rate * t);
        tr.translation = pivot - quat::rotate(tr.rotation, pivot) + velocity * t;
        m[t] = tr;
    }
    return m;
}

std::vector<RigidObject> make_objects(const SynthConfig& cfg, std::mt19937_64& rng) {
    std::vector<RigidObject> objs;
    const int T = cfg.frames;
    if (cfg.preset == "orbiting-spheres") {
        const Vec3 o(0.0, 0.0, 2.6);
        RigidObject a;
        auto s1 = make_sphere(o + Vec3(-0.3, 0, 0), 0.2, 100, Vec3(0.95, 0.3, 0.2), Vec3(0.95, 0.9, 0.3), rng);
        auto s2 = make_sphere(o + Vec3(0.3, 0, 0), 0.2, 100, Vec3(0.2, 0.45, 0.95), Vec3(0.3, 0.95, 0.6), rng);
        a.gaussians = s1;
        a.gaussians.insert(a.gaussians.end(), s2.begin(), s2.end());
        a.motion = spin_and_drift(T, o, Vec3(0.2, 0.25, 1.0), 0.09, Vec3(0.015, -0.01, 0.0));
        a.center = o;
        objs.push_back(std::move(a));
    } else if (cfg.preset == "sliding-sprite") {
        const Vec3 c(-0.1, 0.0, 2.6);
        RigidObject a;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        // Two nearly coincident opaque layers facing the first camera, so the card occludes the
        // background completely and has a known depth.
        const Vec3 target(0.0, 0.0, kArcRadius);
        const Vec3 eye0 = target + kArcRadius * Vec3(std::sin(-kArcHalfAngle), 0.0, -std::cos(-kArcHalfAngle));
        const Vec3 nz = (target - eye0).normalized();
        const Vec3 nx_axis = Vec3::UnitY().cross(nz).normalized();
        const Vec3 ny_axis = nz.cross(nx_axis);
        const Vec4 facing = frame_for_normal(nz);
        const int nx = 13, ny = 9;
        const double sp = 0.07;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const bool check = ((i / 2) + (j / 2)) % 2 == 0;
                const Vec3 color = check ? Vec3(0.95, 0.85 * u(rng), 0.1) : Vec3(0.1, 0.3 * u(rng), 0.9);
                for (int layer = 0; layer < 2; ++layer) {
                    Gaussian g;
                    g.mean = c + (i - (nx - 1) / 2.0) * sp * nx_axis + (j - (ny - 1) / 2.0) * sp * ny_axis +
                             2e-4 * layer * nz;
                    g.rotation = facing;
                    g.scale = Vec3(0.6 * sp, 0.6 * sp, 1e-3);
                    g.opacity = 0.99;
                    g.color = color;
                    a.gaussians.push_back(g);
                }
            }
        }
        a.motion = spin_and_drift(T, c, Vec3::UnitZ(), 0.03, Vec3(0.05, 0.01, 0.0));
        a.center = c;
        objs.push_back(std::move(a));
    } else if (cfg.preset == "two-body") {
        RigidObject a, b;
        a.center = Vec3(-0.4, 0.1, 2.6);
        a.gaussians = make_sphere(a.center, 0.22, 110, Vec3(0.95, 0.35, 0.2), Vec3(0.9, 0.9, 0.9), rng);
        a.motion = spin_and_drift(T, a.center, Vec3::UnitZ(), 0.0, Vec3(0.04, 0.0, 0.0));
        b.center = Vec3(0.35, -0.1, 2.8);
        b.gaussians = make_sphere(b.center, 0.22, 110, Vec3(0.2, 0.8, 0.3), Vec3(0.3, 0.3, 0.95), rng);
        b.motion = spin_and_drift(T, b.center, Vec3::UnitY(), 0.12, Vec3(0.0, 0.03, -0.01));
        objs.push_back(std::move(a));
        objs.push_back(std::move(b));
    } else {
        throw std::invalid_argument("unknown preset: " + cfg.preset);
    }
    return objs;
}

}  // namespace

void SynthConfig::validate() const {
    if (width < 16 || height < 16) throw std::invalid_argument("synthetic images must be at least 16 x 16");
    if (frames < 2) throw std::invalid_argument("synthetic sequences need at least two frames");
    if (!(focal > 0.0)) throw std::invalid_argument("focal length must be positive");
    if (preset != "orbiting-spheres" && preset != "sliding-sprite" && preset != "two-body") {
        throw std::invalid_argument("unknown preset: " + preset);
    }
    kernel.build();
}

double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

GtScene build_scene(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const int T = cfg.frames;
    Mat3 k = Mat3::Identity();
    k(0, 0) = k(1, 1) = cfg.focal;
    k(0, 2) = (cfg.width - 1) / 2.0;
    k(1, 2) = (cfg.height - 1) / 2.0;

    GtScene gt;
    const Vec3 target(0.0, 0.0, kArcRadius);
    std::vector<Vec3> eyes(T), novel_eyes(T);
    for (int t = 0; t < T; ++t) {
        const double phi = kArcHalfAngle * (2.0 * t / (T - 1) - 1.0);
        const double phi_n = kArcHalfAngle * (2.0 * (t + (t + 1 < T ? 0.5 : -0.5)) / (T - 1) - 1.0);
        eyes[t] = target + kArcRadius * Vec3(std::sin(phi), 0.0, -std::cos(phi));
        novel_eyes[t] = target + kArcRadius * Vec3(std::sin(phi_n), 0.0, -std::cos(phi_n)) + Vec3(0.0, 0.08, 0.0);
    }
    Eigen::AlignedBox3d box;
    for (const Vec3& e : eyes) box.extend(e);
    const double s = 1.0 / box.diagonal().norm();
    gt.normalization = s;
    gt.look_depth = s * kArcRadius;
    for (int t = 0; t < T; ++t) {
        Camera c = Camera::look_at(k, cfg.width, cfg.height, s * eyes[t], s * target, Vec3(0, -1, 0));
        c.frame = t;
        gt.cameras.push_back(c);
        Camera n = Camera::look_at(k, cfg.width, cfg.height, s * novel_eyes[t], s * target, Vec3(0, -1, 0));
        n.frame = t;
        gt.novel_cameras.push_back(n);
    }

    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int steps = static_cast<int>(std::floor(2 * kPlaneHalfExtent / kPlaneSpacing)) + 1;
    for (int j = 0; j < steps; ++j) {
        for (int i = 0; i < steps; ++i) {
            Gaussian g;
            g.mean = s * Vec3(-kPlaneHalfExtent + i * kPlaneSpacing, -kPlaneHalfExtent + j * kPlaneSpacing, kPlaneDepth);
            g.scale = s * Vec3(0.65 * kPlaneSpacing, 0.65 * kPlaneSpacing, 0.01);
            g.opacity = 0.97;
            g.color = Vec3(0.1 + 0.8 * u(rng), 0.1 + 0.8 * u(rng), 0.1 + 0.8 * u(rng));
            gt.scene.statics.append(g);
        }
    }

    const auto objects = cfg.static_scene ? std::vector<RigidObject>{} : make_objects(cfg, rng);
    gt.num_objects = static_cast<int>(objects.size());
    const int nb = std::max(1, gt.num_objects);
    gt.scene.bases = MotionBasisSet::identity(nb, T);
    for (int o = 0; o < gt.num_objects; ++o) {
        const RigidObject& obj = objects[o];
        for (int t = 1; t < T; ++t) {
            RigidTransform tr = obj.motion[t];
            tr.translation *= s;
            gt.scene.bases.set(t, o, tr);
        }
        std::vector<double> logits(nb, nb > 1 ? -50.0 : 0.0);
        if (nb > 1) logits[o] = 50.0;
        for (Gaussian g : obj.gaussians) {
            g.mean *= s;
            g.scale *= s;
            gt.scene.append_dynamic(g, logits);
            gt.object_of.push_back(o);
        }
        gt.object_centers.push_back(s * obj.center);
    }
    return gt;
}

SyntheticSequence generate_sequence(const SynthConfig& cfg) {
    SyntheticSequence seq;
    seq.config = cfg;
    seq.gt = build_scene(cfg);
    seq.kernel = cfg.kernel.build();
    const BlurField field = BlurField::broadcast(cfg.width, cfg.height, seq.kernel);
    RenderSettings rs;
    for (int t = 0; t < cfg.frames; ++t) {
        const RenderOutput out = render(seq.gt.scene, seq.gt.cameras[t], t, rs);
        std::vector<double> sharp(out.image.size());
        for (std::size_t i = 0; i < sharp.size(); ++i) sharp[i] = quantize8(out.image[i]);
        std::vector<double> blurred = convolve_blur(sharp, field);
        for (double& v : blurred) v = quantize8(v);
        std::vector<double> depth(out.depth.size()), mask(out.mask.size());
        for (std::size_t p = 0; p < depth.size(); ++p) {
            depth[p] = static_cast<double>(static_cast<float>(out.depth[p]));
            mask[p] = out.mask[p] > 0.5 ? 1.0 : 0.0;
        }
        seq.sharp.push_back(std::move(sharp));
        seq.blurred.push_back(std::move(blurred));
        seq.depth.push_back(std::move(depth));
        seq.mask.push_back(std::move(mask));
        const RenderOutput nv = render(seq.gt.scene, seq.gt.novel_cameras[t], t, rs);
        std::vector<double> ns(nv.image.size());
        for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = quantize8(nv.image[i]);
        seq.novel_sharp.push_back(std::move(ns));
    }
    return seq;
}

}  // namespace blurgs
