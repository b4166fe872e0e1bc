#include "blurgs/render/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace blurgs {

RenderGrad RenderGrad::zeros(int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    return {std::vector<double>(3 * n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

namespace {

struct ProjectionTerms {
    Vec3 pc;
    Mat3 world_rot;
    Mat23 jac;
    Mat3 rot;      // Gaussian rotation
    Mat3 factor;   // rot * diag(scale)
    Mat3 cov3;
    Mat23 m;       // jac * world_rot
    Mat2 cov2;
};

ProjectionTerms projection_terms(const Gaussian& g, const Camera& cam, double cov_floor) {
    ProjectionTerms p;
    p.pc = cam.to_camera(g.mean);
    p.world_rot = cam.rotation;
    const Mat3& k = cam.intrinsics;
    const double x = p.pc.x(), y = p.pc.y(), z = p.pc.z();
    p.jac << k(0, 0) / z, k(0, 1) / z, -(k(0, 0) * x + k(0, 1) * y) / (z * z),
             0.0, k(1, 1) / z, -k(1, 1) * y / (z * z);
    p.rot = quat::to_matrix(quat::normalized(g.rotation));
    p.factor = p.rot * g.scale.asDiagonal();
    p.cov3 = p.factor * p.factor.transpose();
    p.m = p.jac * p.world_rot;
    p.cov2 = p.m * p.cov3 * p.m.transpose();
    p.cov2(0, 0) += cov_floor;
    p.cov2(1, 1) += cov_floor;
    return p;
}

template <typename Fn>
void parallel_rows(int height, int threads, Fn&& fn) {
    if (threads <= 1 || height < 2) {
        fn(0, height, 0);
        return;
    }
    const int n = std::min(threads, height);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int y0 = height * i / n;
        const int y1 = height * (i + 1) / n;
        pool.emplace_back([&, y0, y1, i] { fn(y0, y1, i); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::optional<Splat2D> splat_project(const Gaussian& g, const Camera& cam, double cov_floor) {
    const Vec3 pc = cam.to_camera(g.mean);
    if (pc.z() <= kNearPlane) return std::nullopt;
    const ProjectionTerms p = projection_terms(g, cam, cov_floor);
    const Mat3& k = cam.intrinsics;
    Splat2D s;
    s.mean = {(k(0, 0) * pc.x() + k(0, 1) * pc.y()) / pc.z() + k(0, 2), k(1, 1) * pc.y() / pc.z() + k(1, 2)};
    s.cov = p.cov2;
    s.conic = p.cov2.inverse();
    s.depth = pc.z();
    s.opacity = g.opacity;
    s.color = g.color;
    return s;
}

GaussianGrad splat_project_backward(const Gaussian& g, const Camera& cam, double cov_floor,
                                    const Splat2DGrad& grad) {
    const ProjectionTerms p = projection_terms(g, cam, cov_floor);
    const Mat3& k = cam.intrinsics;
    const double x = p.pc.x(), y = p.pc.y(), z = p.pc.z();
    const double z2 = z * z, z3 = z2 * z;

    const Mat2 conic = p.cov2.inverse();
    const Mat2 g_cov2 = -conic * grad.conic * conic;
    const Mat23 g_m = (g_cov2 + g_cov2.transpose()) * p.m * p.cov3;
    const Mat3 g_cov3 = p.m.transpose() * g_cov2 * p.m;
    const Mat23 g_jac = g_m * p.world_rot.transpose();
    const Mat3 g_factor = (g_cov3 + g_cov3.transpose()) * p.factor;

    GaussianGrad out;
    Mat3 g_rot = g_factor * g.scale.asDiagonal();
    for (int c = 0; c < 3; ++c) out.scale[c] = g_factor.col(c).dot(p.rot.col(c));
    const Vec4 qn = quat::normalized(g.rotation);
    out.rotation = quat::normalize_backward(g.rotation, quat::to_matrix_backward(qn, g_rot));

    Vec3 d_pc = Vec3::Zero();
    // screen-space mean
    d_pc.x() += grad.mean.x() * k(0, 0) / z;
    d_pc.y() += grad.mean.x() * k(0, 1) / z + grad.mean.y() * k(1, 1) / z;
    d_pc.z() += -grad.mean.x() * (k(0, 0) * x + k(0, 1) * y) / z2 - grad.mean.y() * k(1, 1) * y / z2;
    // projection Jacobian
    d_pc.x() += g_jac(0, 2) * (-k(0, 0) / z2);
    d_pc.y() += g_jac(0, 2) * (-k(0, 1) / z2) + g_jac(1, 2) * (-k(1, 1) / z2);
    d_pc.z() += g_jac(0, 0) * (-k(0, 0) / z2) + g_jac(0, 1) * (-k(0, 1) / z2) +
                g_jac(0, 2) * (2.0 * (k(0, 0) * x + k(0, 1) * y) / z3) + g_jac(1, 1) * (-k(1, 1) / z2) +
                g_jac(1, 2) * (2.0 * k(1, 1) * y / z3);
    d_pc.z() += grad.depth;

    out.mean = cam.rotation.transpose() * d_pc;
    out.opacity = grad.opacity;
    out.color = grad.color;
    return out;
}

RenderOutput rasterize(std::span<const Splat2D> splats, const Camera& cam,
                       const RenderSettings& settings, RasterCache* cache) {
    const int width = cam.width, height = cam.height;
    const std::size_t npix = static_cast<std::size_t>(width) * height;

    std::vector<int> order(splats.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return splats[a].depth < splats[b].depth; });

    // Fragments are generated splat by splat in depth order, then bucketed per pixel.
    struct Raw {
        int pixel;
        int splat;
        double alpha;
        bool clamped;
    };
    std::vector<Raw> raw;
    std::vector<std::size_t> counts(npix + 1, 0);
    for (int si : order) {
        const Splat2D& s = splats[si];
        if (!(s.opacity > 0.0)) continue;
        const double lambda_max = 0.5 * (s.cov(0, 0) + s.cov(1, 1)) +
                                  std::sqrt(0.25 * (s.cov(0, 0) - s.cov(1, 1)) * (s.cov(0, 0) - s.cov(1, 1)) +
                                            s.cov(0, 1) * s.cov(0, 1));
        const double r = settings.extent_sigma * std::sqrt(lambda_max);
        const int x0 = std::max(0, static_cast<int>(std::ceil(s.mean.x() - r)));
        const int x1 = std::min(width - 1, static_cast<int>(std::floor(s.mean.x() + r)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(s.mean.y() - r)));
        const int y1 = std::min(height - 1, static_cast<int>(std::floor(s.mean.y() + r)));
        if (x0 > x1 || y0 > y1) continue;
        const double a = s.conic(0, 0), b = s.conic(0, 1), c = s.conic(1, 1);
        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const double dx = px - s.mean.x(), dy = py - s.mean.y();
                const double power = -0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy);
                double alpha = s.opacity * std::exp(power);
                if (!(alpha > 0.0)) continue;
                bool clamped = false;
                if (alpha > settings.alpha_max) {
                    alpha = settings.alpha_max;
                    clamped = true;
                }
                const int pix = py * width + px;
                raw.push_back({pix, si, alpha, clamped});
                ++counts[pix + 1];
            }
        }
    }

    RasterCache local;
    RasterCache& rc = cache ? *cache : local;
    rc.valid = true;
    rc.width = width;
    rc.height = height;
    rc.splats.assign(splats.begin(), splats.end());
    rc.offsets.assign(npix + 1, 0);
    for (std::size_t i = 0; i < npix; ++i) rc.offsets[i + 1] = rc.offsets[i] + counts[i + 1];
    rc.fragments.resize(raw.size());
    {
        std::vector<std::size_t> cursor(rc.offsets.begin(), rc.offsets.end() - 1);
        for (const Raw& f : raw) rc.fragments[cursor[f.pixel]++] = {f.splat, f.alpha, 0.0, f.clamped};
    }
    rc.depth_numerator.assign(npix, 0.0);
    rc.accumulated.assign(npix, 0.0);
    rc.final_transmittance.assign(npix, 1.0);

    RenderOutput out;
    out.width = width;
    out.height = height;
    out.image.assign(3 * npix, 0.0);
    out.depth.assign(npix, settings.far_depth);
    out.mask.assign(npix, 0.0);
    out.alpha.assign(npix, 0.0);

    parallel_rows(height, settings.threads, [&](int ry0, int ry1, int) {
        for (std::size_t pix = static_cast<std::size_t>(ry0) * width; pix < static_cast<std::size_t>(ry1) * width;
             ++pix) {
            double trans = 1.0;
            Vec3 color = Vec3::Zero();
            double num = 0.0, acc = 0.0, mask = 0.0;
            for (std::size_t f = rc.offsets[pix]; f < rc.offsets[pix + 1]; ++f) {
                Fragment& frag = rc.fragments[f];
                const Splat2D& s = splats[frag.splat];
                frag.transmittance = trans;
                const double w = frag.alpha * trans;
                color += w * s.color;
                num += w * s.depth;
                acc += w;
                if (s.dynamic) mask += w;
                trans *= 1.0 - frag.alpha;
            }
            color += trans * settings.background;
            for (int ch = 0; ch < 3; ++ch) out.image[3 * pix + ch] = color[ch];
            out.alpha[pix] = acc;
            out.mask[pix] = mask;
            const double thr = settings.min_depth_alpha;
            out.depth[pix] = acc >= thr ? num / acc : (num + (thr - acc) * settings.far_depth) / thr;
            rc.depth_numerator[pix] = num;
            rc.accumulated[pix] = acc;
            rc.final_transmittance[pix] = trans;
        }
    });
    return out;
}

std::vector<Splat2DGrad> rasterize_backward(const RasterCache& cache, const RenderGrad& grad,
                                            const RenderSettings& settings) {
    if (!cache.valid) throw std::logic_error("rasterize_backward: forward cache is missing");
    const int width = cache.width, height = cache.height;
    const auto& splats = cache.splats;

    const int nthreads = std::max(1, std::min(settings.threads, height));
    std::vector<std::vector<Splat2DGrad>> partial(nthreads, std::vector<Splat2DGrad>(splats.size()));

    parallel_rows(height, nthreads, [&](int ry0, int ry1, int tid) {
        auto& g = partial[tid];
        for (std::size_t pix = static_cast<std::size_t>(ry0) * width; pix < static_cast<std::size_t>(ry1) * width;
             ++pix) {
            const Vec3 d_img = grad.image.empty()
                                   ? Vec3::Zero()
                                   : Vec3(grad.image[3 * pix], grad.image[3 * pix + 1], grad.image[3 * pix + 2]);
            const double d_mask = grad.mask.empty() ? 0.0 : grad.mask[pix];
            double d_num = 0.0, d_acc = 0.0;
            const double acc = cache.accumulated[pix];
            if (!grad.depth.empty()) {
                const double thr = settings.min_depth_alpha;
                if (acc >= thr) {
                    d_num = grad.depth[pix] / acc;
                    d_acc = -grad.depth[pix] * cache.depth_numerator[pix] / (acc * acc);
                } else {
                    d_num = grad.depth[pix] / thr;
                    d_acc = -grad.depth[pix] * settings.far_depth / thr;
                }
            }
            if (d_img.isZero() && d_mask == 0.0 && d_num == 0.0 && d_acc == 0.0) continue;

            Vec3 suffix_color = cache.final_transmittance[pix] * settings.background;
            double suffix_mask = 0.0, suffix_num = 0.0, suffix_acc = 0.0;
            const int px = static_cast<int>(pix % width), py = static_cast<int>(pix / width);
            for (std::size_t f = cache.offsets[pix + 1]; f-- > cache.offsets[pix];) {
                const Fragment& frag = cache.fragments[f];
                const Splat2D& s = splats[frag.splat];
                const double t = frag.transmittance;
                const double w = frag.alpha * t;
                const double inv = 1.0 / (1.0 - frag.alpha);
                const double dyn = s.dynamic ? 1.0 : 0.0;

                double d_alpha = d_img.dot(t * s.color - suffix_color * inv);
                d_alpha += d_mask * (dyn * t - suffix_mask * inv);
                d_alpha += d_num * (s.depth * t - suffix_num * inv);
                d_alpha += d_acc * (t - suffix_acc * inv);

                Splat2DGrad& sg = g[frag.splat];
                sg.color += w * d_img;
                sg.depth += w * d_num;

                suffix_color += w * s.color;
                suffix_mask += w * dyn;
                suffix_num += w * s.depth;
                suffix_acc += w;

                if (frag.clamped) continue;
                const double gauss = frag.alpha / s.opacity;
                sg.opacity += gauss * d_alpha;
                const double d_power = frag.alpha * d_alpha;
                const double dx = px - s.mean.x(), dy = py - s.mean.y();
                const double a = s.conic(0, 0), b = s.conic(0, 1), c = s.conic(1, 1);
                // power = -0.5 d^T Q d, d = pixel - mean
                sg.mean.x() += d_power * (a * dx + b * dy);
                sg.mean.y() += d_power * (b * dx + c * dy);
                sg.conic(0, 0) += -0.5 * d_power * dx * dx;
                sg.conic(0, 1) += -0.5 * d_power * dx * dy;
                sg.conic(1, 0) += -0.5 * d_power * dx * dy;
                sg.conic(1, 1) += -0.5 * d_power * dy * dy;
            }
        }
    });

    std::vector<Splat2DGrad> out = std::move(partial[0]);
    for (int tid = 1; tid < nthreads; ++tid) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Splat2DGrad& p = partial[tid][i];
            out[i].mean += p.mean;
            out[i].conic += p.conic;
            out[i].depth += p.depth;
            out[i].opacity += p.opacity;
            out[i].color += p.color;
        }
    }
    return out;
}

}  // namespace blurgs
