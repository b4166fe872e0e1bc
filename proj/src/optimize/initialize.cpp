#include "blurgs/optimize/initialize.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace blurgs {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

Vec3 observed_color(const TrainingData& data, int frame, const Vec3& world) {
    const auto p = project(world, data.cameras[frame]);
    if (!p) return Vec3::Constant(0.5);
    const int x = std::clamp(static_cast<int>(std::lround(p->pixel.x())), 0, data.width - 1);
    const int y = std::clamp(static_cast<int>(std::lround(p->pixel.y())), 0, data.height - 1);
    const std::size_t q = static_cast<std::size_t>(y) * data.width + x;
    const auto& img = data.observed[frame];
    return Vec3(img[3 * q], img[3 * q + 1], img[3 * q + 2]);
}

}  // namespace

void InitConfig::validate() const {
    if (num_bases <= 0) throw std::invalid_argument("number of motion bases must be positive");
    if (static_stride <= 0) throw std::invalid_argument("static stride must be positive");
    if (!(opacity > 0.0 && opacity < 1.0)) throw std::invalid_argument("initial opacity must lie in (0, 1)");
    if (!(footprint > 0.0)) throw std::invalid_argument("initial footprint must be positive");
}

RigidTransform kabsch(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.empty() || src.size() != dst.size()) throw std::invalid_argument("kabsch: need matching non-empty point sets");
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(src.size());
    cd /= static_cast<double>(src.size());
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
    RigidTransform tr;
    tr.rotation = quat::from_matrix(r);
    tr.translation = cd - r * cs;
    return tr;
}

std::vector<int> kmeans(const std::vector<std::vector<double>>& rows, int k, int iterations, std::uint64_t seed) {
    const std::size_t n = rows.size();
    std::vector<int> label(n, 0);
    if (n == 0 || k <= 1) return label;
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centers;
    centers.push_back(rows[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) d2[i] = std::min(d2[i], squared_distance(rows[i], c));
            total += d2[i];
        }
        if (!(total > 0.0)) {
            centers.push_back(centers.back());  // fewer distinct rows than clusters
            continue;
        }
        const double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= pick) {
                chosen = i;
                break;
            }
        }
        centers.push_back(rows[chosen]);
    }
    for (int it = 0; it < iterations; ++it) {
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(rows[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            changed |= label[i] != best;
            label[i] = best;
        }
        if (!changed) break;
        std::vector<std::vector<double>> sums(k, std::vector<double>(rows[0].size(), 0.0));
        std::vector<int> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[label[i]];
            for (std::size_t j = 0; j < rows[i].size(); ++j) sums[label[i]][j] += rows[i][j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // keep the previous center
            for (double& v : sums[c]) v /= counts[c];
            centers[c] = std::move(sums[c]);
        }
    }
    return label;
}

Scene initialize_scene(const TrainingData& data, const InitConfig& config, std::uint64_t seed) {
    config.validate();
    data.validate();
    const int frames = data.frames(), nb = config.num_bases;
    const double focal = data.cameras[0].fx();
    Scene scene;
    scene.bases = MotionBasisSet::identity(nb, frames);

    if (!data.tracks.empty()) {
        std::vector<std::vector<double>> rows;
        for (const auto& tr : data.tracks) {
            std::vector<double> row;
            row.reserve(3 * (frames - 1));
            for (int t = 1; t < frames; ++t) {
                const Vec3 d = tr[t] - tr[0];
                row.insert(row.end(), {d.x(), d.y(), d.z()});
            }
            rows.push_back(std::move(row));
        }
        const std::vector<int> label = kmeans(rows, nb, config.kmeans_iterations, seed);
        std::vector<Vec3> all0;
        for (const auto& tr : data.tracks) all0.push_back(tr[0]);
        for (int t = 1; t < frames; ++t) {
            std::vector<Vec3> all_t;
            for (const auto& tr : data.tracks) all_t.push_back(tr[t]);
            const RigidTransform global = kabsch(all0, all_t);
            for (int b = 0; b < nb; ++b) {
                std::vector<Vec3> src, dst;
                for (std::size_t i = 0; i < data.tracks.size(); ++i) {
                    if (label[i] != b) continue;
                    src.push_back(data.tracks[i][0]);
                    dst.push_back(data.tracks[i][t]);
                }
                scene.bases.set(t, b, src.size() >= 3 ? kabsch(src, dst) : global);
            }
        }

        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> noise(0.0, config.logit_noise);
        for (std::size_t i = 0; i < data.tracks.size(); ++i) {
            const Vec3 p = data.tracks[i][0];
            const double depth = data.cameras[0].to_camera(p).z();
            // Track spacing on the image grid is inferred from the nearest other track.
            double spacing = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < data.tracks.size(); ++j) {
                if (j != i) spacing = std::min(spacing, (data.tracks[j][0] - p).norm());
            }
            if (!std::isfinite(spacing)) spacing = depth / focal;
            Gaussian g;
            g.mean = p;
            g.scale = Vec3::Constant(config.footprint * spacing);
            g.opacity = config.opacity;
            g.color = observed_color(data, 0, p);
            std::vector<double> logits(nb);
            for (int b = 0; b < nb; ++b) logits[b] = (b == label[i] ? config.logit_scale : 0.0) + noise(rng);
            scene.append_dynamic(g, logits);
        }
    }

    const int stride = config.static_stride;
    std::vector<int> lift_frames{0, frames / 2, frames - 1};
    lift_frames.erase(std::unique(lift_frames.begin(), lift_frames.end()), lift_frames.end());
    for (int f : lift_frames) {
        const Camera& cam = data.cameras[f];
        for (int y = stride / 2; y < data.height; y += stride) {
            for (int x = stride / 2; x < data.width; x += stride) {
                const std::size_t p = static_cast<std::size_t>(y) * data.width + x;
                if (data.mask[f][p] > 0.5 || !(data.depth[f][p] > 0.0)) continue;
                Gaussian g;
                g.mean = unproject(Vec2(x, y), data.depth[f][p], cam);
                g.scale = Vec3::Constant(config.footprint * stride * data.depth[f][p] / cam.fx());
                g.opacity = config.opacity;
                g.color = Vec3(data.observed[f][3 * p], data.observed[f][3 * p + 1], data.observed[f][3 * p + 2]);
                scene.statics.append(g);
            }
        }
    }
    scene.project_to_constraints();
    return scene;
}

}  // namespace blurgs
