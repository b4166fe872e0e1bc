#include "blurgs/optimize/training_data.hpp"

#include <limits>
#include <stdexcept>

namespace blurgs {

void TrainingData::validate() const {
    const std::size_t n = pixels();
    const std::size_t t = cameras.size();
    if (width <= 0 || height <= 0 || t < 2) throw std::invalid_argument("training data needs images and two or more frames");
    if (observed.size() != t || depth.size() != t || mask.size() != t) {
        throw std::invalid_argument("training data: one image, depth and mask per camera required");
    }
    for (std::size_t f = 0; f < t; ++f) {
        cameras[f].validate();
        if (cameras[f].width != width || cameras[f].height != height) throw std::invalid_argument("training data: camera size mismatch");
        if (observed[f].size() != 3 * n || depth[f].size() != n || mask[f].size() != n) {
            throw std::invalid_argument("training data: buffer size mismatch");
        }
    }
    for (const auto& tr : tracks) {
        if (tr.size() != t) throw std::invalid_argument("training data: every track needs one point per frame");
    }
    if (!novel_cameras.empty() && novel_sharp.size() != novel_cameras.size()) {
        throw std::invalid_argument("training data: one held-out image per held-out camera required");
    }
    if (!gt_kernel.empty() && gt_kernel.size() != static_cast<std::size_t>(kernel_size) * kernel_size) {
        throw std::invalid_argument("training data: kernel size mismatch");
    }
}

std::vector<std::vector<Vec3>> make_tracks(const SyntheticSequence& seq, int stride) {
    if (stride <= 0) throw std::invalid_argument("track stride must be positive");
    const Scene& gt = seq.gt.scene;
    const Camera& cam = seq.gt.cameras[0];
    std::vector<std::vector<Vec3>> tracks;
    if (gt.dynamics.size() == 0) return tracks;
    const int w = seq.width(), h = seq.height();
    for (int y = stride / 2; y < h; y += stride) {
        for (int x = stride / 2; x < w; x += stride) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            if (seq.mask[0][p] < 0.5) continue;
            const Vec3 point = unproject(Vec2(x, y), seq.depth[0][p], cam);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < gt.dynamics.size(); ++g) {
                const double d = (gt.dynamics.mean(g) - point).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = g;
                }
            }
            std::vector<Vec3> track(seq.frames());
            for (int t = 0; t < seq.frames(); ++t) track[t] = compose_motion(gt.logits(best), gt.bases, t).apply(point);
            tracks.push_back(std::move(track));
        }
    }
    return tracks;
}

TrainingData training_data_from(const SyntheticSequence& seq, int track_stride) {
    TrainingData d;
    d.width = seq.width();
    d.height = seq.height();
    d.cameras = seq.gt.cameras;
    d.observed = seq.blurred;
    d.depth = seq.depth;
    d.mask = seq.mask;
    d.tracks = make_tracks(seq, track_stride);
    d.look_depth = seq.gt.look_depth;
    d.novel_cameras = seq.gt.novel_cameras;
    d.novel_sharp = seq.novel_sharp;
    d.gt_kernel = seq.kernel;
    d.kernel_size = seq.config.kernel.size;
    return d;
}

}  // namespace blurgs
