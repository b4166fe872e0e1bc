#include "blurgs/optimize/trainer.hpp"

#include "blurgs/io/checkpoint.hpp"
#include "blurgs/metrics/image_metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace blurgs {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void Schedule::validate() const {
    require(densify_iteration > 0, "schedule: densify iteration must be positive");
    require(densify_iteration < blur_start, "schedule: densification must precede the blur model");
    require(blur_start < sparsity_start, "schedule: the blur model must precede the sparsity constraint");
    require(sparsity_start <= total_iterations, "schedule: sparsity start exceeds the total iterations");
    require(unseen_interval > 0, "schedule: unseen interval must be positive");
    require(unseen_start > 0, "schedule: unseen start must be positive");
}

void LearningRates::validate() const {
    for (double v : {means, means_final, opacity, scales, rotations, colors, motion_coefficients, motion_bases, blur_net}) {
        require(v >= 0.0 && std::isfinite(v), "learning rates must be finite and nonnegative");
    }
    require(means > 0.0 && means_final > 0.0, "mean learning rates must be positive for the exponential decay");
}

void UnseenConfig::validate() const {
    require(parallel_share >= 0.0 && parallel_share <= 1.0, "unseen: parallel share must lie in [0, 1]");
    require(offset_min >= 0.0 && offset_min <= offset_max, "unseen: need 0 <= offset_min <= offset_max");
    require(warp.zbuffer_tolerance >= 0.0, "unseen: z-buffer tolerance must be nonnegative");
}

void TrainConfig::validate() const {
    schedule.validate();
    weights.validate();
    densify.validate();
    require(densify.trigger_iteration == schedule.densify_iteration,
            "densify trigger iteration must match the schedule's densify iteration");
    lr.validate();
    blur.validate();
    init.validate();
    unseen.validate();
    require(max_iterations >= -1, "max_iterations must be -1 or nonnegative");
    require(eval_every >= 0 && checkpoint_every >= 0, "eval and checkpoint intervals must be nonnegative");
}

int TrainConfig::last_iteration() const {
    return max_iterations < 0 ? schedule.total_iterations : std::min(max_iterations, schedule.total_iterations);
}

const char* to_string(ViewKind kind) {
    switch (kind) {
        case ViewKind::Train: return "train";
        case ViewKind::Parallel: return "parallel";
        case ViewKind::Perpendicular: return "perpendicular";
    }
    return "train";
}

std::string to_json_line(const IterationRecord& r) {
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["frame"] = r.frame;
    j["view"] = to_string(r.view);
    j["blur"] = r.blur;
    j["sparsity"] = r.sparsity;
    j["loss"] = {{"reconstruction", r.loss.reconstruction}, {"geometry", r.loss.geometry},
                 {"smoothing", r.loss.smoothing}, {"sparsity", r.loss.sparsity}, {"total", r.loss.total()}};
    j["events"] = r.events;
    if (r.densified > 0) j["densified"] = r.densified;
    if (!r.skipped.empty()) j["skipped"] = r.skipped;
    if (r.heldout_psnr >= 0.0) j["heldout_psnr"] = r.heldout_psnr;
    return j.dump();
}

Trainer::Trainer(const TrainingData& data, const TrainConfig& config)
    : data_(data), config_(config), adam_(config.adam), rng_(config.seed) {
    config_.blur.num_views = data.frames();
    config_.validate();
    data_.validate();
    scene_ = initialize_scene(data_, config_.init, config_.seed);
    std::mt19937_64 net_rng(config_.seed + 1);
    net_ = BlurNet<float>::create(config_.blur, net_rng);
}

int Trainer::next_frame() {
    if (order_pos_ >= order_.size()) {
        order_.resize(data_.frames());
        std::iota(order_.begin(), order_.end(), 0);
        std::mt19937_64 shuffle_rng(config_.seed * 1000003ULL + static_cast<std::uint64_t>(epoch_));
        std::shuffle(order_.begin(), order_.end(), shuffle_rng);
        order_pos_ = 0;
        ++epoch_;
    }
    return order_[order_pos_++];
}

Trainer::UnseenTargets Trainer::make_unseen(int frame) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int frames = data_.frames();
    UnseenTargets out;
    const Camera& source = data_.cameras[frame];
    if (u(rng_) < config_.unseen.parallel_share) {
        const int other = frame + 1 < frames ? frame + 1 : frame - 1;
        double alpha = u(rng_);
        alpha = std::clamp(alpha, 1e-3, 1.0 - 1e-3);
        out.camera = make_parallel_view(source, data_.cameras[other], alpha);
        out.kind = ViewKind::Parallel;
    } else {
        const double offset = config_.unseen.offset_min + (config_.unseen.offset_max - config_.unseen.offset_min) * u(rng_);
        const int side = u(rng_) < 0.5 ? -1 : 1;
        out.camera = make_perpendicular_view(source, data_.cameras, frame, offset, data_.look_depth, side,
                                             config_.unseen.mode);
        out.kind = ViewKind::Perpendicular;
    }
    out.camera.frame = source.frame;
    out.warped = warp_to_unseen(data_.observed[frame], data_.mask[frame], data_.depth[frame], source, out.camera,
                                config_.unseen.warp);
    return out;
}

void Trainer::apply_gradients(Scene& grad, BlurNet<float>& net_grad, bool blur, IterationRecord& record) {
    adam_.begin_step();
    const LearningRates& lr = config_.lr;
    const double progress = std::min(1.0, static_cast<double>(iteration_) / config_.schedule.total_iterations);
    const double mean_lr = lr.means * std::pow(lr.means_final / lr.means, progress);
    auto rate_for = [&](const std::string& name) {
        if (name.ends_with(".means")) return mean_lr;
        if (name.ends_with(".quats")) return lr.rotations;
        if (name.ends_with(".log_scales")) return lr.scales;
        if (name.ends_with(".opacity_logits")) return lr.opacity;
        if (name.ends_with(".colors")) return lr.colors;
        if (name == "dynamic.motion_logits") return lr.motion_coefficients;
        return lr.motion_bases;
    };
    std::vector<std::pair<std::string, std::span<double>>> grads;
    grad.for_each_tensor([&](const std::string& name, std::span<double> g) { grads.emplace_back(name, g); });
    std::size_t k = 0;
    scene_.for_each_tensor([&](const std::string& name, std::span<double> p) {
        if (!adam_.update<double>(name, p, grads[k].second, rate_for(name))) record.skipped.push_back(name);
        ++k;
    });
    if (blur) {
        std::vector<std::span<float>> ngrads;
        net_grad.for_each_tensor([&](const std::string&, std::span<float> g) { ngrads.push_back(g); });
        k = 0;
        net_.for_each_tensor([&](const std::string& name, std::span<float> p) {
            if (!adam_.update<float>(name, p, ngrads[k], lr.blur_net)) record.skipped.push_back(name);
            ++k;
        });
    }
    scene_.project_to_constraints();

    bool finite = true;
    scene_.for_each_tensor([&](const std::string&, std::span<double> p) { finite = finite && all_finite(p); });
    net_.for_each_tensor([&](const std::string&, std::span<float> p) {
        finite = finite && std::all_of(p.begin(), p.end(), [](float x) { return std::isfinite(x); });
    });
    if (!finite) throw std::runtime_error("non-finite parameters after iteration " + std::to_string(iteration_));
}

void Trainer::densify_now(IterationRecord& record) {
    std::vector<std::vector<double>> rendered_depth;
    if (!config_.densify.use_gt_depth) {
        for (int f = 0; f < data_.frames(); ++f) {
            rendered_depth.push_back(render(scene_, data_.cameras[f], f, config_.render).depth);
        }
    }
    std::vector<DensifyFrame> frames;
    for (int f = 0; f < data_.frames(); ++f) {
        frames.push_back({data_.observed[f], config_.densify.use_gt_depth ? std::span<const double>(data_.depth[f])
                                                                          : std::span<const double>(rendered_depth[f]),
                          data_.mask[f], &data_.cameras[f], f});
    }
    record.densified = densify(scene_, frames, config_.densify, config_.seed + 2);
    record.events.push_back("densify");
}

IterationRecord Trainer::step() {
    if (done()) throw std::logic_error("Trainer::step: schedule already complete");
    ++iteration_;
    const Schedule& s = config_.schedule;
    IterationRecord record;
    record.iteration = iteration_;
    record.blur = config_.blur_enabled && s.blur_active(iteration_);
    record.sparsity = record.blur && s.sparsity_active(iteration_);
    if (config_.blur_enabled && iteration_ == s.blur_start) record.events.push_back("blur_on");
    if (config_.blur_enabled && iteration_ == s.sparsity_start) record.events.push_back("sparsity_on");
    const bool unseen = config_.unseen.enabled && s.unseen_iteration(iteration_);
    if (unseen && iteration_ == s.unseen_start) record.events.push_back("unseen_on");

    const int frame = next_frame();
    record.frame = frame;
    StageFlags flags{record.blur, record.sparsity, unseen};
    Scene grad = scene_.zeros_like();
    BlurNet<float> net_grad = record.blur ? net_.zeros_like() : BlurNet<float>{};
    if (unseen) {
        const UnseenTargets u = make_unseen(frame);
        record.view = u.kind;
        ViewTargets view{&u.camera, data_.cameras[frame].frame, frame, u.warped.color, {}, u.warped.mask, u.warped.valid};
        record.loss = total_loss(scene_, net_, view, flags, config_.weights, config_.render, &grad, &net_grad);
    } else {
        ViewTargets view{&data_.cameras[frame], data_.cameras[frame].frame, frame, data_.observed[frame],
                         data_.depth[frame], data_.mask[frame], {}};
        record.loss = total_loss(scene_, net_, view, flags, config_.weights, config_.render, &grad, &net_grad);
    }
    apply_gradients(grad, net_grad, record.blur, record);

    if (config_.densify.enabled && iteration_ == s.densify_iteration) densify_now(record);
    if (config_.eval_every > 0 && (iteration_ % config_.eval_every == 0 || done())) record.heldout_psnr = heldout_psnr();
    return record;
}

void Trainer::run(std::ostream* log, const std::filesystem::path& checkpoint_dir) {
    while (!done()) {
        const IterationRecord r = step();
        if (log) *log << to_json_line(r) << '\n';
        const bool periodic = config_.checkpoint_every > 0 && iteration_ % config_.checkpoint_every == 0;
        if (!checkpoint_dir.empty() && (periodic || done())) {
            save_checkpoint(checkpoint_dir / ("checkpoint_" + std::to_string(iteration_) + ".bin"), scene_, net_,
                            iteration_);
        }
    }
    if (log) log->flush();
}

double Trainer::heldout_psnr() const {
    if (data_.novel_cameras.empty()) return -1.0;
    double sum = 0.0;
    for (std::size_t f = 0; f < data_.novel_cameras.size(); ++f) {
        const RenderOutput out = render(scene_, data_.novel_cameras[f], data_.novel_cameras[f].frame, config_.render);
        sum += std::min(psnr(out.image, data_.novel_sharp[f]), 100.0);
    }
    return sum / static_cast<double>(data_.novel_cameras.size());
}

}  // namespace blurgs
