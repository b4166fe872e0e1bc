#pragma once

#include "blurgs/blur/blur_net.hpp"
#include "blurgs/densify/densify.hpp"
#include "blurgs/optimize/adam.hpp"
#include "blurgs/optimize/initialize.hpp"
#include "blurgs/optimize/objective.hpp"
#include "blurgs/optimize/training_data.hpp"
#include "blurgs/unseen/unseen.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace blurgs {

// Iterations are numbered from 1. Densification runs at the end of `densify_iteration`; the
// blur path and L_spa are active from their start iterations on; unseen views replace training
// views at unseen_start, unseen_start + unseen_interval, ...
struct Schedule {
    int total_iterations = 40000;
    int unseen_start = 3000;
    int unseen_interval = 5;
    int densify_iteration = 2500;
    int blur_start = 3500;
    int sparsity_start = 5500;

    // Requires 0 < N_d < blur start < N_spa <= total and a positive unseen interval.
    void validate() const;

    bool blur_active(int iteration) const { return iteration >= blur_start; }
    bool sparsity_active(int iteration) const { return iteration >= sparsity_start; }
    bool unseen_iteration(int iteration) const {
        return iteration >= unseen_start && (iteration - unseen_start) % unseen_interval == 0;
    }
};

struct LearningRates {
    double means = 1.6e-4;
    double means_final = 1.6e-6;  // exponential decay over the schedule
    double opacity = 5e-2;
    double scales = 5e-3;
    double rotations = 1e-3;
    double colors = 2.5e-3;
    double motion_coefficients = 1e-2;
    double motion_bases = 1.6e-4;
    double blur_net = 5e-4;

    void validate() const;
};

struct UnseenConfig {
    bool enabled = true;
    double parallel_share = 0.5;  // probability of a parallel rather than perpendicular view
    double offset_min = 0.5;
    double offset_max = 1.0;
    PerpendicularMode mode = PerpendicularMode::ViewPlane;
    WarpOptions warp;

    void validate() const;
};

struct TrainConfig {
    Schedule schedule;
    LossWeights weights;
    DensifyConfig densify;
    LearningRates lr;
    AdamConfig adam;
    BlurNetConfig blur;
    InitConfig init;
    UnseenConfig unseen;
    bool blur_enabled = true;  // false: B^ = I~ throughout (ablation)
    int max_iterations = -1;   // stop early after this many iterations; -1 runs the schedule
    int eval_every = 1000;     // held-out PSNR in the metrics stream; 0 disables
    int checkpoint_every = 0;  // 0 disables periodic checkpoints
    std::uint64_t seed = 1;
    RenderSettings render;

    // Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
    int last_iteration() const;
};

enum class ViewKind { Train, Parallel, Perpendicular };
const char* to_string(ViewKind kind);

struct IterationRecord {
    int iteration = 0;
    int frame = 0;
    ViewKind view = ViewKind::Train;
    bool blur = false;
    bool sparsity = false;
    LossTerms loss;
    std::vector<std::string> events;   // "densify", "blur_on", "sparsity_on", "unseen_on"
    std::size_t densified = 0;
    std::vector<std::string> skipped;  // tensors whose non-finite gradients were dropped
    double heldout_psnr = -1.0;        // negative when not evaluated this iteration
};

std::string to_json_line(const IterationRecord& record);

class Trainer {
public:
    // Validates the config and data and builds the initial scene and BP-Net.
    Trainer(const TrainingData& data, const TrainConfig& config);

    int iteration() const { return iteration_; }
    bool done() const { return iteration_ >= config_.last_iteration(); }

    // Runs one iteration and returns its record. Throws std::runtime_error if any parameter
    // becomes non-finite.
    IterationRecord step();
    // Runs until done(), writing one JSON line per iteration to `log` when given.
    void run(std::ostream* log = nullptr, const std::filesystem::path& checkpoint_dir = {});

    const Scene& scene() const { return scene_; }
    const BlurNet<float>& net() const { return net_; }
    const TrainConfig& config() const { return config_; }
    const TrainingData& data() const { return data_; }
    const Adam& optimizer() const { return adam_; }

    // Mean PSNR of the sharp render against the held-out views (-1 without held-out data).
    double heldout_psnr() const;

private:
    struct UnseenTargets {
        Camera camera;
        ViewKind kind;
        WarpedTargets warped;
    };

    int next_frame();
    UnseenTargets make_unseen(int frame);
    void apply_gradients(Scene& grad, BlurNet<float>& net_grad, bool blur, IterationRecord& record);
    void densify_now(IterationRecord& record);

    TrainingData data_;
    TrainConfig config_;
    Scene scene_;
    BlurNet<float> net_;
    Adam adam_;
    std::mt19937_64 rng_;
    std::vector<int> order_;
    std::size_t order_pos_ = 0;
    int epoch_ = 0;
    int iteration_ = 0;
};

}  // namespace blurgs
