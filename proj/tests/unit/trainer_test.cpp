#include "blurgs/io/checkpoint.hpp"
#include "blurgs/optimize/initialize.hpp"
#include "blurgs/optimize/trainer.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace blurgs {
namespace {

TEST(Kabsch, RecoversRandomRigidTransforms) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec4 q = testing::random_quat(rng);
        const Vec3 t(n(rng), n(rng), n(rng));
        std::vector<Vec3> src, dst;
        for (int i = 0; i < 8; ++i) {
            src.emplace_back(n(rng), n(rng), n(rng));
            dst.push_back(quat::rotate(q, src.back()) + t);
        }
        const RigidTransform fit = kabsch(src, dst);
        EXPECT_LT(quat::angle_between(fit.rotation, q), 1e-7);
        EXPECT_LT((fit.translation - t).norm(), 1e-9);
    }
}

TEST(Kabsch, MirroredPointsStillGiveARotation) {
    const std::vector<Vec3> src{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
    std::vector<Vec3> dst;
    for (const Vec3& p : src) dst.emplace_back(-p.x(), p.y(), p.z());
    const Mat3 r = quat::to_matrix(kabsch(src, dst).rotation);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_THROW(kabsch(std::vector<Vec3>{}, std::vector<Vec3>{}), std::invalid_argument);
}

TEST(KMeans, SeparatesWellSpacedClustersDeterministically) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 0.05);
    std::vector<std::vector<double>> rows;
    const std::vector<std::vector<double>> centers{{0, 0}, {5, 0}, {0, 5}};
    for (int i = 0; i < 60; ++i) rows.push_back({centers[i % 3][0] + n(rng), centers[i % 3][1] + n(rng)});
    const auto a = kmeans(rows, 3, 50, 9), b = kmeans(rows, 3, 50, 9);
    EXPECT_EQ(a, b);
    for (int i = 3; i < 60; ++i) EXPECT_EQ(a[i], a[i % 3]);
    EXPECT_EQ(std::set<int>(a.begin(), a.end()).size(), 3u);
}

TrainingData tiny_data(const std::string& preset = "orbiting-spheres", int frames = 3) {
    SynthConfig c;
    c.preset = preset;
    c.width = 32;
    c.height = 32;
    c.focal = 35.0;
    c.frames = frames;
    return training_data_from(generate_sequence(c));
}

TEST(InitializeScene, DynamicsFollowTheTracks) {
    const TrainingData data = tiny_data("orbiting-spheres", 4);
    const Scene s = initialize_scene(data, InitConfig{}, 3);
    validate_scene(s);
    ASSERT_EQ(s.dynamics.size(), data.tracks.size());
    EXPECT_EQ(s.num_bases(), 4);
    EXPECT_GT(s.statics.size(), 0u);
    double worst = 0.0;
    for (std::size_t g = 0; g < s.dynamics.size(); ++g) {
        for (int t = 0; t < data.frames(); ++t) worst = std::max(worst, (s.dynamic_at(g, t).mean - data.tracks[g][t]).norm());
    }
    EXPECT_LT(worst, 1e-6);
}

TrainConfig scaled_config() {
    TrainConfig c;
    c.schedule = {60, 20, 5, 10, 30, 45};
    c.densify.trigger_iteration = 10;
    c.densify.pixels_per_frame = 4;
    c.blur.hidden = 16;
    c.eval_every = 0;
    return c;
}

TEST(Trainer, ZeroIterationsReturnsInitialization) {
    const TrainingData data = tiny_data();
    TrainConfig c;
    c.max_iterations = 0;
    Trainer tr(data, c);
    EXPECT_TRUE(tr.done());
    tr.run();
    const Scene init = initialize_scene(data, c.init, c.seed);
    EXPECT_EQ(tr.scene().statics.means, init.statics.means);
    EXPECT_EQ(tr.scene().dynamics.means, init.dynamics.means);
    EXPECT_EQ(tr.scene().motion_logits, init.motion_logits);
    EXPECT_EQ(tr.scene().bases.translations, init.bases.translations);
    EXPECT_THROW(tr.step(), std::logic_error);
}

TEST(Trainer, RejectsInvalidSchedules) {
    const TrainingData data = tiny_data();
    TrainConfig c;
    c.schedule.blur_start = 6000;
    EXPECT_THROW(Trainer(data, c), std::invalid_argument);
    c = {};
    c.schedule.densify_iteration = 100;
    EXPECT_THROW(Trainer(data, c), std::invalid_argument);
}

TEST(Trainer, ScheduleTraceFollowsTheStageGates) {
    const TrainingData data = tiny_data();
    Trainer tr(data, scaled_config());
    std::vector<IterationRecord> log;
    while (!tr.done()) log.push_back(tr.step());
    ASSERT_EQ(log.size(), 60u);
    int densify_events = 0;
    for (const IterationRecord& r : log) {
        const int i = r.iteration;
        const auto has = [&](const char* e) { return std::find(r.events.begin(), r.events.end(), e) != r.events.end(); };
        densify_events += has("densify");
        EXPECT_EQ(has("densify"), i == 10) << i;
        EXPECT_EQ(r.blur, i >= 30) << i;
        EXPECT_EQ(has("blur_on"), i == 30) << i;
        EXPECT_EQ(r.sparsity, i >= 45) << i;
        EXPECT_EQ(r.loss.sparsity > 0.0, i >= 45) << i;
        EXPECT_EQ(r.view != ViewKind::Train, i >= 20 && (i - 20) % 5 == 0) << i;
        EXPECT_TRUE(r.skipped.empty());
        const std::string line = to_json_line(r);
        EXPECT_NE(line.find("\"iteration\":" + std::to_string(i)), std::string::npos);
    }
    EXPECT_EQ(densify_events, 1);
    EXPECT_EQ(log[9].densified, 12u);
    validate_scene(tr.scene());
    for (const GaussianCloud* cloud : {&tr.scene().statics, &tr.scene().dynamics}) {
        for (std::size_t g = 0; g < cloud->size(); ++g) EXPECT_NEAR(cloud->gaussian(g).rotation.norm(), 1.0, 1e-12);
    }
}

// Frames are visited once per epoch in a seeded order.
TEST(Trainer, EveryFrameOncePerEpoch) {
    const TrainingData data = tiny_data("sliding-sprite", 4);
    TrainConfig c = scaled_config();
    c.max_iterations = 12;
    Trainer tr(data, c);
    std::vector<int> frames;
    while (!tr.done()) frames.push_back(tr.step().frame);
    for (int epoch = 0; epoch < 3; ++epoch) {
        std::vector<int> e(frames.begin() + 4 * epoch, frames.begin() + 4 * epoch + 4);
        std::sort(e.begin(), e.end());
        EXPECT_EQ(e, (std::vector<int>{0, 1, 2, 3}));
    }
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Trainer, IdenticalSeedsGiveIdenticalCheckpoints) {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("blurgs_trainer_test_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const TrainingData data = tiny_data();
    TrainConfig c = scaled_config();
    std::vector<std::string> logs;
    for (const char* run : {"a", "b"}) {
        fs::create_directories(root / run);
        Trainer tr(data, c);
        std::ostringstream log;
        tr.run(&log, root / run);
        logs.push_back(log.str());
    }
    EXPECT_EQ(logs[0], logs[1]);
    const std::string a = read_bytes(root / "a" / "checkpoint_60.bin");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_bytes(root / "b" / "checkpoint_60.bin"));
    const Checkpoint ck = load_checkpoint(root / "a" / "checkpoint_60.bin");
    EXPECT_EQ(ck.iteration, 60);
    fs::remove_all(root);
}

TEST(Trainer, LossDecreasesOnAMicroScene) {
    const TrainingData data = tiny_data();
    TrainConfig c;
    c.max_iterations = 2000;
    c.eval_every = 0;
    Trainer tr(data, c);
    std::vector<double> losses;
    while (!tr.done()) losses.push_back(tr.step().loss.total());
    const auto mean = [](auto first, auto last) { return std::accumulate(first, last, 0.0) / std::distance(first, last); };
    const double start = mean(losses.begin(), losses.begin() + 30), end = mean(losses.end() - 30, losses.end());
    EXPECT_LT(end, start);
    EXPECT_LT(end, 0.8 * start);
}

}  // namespace
}  // namespace blurgs
