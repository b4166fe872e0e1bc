#include "blurgs/io/checkpoint.hpp"
#include "blurgs/io/config.hpp"
#include "blurgs/io/dataset.hpp"
#include "blurgs/io/image_io.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

namespace blurgs {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("blurgs_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(ImageIo, PngRoundTripIsExactOnQuantizedValues) {
    TempDir dir;
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> u(0, 255);
    for (int channels : {1, 3}) {
        std::vector<double> img(7 * 5 * channels);
        for (double& v : img) v = u(rng) / 255.0;
        const fs::path p = dir.path() / ("img" + std::to_string(channels) + ".png");
        write_png(p, img, 7, 5, channels);
        const LoadedImage back = read_png(p);
        EXPECT_EQ(back.width, 7);
        EXPECT_EQ(back.height, 5);
        EXPECT_EQ(back.channels, channels);
        EXPECT_EQ(back.data, img);
    }
    EXPECT_THROW(read_png(dir.path() / "missing.png"), std::runtime_error);
}

TEST(ImageIo, PfmRoundTripAtFloatPrecision) {
    TempDir dir;
    std::vector<double> depth(6 * 4);
    for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = static_cast<float>(1.0 + 0.37 * i);
    write_pfm(dir.path() / "d.pfm", depth, 6, 4);
    const LoadedImage back = read_pfm(dir.path() / "d.pfm");
    EXPECT_EQ(back.width, 6);
    EXPECT_EQ(back.height, 4);
    EXPECT_EQ(back.data, depth);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    TempDir dir;
    std::mt19937_64 rng(2);
    Scene scene = testing::random_scene(rng, 7, 9, 3, 4);
    BlurNetConfig cfg;
    cfg.hidden = 8;
    cfg.num_views = 4;
    BlurNet<float> net = BlurNet<float>::create(cfg, rng);
    testing::randomize_head(net, rng, 0.2);
    const fs::path p = dir.path() / "ck.bin";
    save_checkpoint(p, scene, net, 1234);
    Checkpoint back = load_checkpoint(p);
    EXPECT_EQ(back.iteration, 1234);
    std::vector<std::vector<double>> a, b;
    scene.for_each_tensor([&](const std::string&, std::span<double> v) { a.emplace_back(v.begin(), v.end()); });
    back.scene.for_each_tensor([&](const std::string&, std::span<double> v) { b.emplace_back(v.begin(), v.end()); });
    EXPECT_EQ(a, b);
    std::vector<std::vector<float>> na, nb;
    net.for_each_tensor([&](const std::string&, std::span<float> v) { na.emplace_back(v.begin(), v.end()); });
    back.net.for_each_tensor([&](const std::string&, std::span<float> v) { nb.emplace_back(v.begin(), v.end()); });
    EXPECT_EQ(na, nb);
    EXPECT_EQ(back.net.config.hidden, 8);
    save_checkpoint(dir.path() / "ck2.bin", back.scene, back.net, back.iteration);
    EXPECT_EQ(read_bytes(p), read_bytes(dir.path() / "ck2.bin"));
}

TEST(Checkpoint, RejectsCorruptFiles) {
    TempDir dir;
    std::mt19937_64 rng(3);
    const Scene scene = testing::random_scene(rng, 2, 2, 1, 2);
    BlurNetConfig cfg;
    cfg.hidden = 4;
    const BlurNet<float> net = BlurNet<float>::create(cfg, rng);
    const fs::path p = dir.path() / "ck.bin";
    save_checkpoint(p, scene, net, 5);
    std::string bytes = read_bytes(p);
    std::ofstream(dir.path() / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    EXPECT_THROW(load_checkpoint(dir.path() / "short.bin"), std::runtime_error);
    bytes[0] = 'X';
    std::ofstream(dir.path() / "magic.bin", std::ios::binary) << bytes;
    EXPECT_THROW(load_checkpoint(dir.path() / "magic.bin"), std::runtime_error);
    EXPECT_THROW(load_checkpoint(dir.path() / "none.bin"), std::runtime_error);
}

TEST(Config, TrainConfigRoundTrip) {
    TrainConfig c;
    c.schedule.total_iterations = 9000;
    c.weights.beta = 0.3;
    c.lr.blur_net = 1e-3;
    c.blur.feature_kernels = {3, 3, 1};
    c.unseen.mode = PerpendicularMode::Horizontal;
    c.render.background = Vec3(0.1, 0.2, 0.3);
    c.seed = 42;
    c.blur_enabled = false;
    const std::string text = train_config_to_json(c);
    const TrainConfig back = train_config_from_json(text);
    EXPECT_EQ(train_config_to_json(back), text);
    EXPECT_EQ(back.schedule.total_iterations, 9000);
    EXPECT_EQ(back.unseen.mode, PerpendicularMode::Horizontal);
    EXPECT_EQ(back.blur.feature_kernels, c.blur.feature_kernels);
    EXPECT_EQ(back.seed, 42u);
}

TEST(Config, PartialConfigKeepsDefaultsAndSyncsDensifyIteration) {
    const TrainConfig c = train_config_from_json(R"({"schedule": {"densify_iteration": 1000}, "seed": 3})");
    EXPECT_EQ(c.schedule.densify_iteration, 1000);
    EXPECT_EQ(c.densify.trigger_iteration, 1000);
    EXPECT_EQ(c.schedule.blur_start, 3500);
    EXPECT_EQ(c.seed, 3u);
}

TEST(Config, RejectsUnknownKeysBadTypesAndBadSchedules) {
    EXPECT_THROW(train_config_from_json(R"({"schedul": {}})"), std::invalid_argument);
    EXPECT_THROW(train_config_from_json(R"({"weights": {"gamma": 1}})"), std::invalid_argument);
    EXPECT_THROW(train_config_from_json(R"({"seed": "one"})"), std::invalid_argument);
    EXPECT_THROW(train_config_from_json(R"({"schedule": {"blur_start": 6000}})"), std::invalid_argument);
    EXPECT_THROW(train_config_from_json(R"({"unseen": {"perpendicular_mode": "diagonal"}})"), std::invalid_argument);
    EXPECT_THROW(train_config_from_json("{"), std::invalid_argument);
}

TEST(Config, SynthConfigRoundTrip) {
    SynthConfig c;
    c.preset = "two-body";
    c.kernel.type = "motion";
    c.kernel.size = 7;
    c.frames = 5;
    const std::string text = synth_config_to_json(c);
    const SynthConfig back = synth_config_from_json(text);
    EXPECT_EQ(synth_config_to_json(back), text);
    EXPECT_EQ(back.preset, "two-body");
    EXPECT_EQ(back.kernel.size, 7);
    EXPECT_THROW(synth_config_from_json(R"({"preset": "teapot"})"), std::invalid_argument);
}

TEST(Dataset, WriteThenLoadReproducesTrainingData) {
    TempDir dir;
    SynthConfig c;
    c.frames = 3;
    c.width = 32;
    c.height = 32;
    c.focal = 35.0;
    const SyntheticSequence seq = generate_sequence(c);
    write_dataset(dir.path(), seq);
    const TrainingData expected = training_data_from(seq);
    const TrainingData got = load_dataset(dir.path());
    EXPECT_EQ(got.observed, expected.observed);
    EXPECT_EQ(got.mask, expected.mask);
    EXPECT_EQ(got.depth, expected.depth);
    EXPECT_EQ(got.novel_sharp, expected.novel_sharp);
    EXPECT_EQ(got.gt_kernel, expected.gt_kernel);
    EXPECT_EQ(got.look_depth, expected.look_depth);
    ASSERT_EQ(got.cameras.size(), expected.cameras.size());
    for (std::size_t i = 0; i < got.cameras.size(); ++i) {
        EXPECT_EQ(got.cameras[i].rotation, expected.cameras[i].rotation);
        EXPECT_EQ(got.cameras[i].translation, expected.cameras[i].translation);
        EXPECT_EQ(got.novel_cameras[i].intrinsics, expected.novel_cameras[i].intrinsics);
    }
    ASSERT_EQ(got.tracks.size(), expected.tracks.size());
    for (std::size_t i = 0; i < got.tracks.size(); ++i) EXPECT_EQ(got.tracks[i], expected.tracks[i]);
}

TEST(Dataset, GenerationIsByteIdentical) {
    TempDir a, b;
    SynthConfig c;
    c.frames = 2;
    c.width = 24;
    c.height = 24;
    write_dataset(a.path(), generate_sequence(c));
    write_dataset(b.path(), generate_sequence(c));
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a.path());
        EXPECT_EQ(read_bytes(entry.path()), read_bytes(b.path() / rel)) << rel;
        ++files;
    }
    EXPECT_EQ(files, 2u + 5u * 2u);
}

TEST(Dataset, RejectsMissingOrWrongVersion) {
    TempDir dir;
    EXPECT_THROW(load_dataset(dir.path()), std::runtime_error);
    std::ofstream(dir.path() / "dataset.json") << R"({"version": 99})";
    EXPECT_THROW(load_dataset(dir.path()), std::runtime_error);
}

}  // namespace
}  // namespace blurgs
