#include "blurgs/blur/blur_path.hpp"
#include "blurgs/io/checkpoint.hpp"
#include "blurgs/io/config.hpp"
#include "blurgs/io/dataset.hpp"
#include "blurgs/io/image_io.hpp"
#include "blurgs/metrics/image_metrics.hpp"
#include "blurgs/optimize/evaluate.hpp"
#include "blurgs/optimize/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace blurgs;

namespace {

const std::vector<int> kKernelSizes{5, 7, 9, 11, 13};

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string indexed(const char* stem, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03d.%s", stem, i, ext);
    return buf;
}

struct GenerateArgs {
    fs::path out, config;
    std::string preset, kernel;
    int kernel_size = 0, frames = 0, width = 0, height = 0;
    double sigma = 0.0, length = 0.0, theta = std::nan("");
    std::int64_t seed = -1;
    bool static_scene = false;
};

int run_generate(const GenerateArgs& a) {
    SynthConfig c = a.config.empty() ? SynthConfig{} : synth_config_from_json(read_text(a.config));
    if (!a.preset.empty()) c.preset = a.preset;
    if (!a.kernel.empty()) c.kernel.type = a.kernel;
    if (a.kernel_size > 0) c.kernel.size = a.kernel_size;
    if (a.sigma > 0.0) c.kernel.sigma = a.sigma;
    if (a.length > 0.0) c.kernel.length = a.length;
    if (!std::isnan(a.theta)) c.kernel.theta = a.theta;
    if (a.frames > 0) c.frames = a.frames;
    if (a.width > 0) c.width = a.width;
    if (a.height > 0) c.height = a.height;
    if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
    if (a.static_scene) c.static_scene = true;
    c.validate();
    const SyntheticSequence seq = generate_sequence(c);
    write_dataset(a.out, seq);
    std::cout << "wrote " << seq.frames() << " frames (" << c.width << "x" << c.height << ", " << c.preset << ", "
              << c.kernel.type << " kernel) to " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    fs::path data, out, config;
    std::int64_t seed = -1;
    int iterations = -2, total = 0, kernel_size = 0, checkpoint_every = -1;
    bool no_blur = false, deterministic = false;
};

int run_train(const TrainArgs& a) {
    TrainConfig c = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
    if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
    if (a.iterations >= -1) c.max_iterations = a.iterations;
    if (a.total > 0) c.schedule.total_iterations = a.total;
    if (a.kernel_size > 0) c.blur.kernel_size = a.kernel_size;
    if (a.checkpoint_every >= 0) c.checkpoint_every = a.checkpoint_every;
    if (a.no_blur) c.blur_enabled = false;
    if (a.deterministic) c.render.threads = 1;
    const TrainingData data = load_dataset(a.data);
    fs::create_directories(a.out);
    write_text(a.out / "config.json", train_config_to_json(c));
    Trainer trainer(data, c);
    std::ofstream log(a.out / "metrics.jsonl", std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write metrics stream in " + a.out.string());
    trainer.run(&log, a.out);
    const EvalReport report = evaluate(trainer.scene(), c.blur_enabled ? &trainer.net() : nullptr, data, c.render);
    const std::string text = eval_report_to_json(report, !a.deterministic);
    write_text(a.out / "report.json", text);
    std::cout << text;
    return 0;
}

struct ModelArgs {
    fs::path data, checkpoint;
};

struct RenderArgs : ModelArgs {
    fs::path out;
    std::string views = "train";
};

// Maps depth to [0, 1] for viewing; the PFM keeps the metric values.
std::vector<double> depth_preview(const std::vector<double>& depth, double far) {
    double lo = far, hi = 0.0;
    for (double d : depth) {
        if (d < far) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    std::vector<double> out(depth.size(), 0.0);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        out[i] = depth[i] >= far || hi <= lo ? 0.0 : 1.0 - (depth[i] - lo) / (hi - lo);
    }
    return out;
}

int run_render(const RenderArgs& a) {
    const TrainingData data = load_dataset(a.data);
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const bool novel = a.views == "novel";
    const std::vector<Camera>& cams = novel ? data.novel_cameras : data.cameras;
    fs::create_directories(a.out);
    const RenderSettings settings;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const int f = cams[i].frame, idx = static_cast<int>(i);
        const RenderOutput out = render(ck.scene, cams[i], f, settings);
        BlurPathCache<float> cache;
        const std::vector<double> blurred = blur_forward(ck.net, out, f, cache);
        write_png(a.out / indexed("sharp", idx, "png"), out.image, out.width, out.height, 3);
        write_png(a.out / indexed("blurred", idx, "png"), blurred, out.width, out.height, 3);
        write_pfm(a.out / indexed("depth", idx, "pfm"), out.depth, out.width, out.height);
        write_png(a.out / indexed("depth", idx, "png"), depth_preview(out.depth, settings.far_depth), out.width,
                  out.height, 1);
        write_png(a.out / indexed("mask", idx, "png"), out.mask, out.width, out.height, 1);
        write_png(a.out / indexed("intensity", idx, "png"), cache.field().intensity, out.width, out.height, 1);
    }
    std::cout << "rendered " << cams.size() << " " << a.views << " views to " << a.out << "\n";
    return 0;
}

struct EvalArgs : ModelArgs {
    fs::path image_a, image_b, report;
    bool no_blur = false, deterministic = false;
};

int run_eval(const EvalArgs& a) {
    std::string text;
    if (!a.image_a.empty() || !a.image_b.empty()) {
        if (a.image_a.empty() || a.image_b.empty()) throw std::invalid_argument("eval: --a and --b go together");
        const LoadedImage x = read_png(a.image_a), y = read_png(a.image_b);
        if (x.width != y.width || x.height != y.height || x.channels != y.channels) {
            throw std::invalid_argument("eval: images differ in size or channel count");
        }
        const double p = psnr(x.data, y.data);
        nlohmann::ordered_json j;
        j["psnr"] = std::isinf(p) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(p);
        j["ssim"] = ssim(x.data, y.data, x.width, x.height, x.channels);
        j["lpips"] = nullptr;
        text = j.dump(2) + "\n";
    } else {
        if (a.data.empty() || a.checkpoint.empty()) throw std::invalid_argument("eval: need --data and --checkpoint, or --a and --b");
        const TrainingData data = load_dataset(a.data);
        const Checkpoint ck = load_checkpoint(a.checkpoint);
        const EvalReport r = evaluate(ck.scene, a.no_blur ? nullptr : &ck.net, data, RenderSettings{});
        text = eval_report_to_json(r, !a.deterministic);
    }
    std::cout << text;
    if (!a.report.empty()) write_text(a.report, text);
    return 0;
}

struct InspectArgs : ModelArgs {
    fs::path out;
    int view = 0, scale = 8;
    std::vector<std::string> pixels;
};

std::pair<int, int> parse_pixel(const std::string& s) {
    int x = 0, y = 0;
    char sep = 0;
    std::istringstream in(s);
    if (!(in >> x >> sep >> y) || sep != ',') throw std::invalid_argument("pixel must be given as x,y: " + s);
    return {x, y};
}

// Kernels side by side, each scaled to its own maximum, nearest-neighbor upsampled.
int run_inspect(const InspectArgs& a) {
    const TrainingData data = load_dataset(a.data);
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    if (a.view < 0 || a.view >= data.frames()) throw std::out_of_range("inspect-blur: view index out of range");
    const RenderOutput out = render(ck.scene, data.cameras[a.view], data.cameras[a.view].frame, RenderSettings{});
    const BlurField field = predict_blur(ck.net, out, a.view);
    std::vector<std::pair<int, int>> pixels;
    for (const auto& s : a.pixels) pixels.push_back(parse_pixel(s));
    if (pixels.empty()) pixels.emplace_back(data.width / 2, data.height / 2);

    const int k = field.kernel_size, cell = k * a.scale, gap = 2;
    const int gw = static_cast<int>(pixels.size()) * (cell + gap) - gap;
    std::vector<double> grid(static_cast<std::size_t>(gw) * cell, 1.0);
    nlohmann::ordered_json j;
    j["view"] = a.view;
    j["kernel_size"] = k;
    j["pixels"] = nlohmann::ordered_json::array();
    for (std::size_t n = 0; n < pixels.size(); ++n) {
        const auto [x, y] = pixels[n];
        if (x < 0 || y < 0 || x >= data.width || y >= data.height) throw std::out_of_range("inspect-blur: pixel outside the image");
        const std::size_t p = static_cast<std::size_t>(y) * data.width + x;
        const auto taps = field.kernel(p);
        const double peak = *std::max_element(taps.begin(), taps.end());
        for (int r = 0; r < cell; ++r) {
            for (int c = 0; c < cell; ++c) {
                grid[static_cast<std::size_t>(r) * gw + n * (cell + gap) + c] = taps[(r / a.scale) * k + c / a.scale] / peak;
            }
        }
        j["pixels"].push_back({{"x", x}, {"y", y}, {"intensity", field.intensity[p]},
                               {"kernel", std::vector<double>(taps.begin(), taps.end())}});
    }
    fs::create_directories(a.out);
    write_png(a.out / indexed("kernels_view", a.view, "png"), grid, gw, cell, 1);
    write_png(a.out / indexed("intensity_view", a.view, "png"), field.intensity, data.width, data.height, 1);
    write_text(a.out / indexed("kernels_view", a.view, "json"), j.dump(2) + "\n");
    std::cout << "wrote kernel grid for " << pixels.size() << " pixels of view " << a.view << " to " << a.out << "\n";
    return 0;
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--data", m.data, "Dataset directory")->check(CLI::ExistingDirectory);
    cmd->add_option("--checkpoint", m.checkpoint, "Checkpoint file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic Gaussian splatting from blurred monocular video"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic blurred dataset");
    g->add_option("--out", gen.out, "Output dataset directory")->required();
    g->add_option("--config", gen.config, "Generator config (JSON)")->check(CLI::ExistingFile);
    g->add_option("--preset", gen.preset, "Scene preset")
        ->check(CLI::IsMember({"orbiting-spheres", "sliding-sprite", "two-body"}));
    g->add_option("--kernel", gen.kernel, "Blur kernel type")->check(CLI::IsMember({"gaussian", "motion", "none"}));
    g->add_option("--kernel-size", gen.kernel_size, "Kernel size K")->check(CLI::IsMember(kKernelSizes));
    g->add_option("--sigma", gen.sigma, "Gaussian kernel sigma in pixels");
    g->add_option("--length", gen.length, "Motion kernel length in pixels");
    g->add_option("--theta", gen.theta, "Motion kernel direction in radians");
    g->add_option("--frames", gen.frames, "Number of frames");
    g->add_option("--width", gen.width, "Image width");
    g->add_option("--height", gen.height, "Image height");
    g->add_option("--seed", gen.seed, "Random seed");
    g->add_flag("--static", gen.static_scene, "Drop the dynamic objects");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Optimize a scene and blur model on a dataset");
    t->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    t->add_option("--out", tr.out, "Output directory for checkpoints, metrics and report")->required();
    t->add_option("--config", tr.config, "Training config (JSON)")->check(CLI::ExistingFile);
    t->add_option("--seed", tr.seed, "Random seed");
    t->add_option("--iterations", tr.iterations, "Stop after this many iterations");
    t->add_option("--total-iterations", tr.total, "Schedule length (learning-rate decay horizon)");
    t->add_option("--kernel-size", tr.kernel_size, "Predicted kernel size K")->check(CLI::IsMember(kKernelSizes));
    t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint interval (0: final only)");
    t->add_flag("--no-blur", tr.no_blur, "Disable the blur model (ablation)");
    t->add_flag("--deterministic", tr.deterministic, "Single-threaded, timing-free report");

    RenderArgs rd;
    auto* r = app.add_subcommand("render", "Render sharp, blurred, depth, mask and intensity images");
    add_model_options(r, rd);
    r->get_option("--data")->required();
    r->get_option("--checkpoint")->required();
    r->add_option("--out", rd.out, "Output directory")->required();
    r->add_option("--views", rd.views, "Camera set")->check(CLI::IsMember({"train", "novel"}));

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate a checkpoint or compare two images");
    add_model_options(e, ev);
    e->add_option("--a", ev.image_a, "First PNG")->check(CLI::ExistingFile);
    e->add_option("--b", ev.image_b, "Second PNG")->check(CLI::ExistingFile);
    e->add_option("--report", ev.report, "Also write the report here");
    e->add_flag("--no-blur", ev.no_blur, "Skip the blur model (no kernel metrics)");
    e->add_flag("--deterministic", ev.deterministic, "Leave out wall-clock timings");

    InspectArgs in;
    auto* i = app.add_subcommand("inspect-blur", "Visualize predicted kernels at chosen pixels");
    add_model_options(i, in);
    i->get_option("--data")->required();
    i->get_option("--checkpoint")->required();
    i->add_option("--out", in.out, "Output directory")->required();
    i->add_option("--view", in.view, "Training view index");
    i->add_option("--pixel", in.pixels, "Pixel as x,y (repeatable)");
    i->add_option("--scale", in.scale, "Upsampling factor per tap")->check(CLI::Range(1, 64));

    CLI11_PARSE(app, argc, argv);
    try {
        if (g->parsed()) return run_generate(gen);
        if (t->parsed()) return run_train(tr);
        if (r->parsed()) return run_render(rd);
        if (e->parsed()) return run_eval(ev);
        if (i->parsed()) return run_inspect(in);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
