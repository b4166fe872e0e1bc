#include "blurgs/io/dataset.hpp"

#include "blurgs/io/config.hpp"
#include "blurgs/io/image_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blurgs {

namespace {

using nlohmann::ordered_json;

std::string frame_name(int f, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%03d.%s", f, ext);
    return buf;
}

ordered_json matrix_json(const Mat3& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
}

Mat3 matrix_from(const ordered_json& j) {
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) m(i, k) = j.at(i).at(k).get<double>();
    }
    return m;
}

ordered_json camera_json(const Camera& c) {
    return {{"intrinsics", matrix_json(c.intrinsics)},
            {"rotation", matrix_json(c.rotation)},
            {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}},
            {"frame", c.frame}};
}

Camera camera_from(const ordered_json& j, int width, int height) {
    Camera c;
    c.intrinsics = matrix_from(j.at("intrinsics"));
    c.rotation = matrix_from(j.at("rotation"));
    const auto& t = j.at("translation");
    c.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
    c.frame = j.at("frame");
    c.width = width;
    c.height = height;
    c.validate();
    return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ordered_json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return ordered_json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::vector<double> read_image(const std::filesystem::path& path, int width, int height, int channels) {
    LoadedImage img = read_png(path);
    if (img.width != width || img.height != height || img.channels != channels) {
        throw std::runtime_error(path.string() + ": unexpected image size or channel count");
    }
    return std::move(img.data);
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SyntheticSequence& seq, int track_stride) {
    namespace fs = std::filesystem;
    for (const char* sub : {"observed", "sharp", "mask", "depth", "novel"}) fs::create_directories(dir / sub);
    const int w = seq.width(), h = seq.height();
    ordered_json meta;
    meta["version"] = kDatasetVersion;
    meta["width"] = w;
    meta["height"] = h;
    meta["frames"] = seq.frames();
    meta["look_depth"] = seq.gt.look_depth;
    meta["normalization"] = seq.gt.normalization;
    meta["cameras"] = ordered_json::array();
    for (const Camera& c : seq.gt.cameras) meta["cameras"].push_back(camera_json(c));
    meta["novel_cameras"] = ordered_json::array();
    for (const Camera& c : seq.gt.novel_cameras) meta["novel_cameras"].push_back(camera_json(c));
    meta["kernel"] = {{"size", seq.config.kernel.size}, {"taps", seq.kernel}};
    meta["generator"] = ordered_json::parse(synth_config_to_json(seq.config));
    write_text(dir / "dataset.json", meta.dump(2) + "\n");

    ordered_json tracks = ordered_json::array();
    for (const auto& tr : make_tracks(seq, track_stride)) {
        ordered_json points = ordered_json::array();
        for (const Vec3& p : tr) points.push_back({p.x(), p.y(), p.z()});
        tracks.push_back(std::move(points));
    }
    write_text(dir / "tracks.json", tracks.dump() + "\n");

    for (int f = 0; f < seq.frames(); ++f) {
        write_png(dir / "observed" / frame_name(f, "png"), seq.blurred[f], w, h, 3);
        write_png(dir / "sharp" / frame_name(f, "png"), seq.sharp[f], w, h, 3);
        write_png(dir / "mask" / frame_name(f, "png"), seq.mask[f], w, h, 1);
        write_pfm(dir / "depth" / frame_name(f, "pfm"), seq.depth[f], w, h);
        write_png(dir / "novel" / frame_name(f, "png"), seq.novel_sharp[f], w, h, 3);
    }
}

TrainingData load_dataset(const std::filesystem::path& dir) {
    const ordered_json meta = read_json(dir / "dataset.json");
    if (meta.at("version").get<int>() != kDatasetVersion) throw std::runtime_error(dir.string() + ": unsupported dataset version");
    TrainingData d;
    d.width = meta.at("width");
    d.height = meta.at("height");
    const int frames = meta.at("frames");
    d.look_depth = meta.at("look_depth");
    for (const auto& c : meta.at("cameras")) d.cameras.push_back(camera_from(c, d.width, d.height));
    for (const auto& c : meta.at("novel_cameras")) d.novel_cameras.push_back(camera_from(c, d.width, d.height));
    d.kernel_size = meta.at("kernel").at("size");
    d.gt_kernel = meta.at("kernel").at("taps").get<std::vector<double>>();
    for (int f = 0; f < frames; ++f) {
        d.observed.push_back(read_image(dir / "observed" / frame_name(f, "png"), d.width, d.height, 3));
        d.mask.push_back(read_image(dir / "mask" / frame_name(f, "png"), d.width, d.height, 1));
        LoadedImage depth = read_pfm(dir / "depth" / frame_name(f, "pfm"));
        if (depth.width != d.width || depth.height != d.height) throw std::runtime_error("depth map size mismatch");
        d.depth.push_back(std::move(depth.data));
        if (!d.novel_cameras.empty()) d.novel_sharp.push_back(read_image(dir / "novel" / frame_name(f, "png"), d.width, d.height, 3));
    }
    for (const auto& tr : read_json(dir / "tracks.json")) {
        std::vector<Vec3> points;
        for (const auto& p : tr) points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        d.tracks.push_back(std::move(points));
    }
    d.validate();
    return d;
}

}  // namespace blurgs
