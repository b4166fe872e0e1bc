#include "blurgs/io/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace blurgs {

namespace {

constexpr char kMagic[8] = {'B', 'L', 'U', 'R', 'G', 'S', 'C', 'K'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

nlohmann::json blur_config_json(const BlurNetConfig& c) {
    return {{"kernel_size", c.kernel_size}, {"hidden", c.hidden},         {"embed_dim", c.embed_dim},
            {"pe_octaves", c.pe_octaves},   {"feature_kernels", c.feature_kernels},
            {"num_views", c.num_views},     {"skip", c.skip},             {"propagate_to_render", c.propagate_to_render}};
}

BlurNetConfig blur_config_from(const nlohmann::json& j) {
    BlurNetConfig c;
    c.kernel_size = j.at("kernel_size");
    c.hidden = j.at("hidden");
    c.embed_dim = j.at("embed_dim");
    c.pe_octaves = j.at("pe_octaves");
    c.feature_kernels = j.at("feature_kernels").get<std::array<int, 3>>();
    c.num_views = j.at("num_views");
    c.skip = j.at("skip");
    c.propagate_to_render = j.at("propagate_to_render");
    return c;
}

struct RawTensor {
    std::uint8_t dtype;
    std::vector<char> bytes;
    std::uint64_t count;
};

template <typename T>
void fill(const std::string& name, std::span<T> dst, const std::map<std::string, RawTensor>& raw) {
    const auto it = raw.find(name);
    if (it == raw.end()) throw std::runtime_error("checkpoint: missing tensor " + name);
    const std::uint8_t want = sizeof(T) == 8 ? 0 : 1;
    if (it->second.dtype != want || it->second.count != dst.size()) {
        throw std::runtime_error("checkpoint: tensor " + name + " has the wrong type or size");
    }
    std::memcpy(dst.data(), it->second.bytes.data(), it->second.bytes.size());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Scene& scene_in, const BlurNet<float>& net_in,
                     std::int64_t iteration) {
    Scene scene = scene_in;
    BlurNet<float> net = net_in;
    nlohmann::ordered_json meta = {{"num_bases", scene.num_bases()},
                                   {"num_frames", scene.num_frames()},
                                   {"static_count", scene.statics.size()},
                                   {"dynamic_count", scene.dynamics.size()},
                                   {"blur", blur_config_json(net.config)}};
    const std::string meta_text = meta.dump();

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(kMagic, sizeof(kMagic));
        put<std::uint32_t>(out, kCheckpointVersion);
        put<std::int64_t>(out, iteration);
        put<std::uint64_t>(out, meta_text.size());
        out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
        std::uint32_t count = 0;
        scene.for_each_tensor([&](const std::string&, std::span<double>) { ++count; });
        net.for_each_tensor([&](const std::string&, std::span<float>) { ++count; });
        put<std::uint32_t>(out, count);
        auto write_tensor = [&](const std::string& name, auto values, std::uint8_t dtype) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            put<std::uint8_t>(out, dtype);
            put<std::uint64_t>(out, values.size());
            out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
        };
        scene.for_each_tensor([&](const std::string& n, std::span<double> v) { write_tensor(n, v, 0); });
        net.for_each_tensor([&](const std::string& n, std::span<float> v) { write_tensor(n, v, 1); });
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error(path.string() + ": not a checkpoint");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw std::runtime_error(path.string() + ": unsupported checkpoint version");
    Checkpoint ck;
    ck.iteration = get<std::int64_t>(in);
    const auto meta_len = get<std::uint64_t>(in);
    std::string meta_text(meta_len, '\0');
    in.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw std::runtime_error("checkpoint: truncated metadata");
    const nlohmann::json meta = nlohmann::json::parse(meta_text);

    std::map<std::string, RawTensor> raw;
    const auto count = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = get<std::uint32_t>(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        RawTensor t;
        t.dtype = get<std::uint8_t>(in);
        if (t.dtype > 1) throw std::runtime_error("checkpoint: unknown dtype for " + name);
        t.count = get<std::uint64_t>(in);
        t.bytes.resize(t.count * (t.dtype == 0 ? 8 : 4));
        in.read(t.bytes.data(), static_cast<std::streamsize>(t.bytes.size()));
        if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
        raw.emplace(std::move(name), std::move(t));
    }

    ck.scene.bases = MotionBasisSet::identity(meta.at("num_bases"), meta.at("num_frames"));
    ck.scene.statics.resize(meta.at("static_count"));
    ck.scene.dynamics.resize(meta.at("dynamic_count"));
    ck.scene.motion_logits.assign(ck.scene.dynamics.size() * ck.scene.num_bases(), 0.0);
    ck.scene.for_each_tensor([&](const std::string& n, std::span<double> v) { fill(n, v, raw); });
    std::mt19937_64 rng(0);
    ck.net = BlurNet<float>::create(blur_config_from(meta.at("blur")), rng);
    ck.net.for_each_tensor([&](const std::string& n, std::span<float> v) { fill(n, v, raw); });
    return ck;
}

}  // namespace blurgs
