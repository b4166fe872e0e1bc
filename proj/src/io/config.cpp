#include "blurgs/io/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace blurgs {

namespace {

using nlohmann::ordered_json;

// Reads or writes one section field by field so both directions share the key list.
class Section {
public:
    Section(ordered_json* out, const ordered_json* in, std::string name) : out_(out), in_(in), name_(std::move(name)) {
        if (in_ && !in_->is_object()) throw std::invalid_argument("config section '" + name_ + "' must be an object");
    }
    ~Section() noexcept(false) {
        if (!in_ || std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : in_->items()) {
            if (!seen_.count(key)) throw std::invalid_argument("unknown config key '" + name_ + "." + key + "'");
        }
    }

    template <typename T>
    void field(const char* key, T& value) {
        seen_.insert(key);
        if (out_) (*out_)[key] = value;
        if (in_ && in_->contains(key)) {
            try {
                value = in_->at(key).get<T>();
            } catch (const nlohmann::json::exception&) {
                throw std::invalid_argument("config key '" + name_ + "." + key + "' has the wrong type");
            }
        }
    }

    const ordered_json* child_in(const char* key) {
        seen_.insert(key);
        return in_ && in_->contains(key) ? &in_->at(key) : nullptr;
    }
    ordered_json* child_out(const char* key) { return out_ ? &(*out_)[key] : nullptr; }

private:
    ordered_json* out_;
    const ordered_json* in_;
    std::string name_;
    std::set<std::string> seen_;
};

template <typename F>
void section(Section& parent, const char* key, F&& body) {
    ordered_json* out = parent.child_out(key);
    if (out) *out = ordered_json::object();
    Section s(out, parent.child_in(key), key);
    body(s);
}

void visit(TrainConfig& c, Section& root) {
    section(root, "schedule", [&](Section& s) {
        s.field("total_iterations", c.schedule.total_iterations);
        s.field("unseen_start", c.schedule.unseen_start);
        s.field("unseen_interval", c.schedule.unseen_interval);
        s.field("densify_iteration", c.schedule.densify_iteration);
        s.field("blur_start", c.schedule.blur_start);
        s.field("sparsity_start", c.schedule.sparsity_start);
    });
    section(root, "weights", [&](Section& s) {
        s.field("beta", c.weights.beta);
        s.field("depth", c.weights.depth);
        s.field("mask", c.weights.mask);
        s.field("smooth_bases", c.weights.smooth_bases);
        s.field("smooth_means", c.weights.smooth_means);
        s.field("sparsity", c.weights.sparsity);
        s.field("sparsity_scale", c.weights.sparsity_scale);
    });
    section(root, "densify", [&](Section& s) {
        s.field("enabled", c.densify.enabled);
        s.field("trigger_iteration", c.densify.trigger_iteration);
        s.field("pixels_per_frame", c.densify.pixels_per_frame);
        s.field("use_gt_depth", c.densify.use_gt_depth);
        s.field("opacity", c.densify.opacity);
    });
    section(root, "learning_rates", [&](Section& s) {
        s.field("means", c.lr.means);
        s.field("means_final", c.lr.means_final);
        s.field("opacity", c.lr.opacity);
        s.field("scales", c.lr.scales);
        s.field("rotations", c.lr.rotations);
        s.field("colors", c.lr.colors);
        s.field("motion_coefficients", c.lr.motion_coefficients);
        s.field("motion_bases", c.lr.motion_bases);
        s.field("blur_net", c.lr.blur_net);
    });
    section(root, "adam", [&](Section& s) {
        s.field("beta1", c.adam.beta1);
        s.field("beta2", c.adam.beta2);
        s.field("eps", c.adam.eps);
    });
    section(root, "blur_net", [&](Section& s) {
        s.field("kernel_size", c.blur.kernel_size);
        s.field("hidden", c.blur.hidden);
        s.field("embed_dim", c.blur.embed_dim);
        s.field("pe_octaves", c.blur.pe_octaves);
        s.field("feature_kernels", c.blur.feature_kernels);
        s.field("skip", c.blur.skip);
        s.field("propagate_to_render", c.blur.propagate_to_render);
    });
    section(root, "init", [&](Section& s) {
        s.field("num_bases", c.init.num_bases);
        s.field("static_stride", c.init.static_stride);
        s.field("kmeans_iterations", c.init.kmeans_iterations);
        s.field("logit_scale", c.init.logit_scale);
        s.field("logit_noise", c.init.logit_noise);
        s.field("opacity", c.init.opacity);
        s.field("footprint", c.init.footprint);
    });
    section(root, "unseen", [&](Section& s) {
        s.field("enabled", c.unseen.enabled);
        s.field("parallel_share", c.unseen.parallel_share);
        s.field("offset_min", c.unseen.offset_min);
        s.field("offset_max", c.unseen.offset_max);
        std::string mode = c.unseen.mode == PerpendicularMode::ViewPlane ? "view_plane" : "horizontal";
        s.field("perpendicular_mode", mode);
        if (mode == "view_plane") c.unseen.mode = PerpendicularMode::ViewPlane;
        else if (mode == "horizontal") c.unseen.mode = PerpendicularMode::Horizontal;
        else throw std::invalid_argument("unseen.perpendicular_mode must be view_plane or horizontal");
        s.field("zbuffer_tolerance", c.unseen.warp.zbuffer_tolerance);
    });
    section(root, "render", [&](Section& s) {
        std::array<double, 3> bg{c.render.background.x(), c.render.background.y(), c.render.background.z()};
        s.field("background", bg);
        c.render.background = Vec3(bg[0], bg[1], bg[2]);
        s.field("far_depth", c.render.far_depth);
        s.field("min_depth_alpha", c.render.min_depth_alpha);
        s.field("cov_floor", c.render.cov_floor);
        s.field("alpha_max", c.render.alpha_max);
        s.field("extent_sigma", c.render.extent_sigma);
    });
    root.field("blur_enabled", c.blur_enabled);
    root.field("max_iterations", c.max_iterations);
    root.field("eval_every", c.eval_every);
    root.field("checkpoint_every", c.checkpoint_every);
    root.field("seed", c.seed);
}

void visit(SynthConfig& c, Section& root) {
    root.field("preset", c.preset);
    root.field("static_scene", c.static_scene);
    root.field("width", c.width);
    root.field("height", c.height);
    root.field("frames", c.frames);
    root.field("focal", c.focal);
    root.field("seed", c.seed);
    section(root, "kernel", [&](Section& s) {
        s.field("type", c.kernel.type);
        s.field("size", c.kernel.size);
        s.field("sigma", c.kernel.sigma);
        s.field("theta", c.kernel.theta);
        s.field("length", c.kernel.length);
    });
}

ordered_json parse(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
}

template <typename C>
std::string dump(C config) {
    ordered_json j = ordered_json::object();
    {
        Section root(&j, nullptr, "config");
        visit(config, root);
    }
    return j.dump(2);
}

template <typename C>
C load(const std::string& text) {
    const ordered_json j = parse(text);
    C config;
    {
        Section root(nullptr, &j, "config");
        visit(config, root);
    }
    config.validate();
    return config;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& config) { return dump(config); }
TrainConfig train_config_from_json(const std::string& text) {
    // The densify trigger lives in both the schedule and the densify section; either may be
    // given alone.
    ordered_json j = parse(text);
    if (j.is_object()) {
        const bool in_schedule = j.contains("schedule") && j["schedule"].is_object() && j["schedule"].contains("densify_iteration");
        const bool in_densify = j.contains("densify") && j["densify"].is_object() && j["densify"].contains("trigger_iteration");
        if (in_schedule && !in_densify) j["densify"]["trigger_iteration"] = j["schedule"]["densify_iteration"];
        if (in_densify && !in_schedule) j["schedule"]["densify_iteration"] = j["densify"]["trigger_iteration"];
    }
    return load<TrainConfig>(j.dump());
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return train_config_from_json(ss.str());
}

std::string synth_config_to_json(const SynthConfig& config) { return dump(config); }
SynthConfig synth_config_from_json(const std::string& text) { return load<SynthConfig>(text); }

}  // namespace blurgs
