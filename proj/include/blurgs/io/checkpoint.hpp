#pragma once

#include "blurgs/blur/blur_net.hpp"
#include "blurgs/scene/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace blurgs {

// Binary checkpoint, little-endian:
//   magic "BLURGSCK" (8 bytes), u32 version, i64 iteration,
//   u64 n + n bytes of JSON metadata (basis/frame counts, cloud sizes, BP-Net config),
//   u32 tensor count, then per tensor: u32 name length, name, u8 dtype (0 f64, 1 f32),
//   u64 element count, raw elements.
// Tensors appear in for_each_tensor order, scene first. Round trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::int64_t iteration = 0;
    Scene scene;
    BlurNet<float> net;
};

// Writes to a temporary file next to `path` and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Scene& scene, const BlurNet<float>& net,
                     std::int64_t iteration);

// Throws std::runtime_error on a bad magic, unsupported version, or truncated / inconsistent file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace blurgs
