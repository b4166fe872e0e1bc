#pragma once

#include "blurgs/optimize/training_data.hpp"
#include "blurgs/synth/sequence.hpp"

#include <filesystem>

namespace blurgs {

// Dataset directory layout (version 1):
//   dataset.json         version, image size, frame count, cameras and held-out cameras
//                        (intrinsics, world-to-camera rotation and translation, frame), look
//                        depth, GT kernel (size and row-major taps), generator config
//   tracks.json          [[x, y, z] per frame] per track, world space
//   observed/NNN.png     blurred observation per frame (8-bit RGB)
//   sharp/NNN.png        GT sharp frame
//   mask/NNN.png         GT motion mask (8-bit gray, 0 or 255)
//   depth/NNN.pfm        GT depth (single-channel float PFM)
//   novel/NNN.png        GT sharp image at the held-out camera of frame NNN
inline constexpr int kDatasetVersion = 1;

void write_dataset(const std::filesystem::path& dir, const SyntheticSequence& seq, int track_stride = 2);

// Throws std::runtime_error on a missing file or version mismatch.
TrainingData load_dataset(const std::filesystem::path& dir);

}  // namespace blurgs
