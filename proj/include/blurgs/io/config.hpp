#pragma once

#include "blurgs/optimize/trainer.hpp"
#include "blurgs/synth/sequence.hpp"

#include <filesystem>
#include <string>

namespace blurgs {

// JSON forms of the training and generator configs. Every field is optional on input (defaults
// apply) and unknown keys are rejected with std::invalid_argument, as is a config that fails
// validation.
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

std::string synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const std::string& text);

}  // namespace blurgs
