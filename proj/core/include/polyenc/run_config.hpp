#pragma once

#include <string>

#include "polyenc/tasks.hpp"

namespace polyenc {

// Single JSON document driving a training run. Unknown keys are rejected;
// "version" must be 1. Hyperparameter keys use the conventional short names
// (lr, d, N_wx, w_min, w_max, K, t, pca_var).
struct RunConfig {
  std::string task = "shapes";  // "shapes" | "relations"
  EncoderConfig encoder;
  TrainConfig train;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config_file(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

// Shared by checkpoints.
std::string encoder_config_to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const std::string& json_text);

}  // namespace polyenc
