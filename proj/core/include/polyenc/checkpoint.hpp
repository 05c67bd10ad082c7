#pragma once

#include <map>
#include <string>

#include "polyenc/tasks.hpp"

namespace polyenc {

// Binary checkpoint: magic "PGEC1", a little-endian uint64 header length, a
// JSON header (configs, metrics, PCA metadata, blob directory), then the raw
// little-endian float64 blobs in directory order. Write -> read -> write is
// byte-identical.
struct Checkpoint {
  std::string task = "shapes";  // "shapes" | "relations"
  TrainConfig train_cfg;
  Model model;  // best-validation parameters
  std::map<std::string, double> metrics;
  bool has_resume = false;
  ResumeState resume;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace polyenc
