#pragma once

#include <optional>
#include <string>

#include "polyenc/run_config.hpp"

namespace polyenc {

// Command implementations shared by the CLI binary and the test suites.
// They throw polyenc::Error on failure; the returned int is the process
// exit code for successful runs (0, or 1 for "checks ran and failed").

struct GenOptions {
  std::string task = "shapes";  // "shapes" | "relations"
  int n = 100;                  // samples per class / per relation
  std::uint64_t seed = 0;
  double sliver_fraction = 0.0;
  int vertex_budget = 128;
  std::string out;
};
int cmd_gen(const GenOptions& opt);

struct TrainOptions {
  std::string config_path;
  std::string data_path;
  std::string valid_path;   // empty: every 10th sample is held out
  std::string out_path;     // checkpoint; history goes to out + ".history.json"
  std::string resume_path;  // optional checkpoint to continue from
  // flag overrides of config keys
  std::optional<double> lr, w_min, w_max, pca_var, dropout;
  std::optional<int> epochs, batch_size, d, n_wx, resnet_blocks, t;
  std::optional<std::uint64_t> seed;
};
int cmd_train(const TrainOptions& opt);

struct EvalOptions {
  std::string checkpoint_path;
  std::string data_path;
  std::string report_path;     // empty: stdout
  std::string confusion_path;  // optional CSV
};
int cmd_eval(const EvalOptions& opt);

struct PropcheckOptions {
  std::string config_path;      // either a run config ...
  std::string checkpoint_path;  // ... or a trained checkpoint
  int n_per_class = 8;          // property corpus size
  int vertex_budget = 64;
  std::uint64_t seed = 7;
  std::string report_path;  // optional JSON
};
// Runs the Loop/TriV/ParP/Topo suites against the configured encoder.
// Returns 0 when every property required for that encoder kind holds.
int cmd_propcheck(const PropcheckOptions& opt);

struct EncodeOptions {
  std::string checkpoint_path;
  std::string data_path;
  std::string out_path;
};
int cmd_encode(const EncodeOptions& opt);

}  // namespace polyenc
