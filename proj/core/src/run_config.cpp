#include "polyenc/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polyenc/error.hpp"

namespace polyenc {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  std::string bad;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      if (!bad.empty()) bad += ", ";
      bad += it.key();
    }
  }
  if (!bad.empty()) fail(Errc::config, "unknown keys in " + where + ": " + bad);
}

const char* norm_mode_name(SpectrumNorm m) {
  switch (m) {
    case SpectrumNorm::none: return "none";
    case SpectrumNorm::l2: return "l2";
    case SpectrumNorm::batch_stats: return "batch_stats";
  }
  return "?";
}

SpectrumNorm norm_mode_from_name(const std::string& s) {
  if (s == "none") return SpectrumNorm::none;
  if (s == "l2") return SpectrumNorm::l2;
  if (s == "batch_stats") return SpectrumNorm::batch_stats;
  fail(Errc::config, "unknown norm_mode '" + s + "'");
}

json encoder_to_json_obj(const EncoderConfig& c) {
  return json{{"kind", encoder_kind_name(c.kind)},
              {"d", c.d},
              {"t", c.t},
              {"K", c.resnet_blocks},
              {"N_wx", c.n_wx},
              {"w_min", c.w_min},
              {"w_max", c.w_max},
              {"pca_var", c.pca_var},
              {"mlp_layers", c.mlp_layers},
              {"mlp_hidden", c.mlp_hidden},
              {"norm_mode", norm_mode_name(c.norm_mode)},
              {"raster_side", c.raster_side},
              {"dropout", c.dropout},
              {"veer_layers", c.veer_layers},
              {"padding", c.conv_pad == nn::Pad::zero ? "zero" : "circular"}};
}

EncoderConfig encoder_from_json_obj(const json& j) {
  reject_unknown(j,
                 {"kind", "d", "t", "K", "N_wx", "w_min", "w_max", "pca_var", "mlp_layers",
                  "mlp_hidden", "norm_mode", "raster_side", "dropout", "veer_layers", "padding"},
                 "encoder");
  EncoderConfig c;
  if (j.contains("kind")) c.kind = encoder_kind_from_name(j["kind"].get<std::string>());
  c.d = j.value("d", c.d);
  c.t = j.value("t", c.t);
  c.resnet_blocks = j.value("K", c.resnet_blocks);
  c.n_wx = j.value("N_wx", c.n_wx);
  c.w_min = j.value("w_min", c.w_min);
  c.w_max = j.value("w_max", c.w_max);
  c.pca_var = j.value("pca_var", c.pca_var);
  c.mlp_layers = j.value("mlp_layers", c.mlp_layers);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  if (j.contains("norm_mode")) c.norm_mode = norm_mode_from_name(j["norm_mode"]);
  c.raster_side = j.value("raster_side", c.raster_side);
  c.dropout = j.value("dropout", c.dropout);
  c.veer_layers = j.value("veer_layers", c.veer_layers);
  if (j.contains("padding")) {
    std::string p = j["padding"];
    if (p == "zero")
      c.conv_pad = nn::Pad::zero;
    else if (p == "circular")
      c.conv_pad = nn::Pad::circular;
    else
      fail(Errc::config, "encoder.padding must be 'circular' or 'zero'");
  }
  return c;
}

json train_to_json_obj(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"optimizer", c.optimizer == TrainConfig::Opt::adam ? "adam" : "sgd"},
              {"head_layers", c.head_layers},
              {"head_hidden", c.head_hidden}};
}

TrainConfig train_from_json_obj(const json& j) {
  reject_unknown(
      j, {"lr", "epochs", "batch_size", "seed", "optimizer", "head_layers", "head_hidden"},
      "train");
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  if (j.contains("optimizer")) {
    std::string o = j["optimizer"];
    if (o == "adam")
      c.optimizer = TrainConfig::Opt::adam;
    else if (o == "sgd")
      c.optimizer = TrainConfig::Opt::sgd;
    else
      fail(Errc::config, "train.optimizer must be 'adam' or 'sgd'");
  }
  c.head_layers = j.value("head_layers", c.head_layers);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  if (!(c.lr > 0.0)) fail(Errc::config, "train.lr must be positive");
  if (c.epochs < 1) fail(Errc::config, "train.epochs must be at least 1");
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::config, "run config is not valid JSON");
  reject_unknown(j, {"version", "task", "encoder", "train"}, "run config");
  if (j.value("version", 0) != 1) fail(Errc::config, "run config version must be 1");
  RunConfig cfg;
  cfg.task = j.value("task", "shapes");
  if (cfg.task != "shapes" && cfg.task != "relations")
    fail(Errc::config, "task must be 'shapes' or 'relations'");
  if (j.contains("encoder")) cfg.encoder = encoder_from_json_obj(j["encoder"]);
  if (j.contains("train")) cfg.train = train_from_json_obj(j["train"]);
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j{{"version", 1},
         {"task", cfg.task},
         {"encoder", encoder_to_json_obj(cfg.encoder)},
         {"train", train_to_json_obj(cfg.train)}};
  return j.dump(2);
}

std::string encoder_config_to_json(const EncoderConfig& cfg) {
  return encoder_to_json_obj(cfg).dump();
}

EncoderConfig encoder_config_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::config, "encoder config is not valid JSON");
  return encoder_from_json_obj(j);
}

}  // namespace polyenc
