#include "polyenc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polyenc/error.hpp"
#include "polyenc/run_config.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float64");

namespace polyenc {

using nlohmann::json;

namespace {

constexpr char kMagic[5] = {'P', 'G', 'E', 'C', '1'};

struct BlobWriter {
  json directory = json::array();
  std::string payload;

  void add(const std::string& name, const std::vector<int>& shape,
           const std::vector<double>& data) {
    directory.push_back({{"name", name}, {"shape", shape}});
    size_t old = payload.size();
    payload.resize(old + data.size() * sizeof(double));
    std::memcpy(payload.data() + old, data.data(), data.size() * sizeof(double));
  }
  void add_tensor(const std::string& name, const nn::Tensor& t) { add(name, t.shape, t.data); }
  void add_vec(const std::string& name, const std::vector<double>& v) {
    add(name, {static_cast<int>(v.size())}, v);
  }
};

void write_model_state(BlobWriter& w, const std::string& prefix, const ModelState& st) {
  for (const auto& [name, t] : st.enc_params) w.add_tensor(prefix + name, t);
  for (const auto& [name, t] : st.head) w.add_tensor(prefix + name, t);
  for (const auto& [name, bn] : st.bn_state) {
    if (bn.running_mean.data.empty()) continue;
    w.add_tensor(prefix + "bnstate." + name + ".mean", bn.running_mean);
    w.add_tensor(prefix + "bnstate." + name + ".var", bn.running_var);
  }
}

void write_adam(BlobWriter& w, const std::string& prefix, const nn::AdamState& st) {
  for (const auto& [name, t] : st.m) w.add_tensor(prefix + "m." + name, t);
  for (const auto& [name, t] : st.v) w.add_tensor(prefix + "v." + name, t);
}

struct BlobReader {
  const json* directory;
  std::string payload;
  size_t offset = 0;
  std::map<std::string, nn::Tensor> blobs;

  void read_all() {
    for (const auto& entry : *directory) {
      std::string name = entry.at("name");
      std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
      long long n = 1;
      for (int d : shape) n *= d;
      if (offset + n * sizeof(double) > payload.size())
        fail(Errc::parse, "checkpoint: blob payload truncated at '" + name + "'");
      nn::Tensor t = nn::Tensor::zeros(shape);
      std::memcpy(t.data.data(), payload.data() + offset, n * sizeof(double));
      offset += n * sizeof(double);
      blobs[name] = std::move(t);
    }
    if (offset != payload.size()) fail(Errc::parse, "checkpoint: trailing blob bytes");
  }
};

// Collects blobs with the given prefix back into a ModelState.
ModelState read_model_state(const std::map<std::string, nn::Tensor>& blobs,
                            const std::string& prefix) {
  ModelState st;
  std::string bn_prefix = prefix + "bnstate.";
  for (const auto& [name, t] : blobs) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::string rest = name.substr(prefix.size());
    if (rest.rfind("bnstate.", 0) == 0) {
      std::string tail = rest.substr(8);
      bool is_mean = tail.size() > 5 && tail.compare(tail.size() - 5, 5, ".mean") == 0;
      bool is_var = tail.size() > 4 && tail.compare(tail.size() - 4, 4, ".var") == 0;
      std::string key = is_mean ? tail.substr(0, tail.size() - 5)
                                : tail.substr(0, tail.size() - 4);
      if (is_mean)
        st.bn_state[key].running_mean = t;
      else if (is_var)
        st.bn_state[key].running_var = t;
    } else if (rest.rfind("head.", 0) == 0) {
      st.head[rest] = t;
    } else if (rest.rfind("enc.", 0) == 0) {
      st.enc_params[rest] = t;
    } else if (rest.rfind("adam.", 0) == 0 || rest.rfind("pca.", 0) == 0 ||
               rest.rfind("stats.", 0) == 0) {
      // handled elsewhere
    }
  }
  return st;
}

void read_adam(const std::map<std::string, nn::Tensor>& blobs, const std::string& prefix,
               nn::AdamState& st) {
  for (const auto& [name, t] : blobs) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::string rest = name.substr(prefix.size());
    if (rest.rfind("m.", 0) == 0)
      st.m[rest.substr(2)] = t;
    else if (rest.rfind("v.", 0) == 0)
      st.v[rest.substr(2)] = t;
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const Model& m = ckpt.model;
  BlobWriter w;
  ModelState best{m.encoder.params, m.head, m.encoder.bn_state};
  write_model_state(w, "", best);
  if (m.encoder.pca) {
    const PcaModel& p = *m.encoder.pca;
    w.add_vec("pca.mean", p.mean);
    std::vector<double> comp;
    comp.reserve(static_cast<size_t>(p.k()) * p.dim());
    for (const auto& row : p.components) comp.insert(comp.end(), row.begin(), row.end());
    w.add("pca.components", {p.k(), p.dim()}, comp);
    w.add_vec("pca.explained_variance", p.explained_variance);
  }
  if (!m.encoder.feat_mean.empty()) {
    w.add_vec("stats.mean", m.encoder.feat_mean);
    w.add_vec("stats.std", m.encoder.feat_std);
  }
  if (ckpt.has_resume) {
    write_model_state(w, "resume.last.", ckpt.resume.last);
    write_model_state(w, "resume.best.", ckpt.resume.best);
    write_adam(w, "resume.adam_enc.", ckpt.resume.opt_enc);
    write_adam(w, "resume.adam_head.", ckpt.resume.opt_head);
  }

  json header;
  header["version"] = 1;
  header["task"] = ckpt.task;
  header["encoder"] = json::parse(encoder_config_to_json(m.encoder.cfg));
  RunConfig rc;
  rc.task = ckpt.task;
  rc.encoder = m.encoder.cfg;
  rc.train = ckpt.train_cfg;
  header["train"] = json::parse(run_config_to_json(rc))["train"];
  header["n_classes"] = m.n_classes;
  header["head_layers"] = m.head_layers;
  header["trunk_in"] = m.encoder.trunk_in;
  header["metrics"] = ckpt.metrics;
  if (m.encoder.pca) header["pca_var_target"] = m.encoder.pca->var_target;
  if (ckpt.has_resume) {
    header["resume"] = {{"completed_epochs", ckpt.resume.completed_epochs},
                        {"best_valid_acc", ckpt.resume.best_valid_acc},
                        {"best_epoch", ckpt.resume.best_epoch},
                        {"adam_enc_step", ckpt.resume.opt_enc.step},
                        {"adam_head_step", ckpt.resume.opt_head.step}};
  }
  header["params"] = std::move(w.directory);

  std::string head_str = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::io, "cannot write checkpoint '" + path + "'");
  os.write(kMagic, sizeof(kMagic));
  std::uint64_t len = head_str.size();
  os.write(reinterpret_cast<const char*>(&len), sizeof(len));
  os.write(head_str.data(), static_cast<std::streamsize>(head_str.size()));
  os.write(w.payload.data(), static_cast<std::streamsize>(w.payload.size()));
  if (!os) fail(Errc::io, "short write on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::io, "cannot read checkpoint '" + path + "'");
  char magic[5];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(Errc::parse, "'" + path + "' is not a checkpoint (bad magic)");
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string head_str(len, '\0');
  is.read(head_str.data(), static_cast<std::streamsize>(len));
  if (!is) fail(Errc::parse, "checkpoint header truncated");
  json header = json::parse(head_str, nullptr, false);
  if (header.is_discarded()) fail(Errc::parse, "checkpoint header is not valid JSON");
  if (header.value("version", 0) != 1) fail(Errc::parse, "unsupported checkpoint version");

  BlobReader reader;
  json directory = header.at("params");
  reader.directory = &directory;
  std::stringstream rest;
  rest << is.rdbuf();
  reader.payload = rest.str();
  reader.read_all();

  Checkpoint ckpt;
  ckpt.task = header.value("task", "shapes");
  EncoderConfig enc_cfg = encoder_config_from_json(header.at("encoder").dump());
  {
    RunConfig rc = parse_run_config(
        json{{"version", 1}, {"task", ckpt.task}, {"train", header.at("train")}}.dump());
    ckpt.train_cfg = rc.train;
  }

  Model& m = ckpt.model;
  m.encoder = make_encoder(enc_cfg);
  m.encoder.trunk_in = header.value("trunk_in", 0);
  m.n_classes = header.value("n_classes", 0);
  m.head_layers = header.value("head_layers", 1);
  m.relation_task = ckpt.task == "relations";

  ModelState best = read_model_state(reader.blobs, "");
  m.encoder.params = std::move(best.enc_params);
  m.head = std::move(best.head);
  m.encoder.bn_state.clear();
  for (auto& [k, v] : best.bn_state) m.encoder.bn_state[k] = std::move(v);
  // bn entries may be absent from the blob set before any training step
  if (enc_cfg.kind == EncoderKind::resnet1d) {
    if (!m.encoder.bn_state.count("enc.stem.bn")) m.encoder.bn_state["enc.stem.bn"] = {};
    for (int i = 0; i < enc_cfg.resnet_blocks; ++i) {
      std::string b = "enc.block" + std::to_string(i) + ".";
      if (!m.encoder.bn_state.count(b + "bn1")) m.encoder.bn_state[b + "bn1"] = {};
      if (!m.encoder.bn_state.count(b + "bn2")) m.encoder.bn_state[b + "bn2"] = {};
    }
  }

  if (reader.blobs.count("pca.mean")) {
    PcaModel p;
    p.var_target = header.value("pca_var_target", 1.0);
    p.mean = reader.blobs.at("pca.mean").data;
    const nn::Tensor& comp = reader.blobs.at("pca.components");
    int k = comp.shape[0], dim = comp.shape[1];
    for (int i = 0; i < k; ++i)
      p.components.emplace_back(comp.data.begin() + static_cast<size_t>(i) * dim,
                                comp.data.begin() + static_cast<size_t>(i + 1) * dim);
    p.explained_variance = reader.blobs.at("pca.explained_variance").data;
    m.encoder.pca = std::move(p);
  }
  if (reader.blobs.count("stats.mean")) {
    m.encoder.feat_mean = reader.blobs.at("stats.mean").data;
    m.encoder.feat_std = reader.blobs.at("stats.std").data;
  }

  if (header.contains("metrics"))
    for (auto it = header["metrics"].begin(); it != header["metrics"].end(); ++it)
      ckpt.metrics[it.key()] = it.value().get<double>();

  if (header.contains("resume")) {
    ckpt.has_resume = true;
    ckpt.resume.last = read_model_state(reader.blobs, "resume.last.");
    ckpt.resume.best = read_model_state(reader.blobs, "resume.best.");
    read_adam(reader.blobs, "resume.adam_enc.", ckpt.resume.opt_enc);
    read_adam(reader.blobs, "resume.adam_head.", ckpt.resume.opt_head);
    const json& r = header["resume"];
    ckpt.resume.completed_epochs = r.value("completed_epochs", 0);
    ckpt.resume.best_valid_acc = r.value("best_valid_acc", -1.0);
    ckpt.resume.best_epoch = r.value("best_epoch", -1);
    ckpt.resume.opt_enc.step = r.value("adam_enc_step", 0);
    ckpt.resume.opt_head.step = r.value("adam_head_step", 0);
  }
  return ckpt;
}

}  // namespace polyenc
