#include "polyenc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <nlohmann/json.hpp>

#include "polyenc/checkpoint.hpp"
#include "polyenc/dataset.hpp"
#include "polyenc/error.hpp"

namespace polyenc {

using nlohmann::json;

int cmd_gen(const GenOptions& opt) {
  if (opt.out.empty()) fail(Errc::config, "gen: --out is required");
  if (opt.task == "shapes") {
    auto samples = gen_shape_dataset(opt.n, opt.vertex_budget, opt.seed);
    save_shape_dataset_file(samples, opt.out);
  } else if (opt.task == "relations") {
    auto samples = gen_relation_dataset(opt.n, opt.sliver_fraction, opt.vertex_budget, opt.seed);
    save_relation_dataset_file(samples, opt.out);
  } else {
    fail(Errc::config, "gen: task must be 'shapes' or 'relations'");
  }
  return 0;
}

namespace {

void apply_overrides(const TrainOptions& opt, RunConfig& cfg) {
  if (opt.lr) cfg.train.lr = *opt.lr;
  if (opt.epochs) cfg.train.epochs = *opt.epochs;
  if (opt.batch_size) cfg.train.batch_size = *opt.batch_size;
  if (opt.seed) cfg.train.seed = *opt.seed;
  if (opt.d) cfg.encoder.d = *opt.d;
  if (opt.n_wx) cfg.encoder.n_wx = *opt.n_wx;
  if (opt.w_min) cfg.encoder.w_min = *opt.w_min;
  if (opt.w_max) cfg.encoder.w_max = *opt.w_max;
  if (opt.pca_var) cfg.encoder.pca_var = *opt.pca_var;
  if (opt.dropout) cfg.encoder.dropout = *opt.dropout;
  if (opt.resnet_blocks) cfg.encoder.resnet_blocks = *opt.resnet_blocks;
  if (opt.t) cfg.encoder.t = *opt.t;
}

template <typename Sample>
void split_valid(const std::vector<Sample>& all, std::vector<Sample>& train,
                 std::vector<Sample>& valid) {
  for (size_t i = 0; i < all.size(); ++i) {
    if (i % 10 == 9)
      valid.push_back(all[i]);
    else
      train.push_back(all[i]);
  }
}

void write_history(const std::vector<EpochStats>& history, const std::string& path) {
  json arr = json::array();
  for (const auto& e : history)
    arr.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"train_acc", e.train_acc},
                   {"valid_acc", e.valid_acc}});
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::io, "cannot write history '" + path + "'");
  os << arr.dump(2) << '\n';
}

}  // namespace

int cmd_train(const TrainOptions& opt) {
  if (opt.config_path.empty()) fail(Errc::config, "train: --config is required");
  if (opt.data_path.empty()) fail(Errc::config, "train: --data is required");
  if (opt.out_path.empty()) fail(Errc::config, "train: --out is required");
  RunConfig cfg = load_run_config_file(opt.config_path);
  apply_overrides(opt, cfg);

  const ResumeState* resume = nullptr;
  Checkpoint prior;
  if (!opt.resume_path.empty()) {
    prior = load_checkpoint(opt.resume_path);
    if (!prior.has_resume) fail(Errc::config, "resume: checkpoint has no optimizer state");
    if (prior.task != cfg.task) fail(Errc::config, "resume: task mismatch with config");
    resume = &prior.resume;
  }

  TrainResult result;
  if (cfg.task == "shapes") {
    auto all = load_shape_dataset_file(opt.data_path);
    std::vector<ShapeSample> train, valid;
    if (opt.valid_path.empty()) {
      split_valid(all, train, valid);
    } else {
      train = std::move(all);
      valid = load_shape_dataset_file(opt.valid_path);
    }
    result = train_shapes(train, valid, cfg.encoder, cfg.train, resume);
  } else {
    auto all = load_relation_dataset_file(opt.data_path);
    std::vector<RelationSample> train, valid;
    if (opt.valid_path.empty()) {
      split_valid(all, train, valid);
    } else {
      train = std::move(all);
      valid = load_relation_dataset_file(opt.valid_path);
    }
    result = train_relations(train, valid, cfg.encoder, cfg.train, resume);
  }

  Checkpoint ckpt;
  ckpt.task = cfg.task;
  ckpt.train_cfg = cfg.train;
  ckpt.model = std::move(result.model);
  ckpt.metrics["best_valid_acc"] = result.best_valid_acc;
  ckpt.metrics["best_epoch"] = result.best_epoch;
  ckpt.metrics["completed_epochs"] = result.resume.completed_epochs;
  ckpt.has_resume = true;
  ckpt.resume = std::move(result.resume);
  save_checkpoint(ckpt, opt.out_path);
  write_history(result.history, opt.out_path + ".history.json");
  return 0;
}

int cmd_eval(const EvalOptions& opt) {
  Checkpoint ckpt = load_checkpoint(opt.checkpoint_path);
  DatasetKind kind = sniff_dataset_kind(opt.data_path);
  EvalReport report;
  if (ckpt.task == "shapes") {
    if (kind != DatasetKind::shapes)
      fail(Errc::config, "eval: shapes checkpoint given a relation dataset");
    auto samples = load_shape_dataset_file(opt.data_path);
    report = evaluate_shapes(samples, ckpt.model);
  } else {
    if (kind != DatasetKind::relations)
      fail(Errc::config, "eval: relations checkpoint given a shape dataset");
    auto samples = load_relation_dataset_file(opt.data_path);
    report = evaluate_relations(samples, ckpt.model);
  }
  std::string text = eval_report_to_json(report);
  if (opt.report_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream os(opt.report_path, std::ios::binary);
    if (!os) fail(Errc::io, "cannot write report '" + opt.report_path + "'");
    os << text << '\n';
  }
  if (!opt.confusion_path.empty()) {
    std::ofstream os(opt.confusion_path, std::ios::binary);
    if (!os) fail(Errc::io, "cannot write confusion '" + opt.confusion_path + "'");
    confusion_to_csv(report, os);
  }
  return 0;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct PropResult {
  std::string name;
  bool required = false;
  bool pass = true;
  double deviation = 0.0;  // max for invariances, min for Topo
  double tolerance = 0.0;
  std::string note;
};

}  // namespace

int cmd_propcheck(const PropcheckOptions& opt) {
  EncoderConfig enc_cfg;
  Model model;
  if (!opt.checkpoint_path.empty()) {
    Checkpoint ckpt = load_checkpoint(opt.checkpoint_path);
    model = std::move(ckpt.model);
    enc_cfg = model.encoder.cfg;
  } else if (!opt.config_path.empty()) {
    RunConfig cfg = load_run_config_file(opt.config_path);
    enc_cfg = cfg.encoder;
    auto corpus_samples = gen_shape_dataset(4, opt.vertex_budget, opt.seed ^ 0xF17);
    std::vector<PolyGeom> corpus;
    for (auto& s : corpus_samples) corpus.push_back(s.geom);
    model = make_untrained_model(enc_cfg, kNumShapeClasses, false, opt.seed, corpus);
  } else {
    fail(Errc::config, "propcheck: need --config or --checkpoint");
  }

  auto samples = gen_shape_dataset(opt.n_per_class, opt.vertex_budget, opt.seed);
  Rng rng(opt.seed ^ 0x9);

  const bool spectral = enc_cfg.is_spectral();
  const bool resnet = enc_cfg.kind == EncoderKind::resnet1d;

  PropResult loop{"Loop", true, true, 0.0, 1e-6, ""};
  PropResult triv{"TriV", spectral, true, 0.0, 1e-6, ""};
  PropResult parp{"ParP", spectral, true, 0.0, 1e-6, ""};
  PropResult topo{"Topo", spectral, true, std::numeric_limits<double>::infinity(), 1e-4, ""};
  if (resnet) loop.note = "even shifts on simple polygons";
  if (enc_cfg.kind == EncoderKind::veercnn) {
    loop.note = "expected loop-variant: searches for deviation > 1e-3";
    loop.tolerance = 1e-3;
  }

  for (const auto& s : samples) {
    const PolyGeom& g = s.geom;
    bool simple = g.parts.size() == 1 && g.parts[0].holes.empty();
    std::vector<double> base = encode_geometry(model.encoder, g);

    // Loop
    if (enc_cfg.kind == EncoderKind::veercnn) {
      if (simple) {
        int n = g.parts[0].exterior.size();
        for (int sft = 1; sft < n && loop.deviation <= loop.tolerance; sft += std::max(1, n / 16)) {
          double d = euclid(base, encode_geometry(model.encoder, loop_shift(g, 0, 0, sft)));
          loop.deviation = std::max(loop.deviation, d);
        }
      }
    } else if (resnet) {
      if (simple) {
        int n = g.parts[0].exterior.size();
        int sft = 2 * rng.uniform_int(1, std::max(1, n / 2 - 1));
        double d = euclid(base, encode_geometry(model.encoder, loop_shift(g, 0, 0, sft)));
        loop.deviation = std::max(loop.deviation, d);
      }
    } else {
      int part = rng.uniform_int(0, static_cast<int>(g.parts.size()) - 1);
      int nring = 1 + static_cast<int>(g.parts[part].holes.size());
      int ring = rng.uniform_int(0, nring - 1);
      int len = ring == 0 ? g.parts[part].exterior.size() : g.parts[part].holes[ring - 1].size();
      int sft = rng.uniform_int(1, len - 1);
      double d = euclid(base, encode_geometry(model.encoder, loop_shift(g, part, ring, sft)));
      loop.deviation = std::max(loop.deviation, d);
    }

    if (spectral) {
      // TriV
      Rng triv_rng = rng.fork(101 + static_cast<std::uint64_t>(&s - samples.data()));
      PolyGeom up = insert_trivial_vertices(g, g.vertex_count() / 2, triv_rng);
      triv.deviation = std::max(triv.deviation, euclid(base, encode_geometry(model.encoder, up)));
      // ParP
      if (g.parts.size() > 1) {
        std::vector<int> perm(g.parts.size());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(perm.size() - 1 - i);
        parp.deviation =
            std::max(parp.deviation, euclid(base, encode_geometry(model.encoder, permute_parts(g, perm))));
      }
      // Topo, only for geometries with enough hole area
      double hole_area = 0.0, ext_area = 0.0;
      for (const auto& part : g.parts) {
        ext_area += ring_signed_area(part.exterior);
        for (const auto& h : part.holes) hole_area += -ring_signed_area(h);
      }
      if (hole_area >= 0.05 * ext_area && hole_area > 0.0) {
        double d = euclid(base, encode_geometry(model.encoder, holes_to_parts(g)));
        topo.deviation = std::min(topo.deviation, d);
      }
    }
  }

  if (enc_cfg.kind == EncoderKind::veercnn)
    loop.pass = loop.deviation > loop.tolerance;  // variance must be found
  else
    loop.pass = loop.deviation <= loop.tolerance;
  triv.pass = !spectral || triv.deviation <= triv.tolerance;
  parp.pass = !spectral || parp.deviation <= parp.tolerance;
  topo.pass = !spectral || (std::isfinite(topo.deviation) && topo.deviation >= topo.tolerance);

  json out = json::array();
  bool all_ok = true;
  for (const PropResult* p : {&loop, &triv, &parp, &topo}) {
    bool relevant = p->required || p->deviation != 0.0;
    std::cout << p->name << ": " << (p->pass ? "pass" : "FAIL")
              << "  deviation=" << p->deviation << "  tolerance=" << p->tolerance
              << (p->required ? "" : "  (informational)")
              << (p->note.empty() ? "" : "  [" + p->note + "]") << '\n';
    (void)relevant;
    if (p->required && !p->pass) all_ok = false;
    out.push_back({{"property", p->name},
                   {"pass", p->pass},
                   {"required", p->required},
                   {"deviation", p->deviation},
                   {"tolerance", p->tolerance},
                   {"note", p->note}});
  }
  if (!opt.report_path.empty()) {
    std::ofstream os(opt.report_path, std::ios::binary);
    if (!os) fail(Errc::io, "cannot write report '" + opt.report_path + "'");
    os << out.dump(2) << '\n';
  }
  return all_ok ? 0 : 1;
}

int cmd_encode(const EncodeOptions& opt) {
  Checkpoint ckpt = load_checkpoint(opt.checkpoint_path);
  std::ofstream os(opt.out_path, std::ios::binary);
  if (!os) fail(Errc::io, "cannot write embeddings '" + opt.out_path + "'");
  DatasetKind kind = sniff_dataset_kind(opt.data_path);
  if (ckpt.task == "shapes") {
    if (kind != DatasetKind::shapes) fail(Errc::config, "encode: dataset/checkpoint mismatch");
    for (const auto& s : load_shape_dataset_file(opt.data_path)) {
      std::vector<double> emb = encode_geometry(ckpt.model.encoder, s.geom);
      os << json{{"id", s.id}, {"embedding", emb}}.dump() << '\n';
    }
  } else {
    if (kind != DatasetKind::relations) fail(Errc::config, "encode: dataset/checkpoint mismatch");
    for (const auto& s : load_relation_dataset_file(opt.data_path)) {
      auto [es, eo] = encode_pair(ckpt.model.encoder, s.subject, s.object);
      es.insert(es.end(), eo.begin(), eo.end());
      os << json{{"id", s.id}, {"embedding", es}}.dump() << '\n';
    }
  }
  return 0;
}

}  // namespace polyenc
