#include "polyenc/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polyenc/error.hpp"

namespace polyenc {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string head_key(int i, const char* leaf) {
  return "head.l" + std::to_string(i) + "." + leaf;
}

nn::ParamMap init_head(int in_dim, int n_classes, int layers, int hidden, Rng& rng) {
  nn::ParamMap head;
  int in = in_dim;
  for (int i = 0; i < layers; ++i) {
    int out = (i + 1 == layers) ? n_classes : hidden;
    head[head_key(i, "W")] = nn::glorot_uniform({in, out}, in, out, rng);
    head[head_key(i, "b")] = nn::Tensor::zeros({out});
    in = out;
  }
  return head;
}

struct HeadCache {
  std::vector<nn::Tensor> in;
  std::vector<nn::Tensor> pre;
};

nn::Tensor head_forward(const nn::ParamMap& head, int layers, const nn::Tensor& x,
                        HeadCache* cache) {
  nn::Tensor h = x;
  for (int i = 0; i < layers; ++i) {
    if (cache) cache->in.push_back(h);
    h = nn::dense(h, head.at(head_key(i, "W")), head.at(head_key(i, "b")));
    if (i + 1 < layers) {
      if (cache) cache->pre.push_back(h);
      h = nn::relu(h);
    }
  }
  return h;
}

// returns d(loss)/d(embedding input)
nn::Tensor head_backward(const nn::ParamMap& head, int layers, const HeadCache& cache,
                         const nn::Tensor& dlogits, nn::ParamMap& grads) {
  nn::Tensor dh = dlogits;
  for (int i = layers - 1; i >= 0; --i) {
    if (i + 1 < layers) dh = nn::relu_backward(cache.pre[i], dh);
    nn::DenseGrads g = nn::dense_backward(cache.in[i], head.at(head_key(i, "W")), dh);
    grads[head_key(i, "W")] = std::move(g.dW);
    grads[head_key(i, "b")] = std::move(g.db);
    dh = std::move(g.dx);
  }
  return dh;
}

// Per-sample model input: dense vector for spectral encoders, [C0,L] tensor
// for convolutional ones.
struct SampleInput {
  std::vector<double> dense;
  nn::Tensor seq;
};

SampleInput featurize_single(const Encoder& enc, const PolyGeom& normalized) {
  SampleInput si;
  if (enc.cfg.is_mlp_trunk())
    si.dense = model_features(enc, normalized);
  else
    si.seq = conv_features(enc.cfg, normalized);
  return si;
}

nn::Tensor stack_dense(const std::vector<const SampleInput*>& rows) {
  int b = static_cast<int>(rows.size());
  int f = static_cast<int>(rows[0]->dense.size());
  nn::Tensor x = nn::Tensor::zeros({b, f});
  for (int i = 0; i < b; ++i) {
    if (static_cast<int>(rows[i]->dense.size()) != f)
      fail(Errc::internal, "stack_dense: ragged feature widths");
    std::copy(rows[i]->dense.begin(), rows[i]->dense.end(), x.data.begin() + static_cast<size_t>(i) * f);
  }
  return x;
}

nn::Tensor stack_seq(const std::vector<const SampleInput*>& rows) {
  int b = static_cast<int>(rows.size());
  int c = rows[0]->seq.shape[0];
  int l = rows[0]->seq.shape[1];
  nn::Tensor x = nn::Tensor::zeros({b, c, l});
  for (int i = 0; i < b; ++i) {
    if (rows[i]->seq.shape != std::vector<int>{c, l})
      fail(Errc::internal, "stack_seq: mixed sequence shapes in one batch");
    std::copy(rows[i]->seq.data.begin(), rows[i]->seq.data.end(),
              x.data.begin() + static_cast<size_t>(i) * c * l);
  }
  return x;
}

nn::Tensor stack_inputs(const Encoder& enc, const std::vector<const SampleInput*>& rows) {
  return enc.cfg.is_mlp_trunk() ? stack_dense(rows) : stack_seq(rows);
}

// Fits batch statistics and PCA on the training features (spectral kinds)
// and initializes the trunk parameters.
void fit_and_init(Encoder& enc, std::vector<std::vector<double>>& raw_train_features,
                  std::uint64_t seed) {
  if (enc.cfg.is_mlp_trunk()) {
    if (raw_train_features.empty()) fail(Errc::domain, "train: empty dataset");
    size_t dim = raw_train_features[0].size();
    if (enc.cfg.norm_mode == SpectrumNorm::batch_stats) {
      enc.feat_mean.assign(dim, 0.0);
      enc.feat_std.assign(dim, 0.0);
      for (const auto& f : raw_train_features)
        for (size_t j = 0; j < dim; ++j) enc.feat_mean[j] += f[j];
      for (double& v : enc.feat_mean) v /= raw_train_features.size();
      for (const auto& f : raw_train_features)
        for (size_t j = 0; j < dim; ++j) {
          double d = f[j] - enc.feat_mean[j];
          enc.feat_std[j] += d * d;
        }
      for (double& v : enc.feat_std)
        v = std::max(1e-8, std::sqrt(v / raw_train_features.size()));
      for (auto& f : raw_train_features)
        for (size_t j = 0; j < dim; ++j) f[j] = (f[j] - enc.feat_mean[j]) / enc.feat_std[j];
    }
    if (enc.cfg.pca_var > 0.0) {
      enc.pca = pca_fit(raw_train_features, enc.cfg.pca_var);
      for (auto& f : raw_train_features) f = pca_project(*enc.pca, f);
    }
    init_trunk_params(enc, static_cast<int>(raw_train_features[0].size()), seed);
  }
}

int argmax_row(const nn::Tensor& t, int row) {
  int k = t.shape[1];
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (t.at2(row, j) > t.at2(row, best)) best = j;
  return best;
}

ModelState take_snapshot(const Model& m) {
  return {m.encoder.params, m.head, m.encoder.bn_state};
}

void restore_snapshot(Model& m, const ModelState& s) {
  m.encoder.params = s.enc_params;
  m.head = s.head;
  m.encoder.bn_state = s.bn_state;
}

void step_optimizers(const TrainConfig& cfg, Model& model, const nn::ParamMap& enc_grads,
                     const nn::ParamMap& head_grads, nn::AdamState& opt_enc,
                     nn::AdamState& opt_head) {
  if (cfg.optimizer == TrainConfig::Opt::adam) {
    nn::adam_step(model.encoder.params, enc_grads, opt_enc, cfg.lr);
    nn::adam_step(model.head, head_grads, opt_head, cfg.lr);
  } else {
    nn::sgd_step(model.encoder.params, enc_grads, cfg.lr);
    nn::sgd_step(model.head, head_grads, cfg.lr);
  }
}

void merge_grads(nn::ParamMap& into, nn::ParamMap&& other) {
  for (auto& [k, v] : other) {
    auto it = into.find(k);
    if (it == into.end()) {
      into[k] = std::move(v);
    } else {
      for (size_t i = 0; i < v.data.size(); ++i) it->second.data[i] += v.data[i];
    }
  }
}

std::vector<int> epoch_order(int n, std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng(seed).fork(0xE70C ^ static_cast<std::uint64_t>(epoch)).next());
  for (int i = n - 1; i > 0; --i) {
    int j = rng.uniform_int(0, i);
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace

std::vector<double> shape_classify(Model& model, const PolyGeom& g) {
  PolyGeom normalized = normalize_single(model.encoder.cfg, g);
  SampleInput si = featurize_single(model.encoder, normalized);
  nn::Tensor x = stack_inputs(model.encoder, {&si});
  Rng rng(0);
  nn::Tensor emb = trunk_forward(model.encoder, x, false, rng, nullptr);
  nn::Tensor logits = head_forward(model.head, model.head_layers, emb, nullptr);
  std::vector<int> dummy_label(1, 0);
  return nn::softmax_cross_entropy(logits, dummy_label).probs.data;
}

std::vector<double> relation_predict(Model& model, const PolyGeom& g_sub,
                                     const PolyGeom& g_obj) {
  auto [nsub, nobj] = normalize_pair(model.encoder.cfg, g_sub, g_obj);
  SampleInput fs = featurize_single(model.encoder, nsub);
  SampleInput fo = featurize_single(model.encoder, nobj);
  Rng rng(0);
  nn::Tensor emb_s = trunk_forward(model.encoder, stack_inputs(model.encoder, {&fs}), false,
                                   rng, nullptr);
  nn::Tensor emb_o = trunk_forward(model.encoder, stack_inputs(model.encoder, {&fo}), false,
                                   rng, nullptr);
  int d = emb_s.shape[1];
  nn::Tensor cat = nn::Tensor::zeros({1, 2 * d});
  std::copy(emb_s.data.begin(), emb_s.data.end(), cat.data.begin());
  std::copy(emb_o.data.begin(), emb_o.data.end(), cat.data.begin() + d);
  nn::Tensor logits = head_forward(model.head, model.head_layers, cat, nullptr);
  std::vector<int> dummy_label(1, 0);
  return nn::softmax_cross_entropy(logits, dummy_label).probs.data;
}

RelationLabel deterministic_relation(const PolyGeom& g_sub, const PolyGeom& g_obj) {
  // containment: every subject vertex inside plus no proper boundary crossing
  bool contained = true;
  for (const auto& part : g_sub.parts) {
    auto check = [&](const Ring& r) {
      for (const auto& p : r.pts)
        if (!point_in_polygon(p, g_obj)) {
          contained = false;
          return;
        }
    };
    check(part.exterior);
    if (!contained) break;
    for (const auto& h : part.holes) {
      check(h);
      if (!contained) break;
    }
  }
  if (contained) {
    // strict segment crossing test between the two boundaries
    auto orient = [](Point2 p, Point2 q, Point2 r) { return cross(q - p, r - p); };
    auto crossing = [&](const Ring& a, const Ring& b) {
      int na = a.size(), nb = b.size();
      for (int i = 0; i < na; ++i) {
        Point2 p1 = a.pts[i], p2 = a.pts[(i + 1) % na];
        for (int j = 0; j < nb; ++j) {
          Point2 q1 = b.pts[j], q2 = b.pts[(j + 1) % nb];
          double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
          double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
          if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) &&
              ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
            return true;
        }
      }
      return false;
    };
    bool crossed = false;
    for (const auto& sp : g_sub.parts) {
      for (const auto& op : g_obj.parts) {
        if (crossing(sp.exterior, op.exterior)) crossed = true;
        for (const auto& oh : op.holes)
          if (crossing(sp.exterior, oh)) crossed = true;
      }
    }
    if (!crossed) return RelationLabel::isPartOf;
  }

  Point2 sc = centroid(g_sub);
  Point2 oc = centroid(g_obj);
  Point2 d = sc - oc;
  auto bb = bounding_box(g_obj);
  double scale = std::max(1.0, norm(bb[1] - bb[0]));
  if (norm(d) < 1e-12 * scale)
    fail(Errc::domain, "deterministic_relation: coincident centroids, unclassifiable");

  double angle = std::atan2(d.y, d.x) * 180.0 / kPi;  // east = 0, north = 90
  if (angle < 0) angle += 360.0;
  int sector = static_cast<int>(std::floor(std::fmod(angle + 22.5, 360.0) / 45.0));
  static const RelationLabel by_sector[8] = {
      RelationLabel::east,      RelationLabel::northeast, RelationLabel::north,
      RelationLabel::northwest, RelationLabel::west,      RelationLabel::southwest,
      RelationLabel::south,     RelationLabel::southeast};
  return by_sector[sector];
}

namespace {

// Shared mini-batch loop over pre-featurized inputs. For relations every
// sample has two inputs and the embeddings are concatenated.
struct PreparedData {
  std::vector<SampleInput> first;   // shapes: the sample; relations: subject
  std::vector<SampleInput> second;  // relations: object
  std::vector<int> labels;
  bool paired = false;
};

double eval_accuracy(Model& model, const PreparedData& data) {
  int n = static_cast<int>(data.labels.size());
  if (n == 0) return 0.0;
  int correct = 0;
  Rng rng(0);
  const int chunk = 64;
  for (int start = 0; start < n; start += chunk) {
    int end = std::min(n, start + chunk);
    // conv inputs may differ in length between samples; group by shape
    std::vector<int> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return data.first[a].seq.shape < data.first[b].seq.shape;
    });
    size_t i = 0;
    while (i < idx.size()) {
      size_t j = i;
      while (j < idx.size() && data.first[idx[j]].seq.shape == data.first[idx[i]].seq.shape &&
             (!data.paired || data.second[idx[j]].seq.shape == data.second[idx[i]].seq.shape))
        ++j;
      std::vector<const SampleInput*> rows, rows2;
      std::vector<int> labels;
      for (size_t k = i; k < j; ++k) {
        rows.push_back(&data.first[idx[k]]);
        if (data.paired) rows2.push_back(&data.second[idx[k]]);
        labels.push_back(data.labels[idx[k]]);
      }
      nn::Tensor emb = trunk_forward(model.encoder, stack_inputs(model.encoder, rows), false,
                                     rng, nullptr);
      nn::Tensor in;
      if (data.paired) {
        nn::Tensor emb2 = trunk_forward(model.encoder, stack_inputs(model.encoder, rows2),
                                        false, rng, nullptr);
        int b = emb.shape[0], d = emb.shape[1];
        in = nn::Tensor::zeros({b, 2 * d});
        for (int r = 0; r < b; ++r) {
          std::copy(emb.data.begin() + static_cast<size_t>(r) * d,
                    emb.data.begin() + static_cast<size_t>(r + 1) * d,
                    in.data.begin() + static_cast<size_t>(r) * 2 * d);
          std::copy(emb2.data.begin() + static_cast<size_t>(r) * d,
                    emb2.data.begin() + static_cast<size_t>(r + 1) * d,
                    in.data.begin() + static_cast<size_t>(r) * 2 * d + d);
        }
      } else {
        in = emb;
      }
      nn::Tensor logits = head_forward(model.head, model.head_layers, in, nullptr);
      for (int r = 0; r < logits.shape[0]; ++r)
        if (argmax_row(logits, r) == labels[r]) ++correct;
      i = j;
    }
  }
  return static_cast<double>(correct) / n;
}

TrainResult run_training(PreparedData train, PreparedData valid, Encoder enc,
                         const TrainConfig& cfg, int n_classes, bool relation_task,
                         const ResumeState* resume) {
  Model model;
  model.encoder = std::move(enc);
  model.n_classes = n_classes;
  model.head_layers = cfg.head_layers;
  model.relation_task = relation_task;
  Rng head_rng(Rng(cfg.seed).fork(0x4EAD).next());
  int head_in = relation_task ? 2 * model.encoder.cfg.d : model.encoder.cfg.d;
  model.head = init_head(head_in, n_classes, cfg.head_layers, cfg.head_hidden, head_rng);

  nn::AdamState opt_enc, opt_head;
  ModelState best = take_snapshot(model);
  double best_acc = -1.0;
  int best_epoch = -1;
  int start_epoch = 1;
  if (resume) {
    restore_snapshot(model, resume->last);
    best = resume->best;
    best_acc = resume->best_valid_acc;
    best_epoch = resume->best_epoch;
    opt_enc = resume->opt_enc;
    opt_head = resume->opt_head;
    start_epoch = resume->completed_epochs + 1;
  }
  TrainResult result;

  int n = static_cast<int>(train.labels.size());
  for (int epoch = start_epoch; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order = epoch_order(n, cfg.seed, epoch);
    double loss_sum = 0.0;
    int seen = 0, correct = 0, batch_index = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      int end = std::min(n, start + cfg.batch_size);
      if (end - start < 2 && !model.encoder.cfg.is_mlp_trunk() && end - start < n)
        continue;  // batch norm needs at least 2 samples in train mode
      std::vector<const SampleInput*> rows, rows2;
      std::vector<int> labels;
      for (int i = start; i < end; ++i) {
        rows.push_back(&train.first[order[i]]);
        if (train.paired) rows2.push_back(&train.second[order[i]]);
        labels.push_back(train.labels[order[i]]);
      }
      Rng drop_rng(Rng(cfg.seed)
                       .fork(0xD0ull * 1000003 + static_cast<std::uint64_t>(epoch) * 65537 +
                             batch_index)
                       .next());
      TrunkCache cache1, cache2;
      nn::Tensor emb = trunk_forward(model.encoder, stack_inputs(model.encoder, rows), true,
                                     drop_rng, &cache1);
      nn::Tensor head_in_t;
      int b = emb.shape[0], d = emb.shape[1];
      if (train.paired) {
        nn::Tensor emb2 = trunk_forward(model.encoder, stack_inputs(model.encoder, rows2), true,
                                        drop_rng, &cache2);
        head_in_t = nn::Tensor::zeros({b, 2 * d});
        for (int r = 0; r < b; ++r) {
          std::copy(emb.data.begin() + static_cast<size_t>(r) * d,
                    emb.data.begin() + static_cast<size_t>(r + 1) * d,
                    head_in_t.data.begin() + static_cast<size_t>(r) * 2 * d);
          std::copy(emb2.data.begin() + static_cast<size_t>(r) * d,
                    emb2.data.begin() + static_cast<size_t>(r + 1) * d,
                    head_in_t.data.begin() + static_cast<size_t>(r) * 2 * d + d);
        }
      } else {
        head_in_t = emb;
      }
      HeadCache hcache;
      nn::Tensor logits = head_forward(model.head, model.head_layers, head_in_t, &hcache);
      nn::SoftmaxLoss sl = nn::softmax_cross_entropy(logits, labels);
      if (!std::isfinite(sl.loss))
        fail(Errc::internal, "train: loss is not finite at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_index));
      loss_sum += sl.loss * labels.size();
      seen += static_cast<int>(labels.size());
      for (int r = 0; r < logits.shape[0]; ++r)
        if (argmax_row(logits, r) == labels[r]) ++correct;

      nn::ParamMap head_grads;
      nn::Tensor dhead_in = head_backward(model.head, model.head_layers, hcache, sl.grad,
                                          head_grads);
      nn::ParamMap enc_grads;
      if (train.paired) {
        nn::Tensor demb1 = nn::Tensor::zeros({b, d});
        nn::Tensor demb2 = nn::Tensor::zeros({b, d});
        for (int r = 0; r < b; ++r)
          for (int c = 0; c < d; ++c) {
            demb1.at2(r, c) = dhead_in.at2(r, c);
            demb2.at2(r, c) = dhead_in.at2(r, c + d);
          }
        enc_grads = trunk_backward(model.encoder, cache1, demb1);
        merge_grads(enc_grads, trunk_backward(model.encoder, cache2, demb2));
      } else {
        enc_grads = trunk_backward(model.encoder, cache1, dhead_in);
      }
      step_optimizers(cfg, model, enc_grads, head_grads, opt_enc, opt_head);
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_loss = seen ? loss_sum / seen : 0.0;
    st.train_acc = seen ? static_cast<double>(correct) / seen : 0.0;
    st.valid_acc = eval_accuracy(model, valid);
    result.history.push_back(st);
    if (st.valid_acc > best_acc) {
      best_acc = st.valid_acc;
      best_epoch = epoch;
      best = take_snapshot(model);
    }
  }

  result.resume.last = take_snapshot(model);
  result.resume.best = best;
  result.resume.opt_enc = std::move(opt_enc);
  result.resume.opt_head = std::move(opt_head);
  result.resume.completed_epochs = cfg.epochs;
  result.resume.best_valid_acc = best_acc;
  result.resume.best_epoch = best_epoch;

  restore_snapshot(model, best);
  result.model = std::move(model);
  result.best_valid_acc = best_acc;
  result.best_epoch = best_epoch;
  return result;
}

PreparedData prepare_shapes(const std::vector<ShapeSample>& samples, Encoder& enc,
                            bool fitting, std::uint64_t seed) {
  PreparedData data;
  data.paired = false;
  for (const auto& s : samples) data.labels.push_back(s.label);
  if (enc.cfg.is_mlp_trunk()) {
    std::vector<std::vector<double>> feats;
    feats.reserve(samples.size());
    for (const auto& s : samples)
      feats.push_back(raw_spectral_features(enc, normalize_single(enc.cfg, s.geom)));
    if (fitting) {
      fit_and_init(enc, feats, seed);
      for (auto& f : feats) {
        SampleInput si;
        si.dense = std::move(f);
        data.first.push_back(std::move(si));
      }
    } else {
      for (const auto& s : samples)
        data.first.push_back(featurize_single(enc, normalize_single(enc.cfg, s.geom)));
    }
  } else {
    for (const auto& s : samples)
      data.first.push_back(featurize_single(enc, normalize_single(enc.cfg, s.geom)));
    if (fitting) init_trunk_params(enc, data.first[0].seq.shape[0], seed);
  }
  return data;
}

PreparedData prepare_relations(const std::vector<RelationSample>& samples, Encoder& enc,
                               bool fitting, std::uint64_t seed) {
  PreparedData data;
  data.paired = true;
  for (const auto& s : samples) data.labels.push_back(static_cast<int>(s.relation));

  std::vector<std::pair<PolyGeom, PolyGeom>> normalized;
  normalized.reserve(samples.size());
  for (const auto& s : samples) normalized.push_back(normalize_pair(enc.cfg, s.subject, s.object));

  if (enc.cfg.is_mlp_trunk() && fitting) {
    std::vector<std::vector<double>> feats;
    feats.reserve(2 * samples.size());
    for (const auto& [nsub, nobj] : normalized) {
      feats.push_back(raw_spectral_features(enc, nsub));
      feats.push_back(raw_spectral_features(enc, nobj));
    }
    fit_and_init(enc, feats, seed);
    for (size_t i = 0; i < samples.size(); ++i) {
      SampleInput a, b;
      a.dense = std::move(feats[2 * i]);
      b.dense = std::move(feats[2 * i + 1]);
      data.first.push_back(std::move(a));
      data.second.push_back(std::move(b));
    }
    return data;
  }
  for (const auto& [nsub, nobj] : normalized) {
    data.first.push_back(featurize_single(enc, nsub));
    data.second.push_back(featurize_single(enc, nobj));
  }
  if (!enc.cfg.is_mlp_trunk() && fitting)
    init_trunk_params(enc, data.first[0].seq.shape[0], seed);
  return data;
}

}  // namespace

TrainResult train_shapes(const std::vector<ShapeSample>& train,
                         const std::vector<ShapeSample>& valid, const EncoderConfig& enc_cfg,
                         const TrainConfig& train_cfg, const ResumeState* resume) {
  if (train.empty()) fail(Errc::domain, "train_shapes: empty training set");
  Encoder enc = make_encoder(enc_cfg);
  PreparedData td = prepare_shapes(train, enc, true, train_cfg.seed);
  PreparedData vd = prepare_shapes(valid, enc, false, train_cfg.seed);
  int n_classes = 0;
  for (int l : td.labels) n_classes = std::max(n_classes, l + 1);
  for (int l : vd.labels) n_classes = std::max(n_classes, l + 1);
  return run_training(std::move(td), std::move(vd), std::move(enc), train_cfg, n_classes,
                      false, resume);
}

TrainResult train_relations(const std::vector<RelationSample>& train,
                            const std::vector<RelationSample>& valid,
                            const EncoderConfig& enc_cfg, const TrainConfig& train_cfg,
                            const ResumeState* resume) {
  if (train.empty()) fail(Errc::domain, "train_relations: empty training set");
  Encoder enc = make_encoder(enc_cfg);
  PreparedData td = prepare_relations(train, enc, true, train_cfg.seed);
  PreparedData vd = prepare_relations(valid, enc, false, train_cfg.seed);
  return run_training(std::move(td), std::move(vd), std::move(enc), train_cfg, kNumRelations,
                      true, resume);
}

Model make_untrained_model(const EncoderConfig& enc_cfg, int n_classes, bool relation_task,
                           std::uint64_t seed, const std::vector<PolyGeom>& fit_corpus) {
  Encoder enc = make_encoder(enc_cfg);
  if (enc.cfg.is_mlp_trunk()) {
    std::vector<std::vector<double>> feats;
    if (!fit_corpus.empty() &&
        (enc.cfg.pca_var > 0.0 || enc.cfg.norm_mode == SpectrumNorm::batch_stats)) {
      for (const auto& g : fit_corpus)
        feats.push_back(raw_spectral_features(enc, normalize_single(enc.cfg, g)));
      fit_and_init(enc, feats, seed);
    } else {
      int base = enc.cfg.kind == EncoderKind::ddsl_mlp
                     ? enc.cfg.effective_raster_side() * enc.cfg.effective_raster_side()
                     : 2 * enc.map->size();
      init_trunk_params(enc, base, seed);
    }
  } else {
    int c0 = enc.cfg.kind == EncoderKind::resnet1d ? 4 * enc.cfg.t + 2 : 2;
    init_trunk_params(enc, c0, seed);
  }
  Model model;
  model.encoder = std::move(enc);
  model.n_classes = n_classes;
  model.head_layers = 1;
  model.relation_task = relation_task;
  Rng head_rng(Rng(seed).fork(0x4EAD).next());
  int head_in = relation_task ? 2 * model.encoder.cfg.d : model.encoder.cfg.d;
  model.head = init_head(head_in, n_classes, 1, 64, head_rng);
  return model;
}

namespace {

void tally(EvalReport& rep, int true_label, int predicted, const std::string& class_name,
           const std::string& sub_bin, const std::string& ratio_bin) {
  rep.total += 1;
  bool ok = predicted == true_label;
  if (ok) rep.correct += 1;
  auto& pc = rep.per_class[class_name];
  pc.count += 1;
  if (ok) pc.correct += 1;
  auto& sb = rep.by_subpolygon_count[sub_bin];
  sb.count += 1;
  if (ok) sb.correct += 1;
  if (!ratio_bin.empty()) {
    auto& rb = rep.by_area_ratio[ratio_bin];
    rb.count += 1;
    if (ok) rb.correct += 1;
  }
  if (predicted >= 0 && true_label >= 0)
    rep.confusion[true_label][predicted] += 1;
}

}  // namespace

std::string subpolygon_bin(int parts) {
  if (parts >= 6) return "6+";
  return std::to_string(parts);
}

std::string area_ratio_bin(double r) {
  if (r < 0.1) return "[0,0.1)";
  if (r < 0.2) return "[0.1,0.2)";
  if (r < 0.3) return "[0.2,0.3)";
  if (r < 1.0) return "[0.3,1)";
  if (r < 1.1) return "[1,1.1)";
  if (r < 1.2) return "[1.1,1.2)";
  return "[1.2,inf)";
}

EvalReport evaluate_shapes(const std::vector<ShapeSample>& samples, Model& model) {
  EvalReport rep;
  for (int c = 0; c < model.n_classes; ++c) rep.class_names.push_back(shape_class_name(c));
  rep.confusion.assign(model.n_classes, std::vector<int>(model.n_classes, 0));
  for (const auto& s : samples) {
    std::vector<double> probs = shape_classify(model, s.geom);
    int pred = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    tally(rep, s.label, pred, shape_class_name(s.label),
          subpolygon_bin(static_cast<int>(s.geom.parts.size())), "");
  }
  return rep;
}

EvalReport evaluate_relations(const std::vector<RelationSample>& samples, Model& model) {
  EvalReport rep;
  for (int c = 0; c < kNumRelations; ++c)
    rep.class_names.push_back(relation_name(static_cast<RelationLabel>(c)));
  rep.confusion.assign(kNumRelations, std::vector<int>(kNumRelations, 0));
  for (const auto& s : samples) {
    std::vector<double> probs = relation_predict(model, s.subject, s.object);
    int pred = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    double ratio = geometry_area(s.subject) / geometry_area(s.object);
    tally(rep, static_cast<int>(s.relation), pred, relation_name(s.relation),
          subpolygon_bin(static_cast<int>(s.subject.parts.size())), area_ratio_bin(ratio));
  }
  return rep;
}

EvalReport evaluate_relations_deterministic(const std::vector<RelationSample>& samples) {
  EvalReport rep;
  for (int c = 0; c < kNumRelations; ++c)
    rep.class_names.push_back(relation_name(static_cast<RelationLabel>(c)));
  rep.confusion.assign(kNumRelations, std::vector<int>(kNumRelations, 0));
  for (const auto& s : samples) {
    int pred = -1;
    try {
      pred = static_cast<int>(deterministic_relation(s.subject, s.object));
    } catch (const Error&) {
      pred = -1;  // unclassifiable counts as wrong
    }
    double ratio = geometry_area(s.subject) / geometry_area(s.object);
    tally(rep, static_cast<int>(s.relation), pred, relation_name(s.relation),
          subpolygon_bin(static_cast<int>(s.subject.parts.size())), area_ratio_bin(ratio));
  }
  return rep;
}

std::string eval_report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["total"] = rep.total;
  j["correct"] = rep.correct;
  j["overall_accuracy"] = rep.overall();
  auto dump_groups = [](const std::map<std::string, GroupStat>& groups) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : groups)
      out[k] = {{"count", v.count}, {"correct", v.correct}, {"accuracy", v.accuracy()}};
    return out;
  };
  j["per_class"] = dump_groups(rep.per_class);
  j["by_subpolygon_count"] = dump_groups(rep.by_subpolygon_count);
  if (!rep.by_area_ratio.empty()) j["by_area_ratio"] = dump_groups(rep.by_area_ratio);
  j["classes"] = rep.class_names;
  return j.dump(2);
}

void confusion_to_csv(const EvalReport& rep, std::ostream& os) {
  os << "true\\pred";
  for (const auto& name : rep.class_names) os << ',' << name;
  os << '\n';
  for (size_t i = 0; i < rep.confusion.size(); ++i) {
    os << rep.class_names[i];
    for (int v : rep.confusion[i]) os << ',' << v;
    os << '\n';
  }
}

}  // namespace polyenc
