#include "polyenc/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "polyenc/error.hpp"

namespace polyenc {

const char* encoder_kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::nuftspec_geometric: return "nuftspec_geometric";
    case EncoderKind::nuftspec_linear: return "nuftspec_linear";
    case EncoderKind::ddsl_mlp: return "ddsl_mlp";
    case EncoderKind::resnet1d: return "resnet1d";
    case EncoderKind::veercnn: return "veercnn";
  }
  return "?";
}

EncoderKind encoder_kind_from_name(const std::string& name) {
  for (EncoderKind k :
       {EncoderKind::nuftspec_geometric, EncoderKind::nuftspec_linear, EncoderKind::ddsl_mlp,
        EncoderKind::resnet1d, EncoderKind::veercnn}) {
    if (name == encoder_kind_name(k)) return k;
  }
  fail(Errc::config, "unknown encoder kind '" + name + "'");
}

nn::Tensor kdelta_encode(const std::vector<Point2>& ring_seq, int t) {
  int m = static_cast<int>(ring_seq.size());
  if (t < 0) fail(Errc::domain, "kdelta_encode: negative t");
  if (m < 2 * t + 1) fail(Errc::domain, "kdelta_encode: need at least 2t+1 points");
  int width = 4 * t + 2;
  nn::Tensor out = nn::Tensor::zeros({m, width});
  for (int i = 0; i < m; ++i) {
    int col = 0;
    out.at2(i, col++) = ring_seq[i].x;
    out.at2(i, col++) = ring_seq[i].y;
    for (int dj = -t; dj <= t; ++dj) {
      if (dj == 0) continue;
      const Point2& nb = ring_seq[((i + dj) % m + m) % m];
      out.at2(i, col++) = nb.x - ring_seq[i].x;
      out.at2(i, col++) = nb.y - ring_seq[i].y;
    }
  }
  return out;
}

std::vector<Point2> boundary_concat(const PolyGeom& g) {
  std::vector<Point2> seq;
  seq.reserve(g.vertex_count());
  for (const auto& part : g.parts) {
    seq.insert(seq.end(), part.exterior.pts.begin(), part.exterior.pts.end());
    for (const auto& h : part.holes) seq.insert(seq.end(), h.pts.begin(), h.pts.end());
  }
  return seq;
}

Encoder make_encoder(const EncoderConfig& cfg) {
  Encoder enc;
  enc.cfg = cfg;
  if (cfg.d <= 0) fail(Errc::config, "encoder: d must be positive");
  switch (cfg.kind) {
    case EncoderKind::nuftspec_geometric:
      enc.map = std::make_shared<FrequencyMap>(geometric_grid(cfg.n_wx, cfg.w_min, cfg.w_max));
      break;
    case EncoderKind::nuftspec_linear:
    case EncoderKind::ddsl_mlp:
      enc.map = std::make_shared<FrequencyMap>(linear_grid(cfg.n_wx));
      break;
    default:
      break;
  }
  return enc;
}

PolyGeom normalize_single(const EncoderConfig& cfg, const PolyGeom& g) {
  auto target = cfg.is_spectral() ? NormalizeTarget::nuft_space : NormalizeTarget::centered_unit;
  return normalize_unit({g}, target).first[0];
}

std::pair<PolyGeom, PolyGeom> normalize_pair(const EncoderConfig& cfg, const PolyGeom& sub,
                                             const PolyGeom& obj) {
  auto target = cfg.is_spectral() ? NormalizeTarget::nuft_space : NormalizeTarget::centered_unit;
  auto [out, tf] = normalize_unit({sub, obj}, target);
  (void)tf;
  return {out[0], out[1]};
}

std::vector<double> raw_spectral_features(const Encoder& enc, const PolyGeom& normalized) {
  if (!enc.cfg.is_spectral()) fail(Errc::internal, "raw_spectral_features on a spatial encoder");
  SimplexMesh mesh = to_simplex_mesh(normalized);
  if (enc.cfg.kind == EncoderKind::ddsl_mlp) {
    SpectralVector spec = nuft(mesh, enc.map, kRasterFreqUnit);
    RasterImage img = ifft_rasterize(spec, enc.cfg.effective_raster_side());
    return img.pixels;
  }
  SpectralVector spec = nuft(mesh, enc.map);
  auto mode = enc.cfg.norm_mode == SpectrumNorm::l2 ? SpectrumNorm::l2 : SpectrumNorm::none;
  return flatten_spectrum(spec, mode);
}

std::vector<double> model_features(const Encoder& enc, const PolyGeom& normalized) {
  std::vector<double> f = raw_spectral_features(enc, normalized);
  if (enc.cfg.norm_mode == SpectrumNorm::batch_stats && !enc.feat_mean.empty()) {
    for (size_t i = 0; i < f.size(); ++i)
      f[i] = (f[i] - enc.feat_mean[i]) / enc.feat_std[i];
  }
  if (enc.pca) return pca_project(*enc.pca, f);
  return f;
}

nn::Tensor conv_features(const EncoderConfig& cfg, const PolyGeom& normalized) {
  std::vector<Point2> seq = boundary_concat(normalized);
  int m = static_cast<int>(seq.size());
  if (m < 4) fail(Errc::domain, "conv_features: fewer than 4 vertices");
  if (cfg.kind == EncoderKind::resnet1d) {
    if (m < 2 * cfg.t + 1) fail(Errc::domain, "conv_features: too few vertices for KDelta");
    nn::Tensor rows = kdelta_encode(seq, cfg.t);  // [m, 4t+2]
    int c0 = rows.shape[1];
    nn::Tensor out = nn::Tensor::zeros({c0, m});
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < c0; ++c) out.at2(c, i) = rows.at2(i, c);
    return out;
  }
  // veercnn consumes raw coordinates
  nn::Tensor out = nn::Tensor::zeros({2, m});
  for (int i = 0; i < m; ++i) {
    out.at2(0, i) = seq[i].x;
    out.at2(1, i) = seq[i].y;
  }
  return out;
}

namespace {

std::string lkey(const char* stem, int i, const char* leaf) {
  return std::string("enc.") + stem + std::to_string(i) + "." + leaf;
}

}  // namespace

void init_trunk_params(Encoder& enc, int input_dim, std::uint64_t seed) {
  Rng rng(seed);
  enc.params.clear();
  enc.bn_state.clear();
  enc.trunk_in = input_dim;
  const EncoderConfig& cfg = enc.cfg;

  if (cfg.is_mlp_trunk()) {
    int in = input_dim;
    for (int i = 0; i < cfg.mlp_layers; ++i) {
      int out = cfg.mlp_hidden;
      enc.params[lkey("l", i, "W")] = nn::glorot_uniform({in, out}, in, out, rng);
      enc.params[lkey("l", i, "b")] = nn::Tensor::zeros({out});
      if (in != out)
        enc.params[lkey("l", i, "P")] = nn::glorot_uniform({in, out}, in, out, rng);
      enc.params[lkey("l", i, "ln.g")] = nn::Tensor::full({out}, 1.0);
      enc.params[lkey("l", i, "ln.b")] = nn::Tensor::zeros({out});
      in = out;
    }
    enc.params["enc.out.W"] = nn::glorot_uniform({in, cfg.d}, in, cfg.d, rng);
    enc.params["enc.out.b"] = nn::Tensor::zeros({cfg.d});
    return;
  }

  if (cfg.kind == EncoderKind::resnet1d) {
    int c = cfg.d;  // the embedding dim equals the channel count
    enc.params["enc.stem.k"] =
        nn::glorot_uniform({c, input_dim, 3}, input_dim * 3, c * 3, rng);
    enc.params["enc.stem.bn.g"] = nn::Tensor::full({c}, 1.0);
    enc.params["enc.stem.bn.b"] = nn::Tensor::zeros({c});
    enc.bn_state["enc.stem.bn"] = {};
    for (int i = 0; i < cfg.resnet_blocks; ++i) {
      enc.params[lkey("block", i, "k1")] = nn::glorot_uniform({c, c, 3}, c * 3, c * 3, rng);
      enc.params[lkey("block", i, "bn1.g")] = nn::Tensor::full({c}, 1.0);
      enc.params[lkey("block", i, "bn1.b")] = nn::Tensor::zeros({c});
      enc.params[lkey("block", i, "k2")] = nn::glorot_uniform({c, c, 3}, c * 3, c * 3, rng);
      enc.params[lkey("block", i, "bn2.g")] = nn::Tensor::full({c}, 1.0);
      enc.params[lkey("block", i, "bn2.b")] = nn::Tensor::zeros({c});
      enc.bn_state[lkey("block", i, "bn1")] = {};
      enc.bn_state[lkey("block", i, "bn2")] = {};
    }
    return;
  }

  // veercnn: widths 2 -> d -> ... -> d
  int in = input_dim;
  for (int i = 0; i < cfg.veer_layers; ++i) {
    int out = cfg.d;
    enc.params[lkey("conv", i, "k")] = nn::glorot_uniform({out, in, 3}, in * 3, out * 3, rng);
    in = out;
  }
}

nn::Tensor trunk_forward(Encoder& enc, const nn::Tensor& input, bool train, Rng& rng,
                         TrunkCache* cache) {
  const EncoderConfig& cfg = enc.cfg;
  TrunkCache local;
  TrunkCache& cc = cache ? *cache : local;
  cc.input = input;

  if (cfg.is_mlp_trunk()) {
    nn::Tensor h = input;
    cc.mlp.clear();
    for (int i = 0; i < cfg.mlp_layers; ++i) {
      TrunkCache::MlpLayer layer;
      layer.in = h;
      const nn::Tensor& W = enc.params.at(lkey("l", i, "W"));
      const nn::Tensor& b = enc.params.at(lkey("l", i, "b"));
      layer.z = nn::dense(h, W, b);
      layer.a = nn::relu(layer.z);
      layer.sum = layer.a;
      if (h.shape[1] == layer.a.shape[1]) {
        for (size_t j = 0; j < layer.sum.data.size(); ++j) layer.sum.data[j] += h.data[j];
      } else {
        const nn::Tensor& P = enc.params.at(lkey("l", i, "P"));
        nn::Tensor proj = nn::dense(h, P, nn::Tensor::zeros({P.shape[1]}));
        for (size_t j = 0; j < layer.sum.data.size(); ++j) layer.sum.data[j] += proj.data[j];
      }
      h = nn::layer_norm(layer.sum, enc.params.at(lkey("l", i, "ln.g")),
                         enc.params.at(lkey("l", i, "ln.b")), &layer.ln);
      cc.mlp.push_back(std::move(layer));
    }
    cc.mlp_pre_out = h;
    return nn::dense(h, enc.params.at("enc.out.W"), enc.params.at("enc.out.b"));
  }

  if (cfg.kind == EncoderKind::resnet1d) {
    nn::Pad pad = cfg.conv_pad;
    cc.stem_conv = nn::conv1d(input, enc.params.at("enc.stem.k"), 1, pad);
    cc.stem_bn_out = nn::batch_norm1d(cc.stem_conv, enc.params.at("enc.stem.bn.g"),
                                      enc.params.at("enc.stem.bn.b"), train,
                                      enc.bn_state.at("enc.stem.bn"), &cc.stem_bn);
    cc.stem_act = nn::relu(cc.stem_bn_out);
    cc.stem_pooled = nn::maxpool1d(cc.stem_act, 2, 2,
                                   pad == nn::Pad::circular ? nn::Pad::circular : nn::Pad::none,
                                   &cc.stem_pool_arg);
    nn::Tensor h = cc.stem_pooled;
    cc.blocks.assign(cfg.resnet_blocks, {});
    for (int i = 0; i < cfg.resnet_blocks; ++i) {
      h = nn::residual_block1d(
          h, enc.params.at(lkey("block", i, "k1")), enc.params.at(lkey("block", i, "bn1.g")),
          enc.params.at(lkey("block", i, "bn1.b")), enc.bn_state.at(lkey("block", i, "bn1")),
          enc.params.at(lkey("block", i, "k2")), enc.params.at(lkey("block", i, "bn2.g")),
          enc.params.at(lkey("block", i, "bn2.b")), enc.bn_state.at(lkey("block", i, "bn2")),
          train, pad, &cc.blocks[i]);
    }
    cc.gmp_in = h;
    nn::Tensor emb = nn::global_maxpool(h, &cc.gmp_arg);
    return nn::dropout(emb, cfg.dropout, rng, train, &cc.dropout_mask);
  }

  // veercnn
  nn::Tensor h = input;
  cc.veer_pre.clear();
  cc.veer_act.clear();
  for (int i = 0; i < cfg.veer_layers; ++i) {
    cc.veer_act.push_back(h);
    h = nn::conv1d(h, enc.params.at(lkey("conv", i, "k")), 1, nn::Pad::zero);
    cc.veer_pre.push_back(h);
    h = nn::relu(h);
  }
  cc.gmp_in = h;
  return nn::global_avgpool(h);
}

nn::ParamMap trunk_backward(const Encoder& enc, const TrunkCache& cc, const nn::Tensor& demb) {
  const EncoderConfig& cfg = enc.cfg;
  nn::ParamMap grads;

  if (cfg.is_mlp_trunk()) {
    nn::DenseGrads og =
        nn::dense_backward(cc.mlp_pre_out, enc.params.at("enc.out.W"), demb);
    grads["enc.out.W"] = std::move(og.dW);
    grads["enc.out.b"] = std::move(og.db);
    nn::Tensor dh = std::move(og.dx);
    for (int i = cfg.mlp_layers - 1; i >= 0; --i) {
      const auto& layer = cc.mlp[i];
      nn::LnGrads lg =
          nn::layer_norm_backward(dh, layer.ln, enc.params.at(lkey("l", i, "ln.g")));
      grads[lkey("l", i, "ln.g")] = std::move(lg.dgamma);
      grads[lkey("l", i, "ln.b")] = std::move(lg.dbeta);
      nn::Tensor dsum = std::move(lg.dx);
      nn::Tensor da = nn::relu_backward(layer.z, dsum);
      nn::DenseGrads dg = nn::dense_backward(layer.in, enc.params.at(lkey("l", i, "W")), da);
      grads[lkey("l", i, "W")] = std::move(dg.dW);
      grads[lkey("l", i, "b")] = std::move(dg.db);
      nn::Tensor din = std::move(dg.dx);
      if (layer.in.shape[1] == layer.a.shape[1]) {
        for (size_t j = 0; j < din.data.size(); ++j) din.data[j] += dsum.data[j];
      } else {
        const nn::Tensor& P = enc.params.at(lkey("l", i, "P"));
        nn::DenseGrads pg = nn::dense_backward(layer.in, P, dsum);
        grads[lkey("l", i, "P")] = std::move(pg.dW);
        for (size_t j = 0; j < din.data.size(); ++j) din.data[j] += pg.dx.data[j];
      }
      dh = std::move(din);
    }
    return grads;
  }

  if (cfg.kind == EncoderKind::resnet1d) {
    nn::Pad pad = cfg.conv_pad;
    nn::Tensor demb2 = nn::dropout_backward(cc.dropout_mask, demb);
    nn::Tensor dh = nn::global_maxpool_backward(cc.gmp_arg, demb2, cc.gmp_in.shape);
    for (int i = cfg.resnet_blocks - 1; i >= 0; --i) {
      nn::ResBlockGrads bg = nn::residual_block1d_backward(
          dh, cc.blocks[i], enc.params.at(lkey("block", i, "k1")),
          enc.params.at(lkey("block", i, "k2")), enc.params.at(lkey("block", i, "bn1.g")),
          enc.params.at(lkey("block", i, "bn2.g")), pad);
      grads[lkey("block", i, "k1")] = std::move(bg.dk1);
      grads[lkey("block", i, "bn1.g")] = std::move(bg.dg1);
      grads[lkey("block", i, "bn1.b")] = std::move(bg.db1);
      grads[lkey("block", i, "k2")] = std::move(bg.dk2);
      grads[lkey("block", i, "bn2.g")] = std::move(bg.dg2);
      grads[lkey("block", i, "bn2.b")] = std::move(bg.db2);
      dh = std::move(bg.dx);
    }
    nn::Tensor dpool = nn::maxpool1d_backward(cc.stem_pool_arg, dh, cc.stem_act.shape);
    nn::Tensor dact = nn::relu_backward(cc.stem_bn_out, dpool);
    nn::BnGrads sg = nn::batch_norm1d_backward(dact, cc.stem_bn, enc.params.at("enc.stem.bn.g"));
    grads["enc.stem.bn.g"] = std::move(sg.dgamma);
    grads["enc.stem.bn.b"] = std::move(sg.dbeta);
    nn::ConvGrads cg =
        nn::conv1d_backward(cc.input, enc.params.at("enc.stem.k"), 1, pad, sg.dx);
    grads["enc.stem.k"] = std::move(cg.dk);
    return grads;
  }

  // veercnn
  nn::Tensor dh = nn::global_avgpool_backward(demb, cc.gmp_in.shape);
  for (int i = cfg.veer_layers - 1; i >= 0; --i) {
    dh = nn::relu_backward(cc.veer_pre[i], dh);
    nn::ConvGrads cg =
        nn::conv1d_backward(cc.veer_act[i], enc.params.at(lkey("conv", i, "k")), 1,
                            nn::Pad::zero, dh);
    grads[lkey("conv", i, "k")] = std::move(cg.dk);
    dh = std::move(cg.dx);
  }
  return grads;
}

namespace {

nn::Tensor single_input_tensor(const Encoder& enc, const PolyGeom& normalized) {
  if (enc.cfg.is_mlp_trunk()) {
    std::vector<double> f = model_features(enc, normalized);
    nn::Tensor in = nn::Tensor::zeros({1, static_cast<int>(f.size())});
    std::copy(f.begin(), f.end(), in.data.begin());
    return in;
  }
  nn::Tensor seq = conv_features(enc.cfg, normalized);  // [C0, L]
  nn::Tensor in = nn::Tensor::zeros({1, seq.shape[0], seq.shape[1]});
  std::copy(seq.data.begin(), seq.data.end(), in.data.begin());
  return in;
}

}  // namespace

std::vector<double> encode_geometry(Encoder& enc, const PolyGeom& g) {
  if (!enc.trained_layout()) fail(Errc::internal, "encode_geometry: parameters not initialized");
  PolyGeom normalized = normalize_single(enc.cfg, g);
  nn::Tensor in = single_input_tensor(enc, normalized);
  Rng rng(0);
  nn::Tensor emb = trunk_forward(enc, in, /*train=*/false, rng, nullptr);
  return emb.data;
}

std::pair<std::vector<double>, std::vector<double>> encode_pair(Encoder& enc,
                                                                const PolyGeom& sub,
                                                                const PolyGeom& obj) {
  if (!enc.trained_layout()) fail(Errc::internal, "encode_pair: parameters not initialized");
  auto [nsub, nobj] = normalize_pair(enc.cfg, sub, obj);
  Rng rng(0);
  nn::Tensor in_s = single_input_tensor(enc, nsub);
  nn::Tensor in_o = single_input_tensor(enc, nobj);
  nn::Tensor emb_s = trunk_forward(enc, in_s, false, rng, nullptr);
  nn::Tensor emb_o = trunk_forward(enc, in_o, false, rng, nullptr);
  return {emb_s.data, emb_o.data};
}

}  // namespace polyenc
