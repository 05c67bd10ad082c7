#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyenc/geometry.hpp"
#include "polyenc/nn.hpp"
#include "polyenc/spectral.hpp"

namespace polyenc {

enum class EncoderKind { nuftspec_geometric, nuftspec_linear, ddsl_mlp, resnet1d, veercnn };

const char* encoder_kind_name(EncoderKind k);
EncoderKind encoder_kind_from_name(const std::string& name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::nuftspec_geometric;
  int d = 64;              // embedding dimension
  int t = 2;               // KDelta neighbor half-width (resnet1d)
  int resnet_blocks = 1;   // number of residual blocks
  int n_wx = 16;           // frequency count along X (spectral kinds)
  double w_min = 0.5;      // geometric grid bounds
  double w_max = 8.0;
  double pca_var = 0.0;    // PCA variance target, 0 disables PCA
  int mlp_layers = 1;      // h, hidden layers of the spectral MLP
  int mlp_hidden = 128;    // o, width of those layers
  SpectrumNorm norm_mode = SpectrumNorm::none;
  int raster_side = 0;     // ddsl_mlp image side, 0 means N_wx
  double dropout = 0.5;    // applied after global max pooling (resnet1d)
  int veer_layers = 3;
  nn::Pad conv_pad = nn::Pad::circular;  // zero for the padding ablation

  bool is_spectral() const {
    return kind == EncoderKind::nuftspec_geometric || kind == EncoderKind::nuftspec_linear ||
           kind == EncoderKind::ddsl_mlp;
  }
  bool is_mlp_trunk() const { return is_spectral(); }
  int effective_raster_side() const { return raster_side > 0 ? raster_side : n_wx; }
};

// Per-vertex features: coordinates plus offsets to the 2t cyclic neighbors.
// Output row m' = [x_m'; x_{m'-t}-x_m'; ...; x_{m'-1}-x_m';
//                  x_{m'+1}-x_m'; ...; x_{m'+t}-x_m'], shape [m x (4t+2)].
nn::Tensor kdelta_encode(const std::vector<Point2>& ring_seq, int t);

// Vertex sequences of all rings, parts in stored order, exterior before
// holes. Topology information is deliberately dropped.
std::vector<Point2> boundary_concat(const PolyGeom& g);

// Encoder = config + frequency map + fitted preprocessing + trainable params.
struct Encoder {
  EncoderConfig cfg;
  std::shared_ptr<const FrequencyMap> map;  // spectral kinds
  std::optional<PcaModel> pca;
  std::vector<double> feat_mean;  // batch_stats standardization
  std::vector<double> feat_std;
  nn::ParamMap params;
  std::map<std::string, nn::BnState> bn_state;
  int trunk_in = 0;  // MLP input width / conv input channels

  bool trained_layout() const { return !params.empty(); }
};

Encoder make_encoder(const EncoderConfig& cfg);

// Normalization policy: spectral encoders live in [0,2]^2, spatial encoders
// in [-1,1]^2. Pairs share one transform.
PolyGeom normalize_single(const EncoderConfig& cfg, const PolyGeom& g);
std::pair<PolyGeom, PolyGeom> normalize_pair(const EncoderConfig& cfg, const PolyGeom& sub,
                                             const PolyGeom& obj);

// Raw feature vector of a normalized geometry, before batch statistics and
// PCA: flattened NUFT spectrum (nuftspec) or rasterized image (ddsl_mlp).
std::vector<double> raw_spectral_features(const Encoder& enc, const PolyGeom& normalized);

// Applies batch_stats standardization and PCA when fitted.
std::vector<double> model_features(const Encoder& enc, const PolyGeom& normalized);

// [C0 x L] input sequence for the convolutional encoders.
nn::Tensor conv_features(const EncoderConfig& cfg, const PolyGeom& normalized);

// Builds trainable parameters once the trunk input width is known (after
// PCA/statistics fitting for spectral kinds).
void init_trunk_params(Encoder& enc, int input_dim, std::uint64_t seed);

struct TrunkCache {
  nn::Tensor input;
  // spectral MLP trunk
  struct MlpLayer {
    nn::Tensor in, z, a, sum;
    nn::LnCache ln;
  };
  std::vector<MlpLayer> mlp;
  nn::Tensor mlp_pre_out;
  // resnet1d trunk
  nn::Tensor stem_conv, stem_bn_out, stem_act, stem_pooled;
  nn::BnCache stem_bn;
  std::vector<long long> stem_pool_arg;
  std::vector<nn::ResBlockCache> blocks;
  nn::Tensor gmp_in;
  std::vector<long long> gmp_arg;
  nn::Tensor dropout_mask;
  // veercnn trunk
  std::vector<nn::Tensor> veer_pre;
  std::vector<nn::Tensor> veer_act;
};

// Batched trunk forward: input [B,F] for MLP kinds, [B,C0,L] for conv kinds.
// Returns embeddings [B,d].
nn::Tensor trunk_forward(Encoder& enc, const nn::Tensor& input, bool train, Rng& rng,
                         TrunkCache* cache);

// Gradients for every trunk parameter ("enc." prefix) plus "\x00input" is not
// returned; input gradients are not needed by any caller.
nn::ParamMap trunk_backward(const Encoder& enc, const TrunkCache& cache, const nn::Tensor& demb);

// Convenience single-geometry eval-mode embedding (normalizes internally).
std::vector<double> encode_geometry(Encoder& enc, const PolyGeom& g);

// Pair embedding with the shared pair transform; returns {emb_sub, emb_obj}.
std::pair<std::vector<double>, std::vector<double>> encode_pair(Encoder& enc,
                                                                const PolyGeom& sub,
                                                                const PolyGeom& obj);

}  // namespace polyenc
