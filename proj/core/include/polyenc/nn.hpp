#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polyenc/rng.hpp"

namespace polyenc::nn {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<int> s);
  static Tensor full(std::vector<int> s, double v);

  long long numel() const;
  int dim(int i) const { return shape[i]; }
  int rank() const { return static_cast<int>(shape.size()); }

  double& at2(int i, int j) { return data[static_cast<size_t>(i) * shape[1] + j]; }
  double at2(int i, int j) const { return data[static_cast<size_t>(i) * shape[1] + j]; }
  double& at3(int b, int c, int l) {
    return data[(static_cast<size_t>(b) * shape[1] + c) * shape[2] + l];
  }
  double at3(int b, int c, int l) const {
    return data[(static_cast<size_t>(b) * shape[1] + c) * shape[2] + l];
  }
};

// Ordered by key so iteration (and therefore training) is deterministic.
using ParamMap = std::map<std::string, Tensor>;

struct AdamState {
  long long step = 0;
  ParamMap m;
  ParamMap v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class Pad { circular, zero, none };

// ---- dense: y = x W + b, x [B x in], W [in x out], b [out]
Tensor dense(const Tensor& x, const Tensor& W, const Tensor& b);
struct DenseGrads {
  Tensor dx, dW, db;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& W, const Tensor& dy);

// ---- conv1d: cross-correlation, x [B x Cin x L], kernels [Cout x Cin x kw].
// circular wraps indices; zero pads (kw-1)/2 per side. Output length
// ceil(L / stride) for both.
Tensor conv1d(const Tensor& x, const Tensor& kernels, int stride, Pad pad);
struct ConvGrads {
  Tensor dx, dk;
};
ConvGrads conv1d_backward(const Tensor& x, const Tensor& kernels, int stride, Pad pad,
                          const Tensor& dy);

// ---- pooling over the L axis. Ties route gradients to the lowest window
// position. argmax stores flat input indices (-1 for padded positions).
Tensor maxpool1d(const Tensor& x, int k, int stride, Pad pad,
                 std::vector<long long>* argmax = nullptr);
Tensor maxpool1d_backward(const std::vector<long long>& argmax, const Tensor& dy,
                          const std::vector<int>& x_shape);

Tensor global_maxpool(const Tensor& x, std::vector<long long>* argmax = nullptr);
Tensor global_maxpool_backward(const std::vector<long long>& argmax, const Tensor& dy,
                               const std::vector<int>& x_shape);
Tensor global_avgpool(const Tensor& x);
Tensor global_avgpool_backward(const Tensor& dy, const std::vector<int>& x_shape);

// ---- batch norm over [B x C x L], per-channel stats across B*L
struct BnState {
  Tensor running_mean;  // [C]
  Tensor running_var;   // [C]
};
struct BnCache {
  Tensor xhat;
  std::vector<double> invstd;  // per channel
};
Tensor batch_norm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta, bool train,
                    BnState& state, BnCache* cache = nullptr, double eps = 1e-5,
                    double momentum = 0.1);
struct BnGrads {
  Tensor dx, dgamma, dbeta;
};
BnGrads batch_norm1d_backward(const Tensor& dy, const BnCache& cache, const Tensor& gamma);

// ---- layer norm over the feature axis of [B x F]
struct LnCache {
  Tensor xhat;
  std::vector<double> invstd;  // per row
};
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  LnCache* cache = nullptr, double eps = 1e-5);
struct LnGrads {
  Tensor dx, dgamma, dbeta;
};
LnGrads layer_norm_backward(const Tensor& dy, const LnCache& cache, const Tensor& gamma);

// ---- pointwise
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);

// Inverted dropout: keep with probability 1-p and scale by 1/(1-p) in train
// mode; identity in eval mode.
Tensor dropout(const Tensor& x, double p, Rng& rng, bool train, Tensor* mask = nullptr);
Tensor dropout_backward(const Tensor& mask, const Tensor& dy);

// ---- residual block: relu(x + BN(conv(relu(BN(conv(x))))))
struct ResBlockCache {
  Tensor x, h1, a1, h2, sum;
  BnCache bn1, bn2;
};
Tensor residual_block1d(const Tensor& x, const Tensor& k1, const Tensor& g1, const Tensor& b1,
                        BnState& s1, const Tensor& k2, const Tensor& g2, const Tensor& b2,
                        BnState& s2, bool train, Pad pad, ResBlockCache* cache = nullptr);
struct ResBlockGrads {
  Tensor dx, dk1, dg1, db1, dk2, dg2, db2;
};
ResBlockGrads residual_block1d_backward(const Tensor& dy, const ResBlockCache& cache,
                                        const Tensor& k1, const Tensor& k2, const Tensor& g1,
                                        const Tensor& g2, Pad pad);

// ---- loss
struct SoftmaxLoss {
  double loss = 0.0;
  Tensor grad;   // d(mean nll)/d logits
  Tensor probs;  // row-stochastic
};
SoftmaxLoss softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// ---- optimizers
void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr);
void sgd_step(ParamMap& params, const ParamMap& grads, double lr);

// ---- init
Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng);

// ---- verification harness: central finite differences against the analytic
// gradient returned by f. Every entry of every tensor in params is probed.
// Returns the max relative error.
double grad_check(
    const std::function<std::pair<double, ParamMap>(const ParamMap&)>& f,
    const ParamMap& params, double eps = 1e-5);

}  // namespace polyenc::nn
