#include "polyenc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "polyenc/error.hpp"

namespace polyenc::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void require(bool cond, const char* msg) {
  if (!cond) fail(Errc::domain, msg);
}

int pad_left(int kw) { return (kw - 1) / 2; }

}  // namespace

Tensor Tensor::zeros(std::vector<int> s) {
  Tensor t;
  long long n = 1;
  for (int d : s) n *= d;
  t.shape = std::move(s);
  t.data.assign(static_cast<size_t>(n), 0.0);
  return t;
}

Tensor Tensor::full(std::vector<int> s, double v) {
  Tensor t = zeros(std::move(s));
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

long long Tensor::numel() const {
  long long n = 1;
  for (int d : shape) n *= d;
  return n;
}

Tensor dense(const Tensor& x, const Tensor& W, const Tensor& b) {
  require(x.rank() == 2 && W.rank() == 2 && b.rank() == 1, "dense: bad ranks");
  require(x.shape[1] == W.shape[0] && W.shape[1] == b.shape[0], "dense: shape mismatch");
  int B = x.shape[0], in = x.shape[1], out = W.shape[1];
  Tensor y = Tensor::zeros({B, out});
  CMapMat xm(x.data.data(), B, in);
  CMapMat wm(W.data.data(), in, out);
  MapMat ym(y.data.data(), B, out);
  ym.noalias() = xm * wm;
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < out; ++j) y.at2(i, j) += b.data[j];
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& W, const Tensor& dy) {
  int B = x.shape[0], in = x.shape[1], out = W.shape[1];
  require(dy.shape[0] == B && dy.shape[1] == out, "dense_backward: dy shape mismatch");
  DenseGrads g;
  g.dx = Tensor::zeros({B, in});
  g.dW = Tensor::zeros({in, out});
  g.db = Tensor::zeros({out});
  CMapMat xm(x.data.data(), B, in);
  CMapMat wm(W.data.data(), in, out);
  CMapMat dym(dy.data.data(), B, out);
  MapMat dxm(g.dx.data.data(), B, in);
  MapMat dwm(g.dW.data.data(), in, out);
  dxm.noalias() = dym * wm.transpose();
  dwm.noalias() = xm.transpose() * dym;
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < out; ++j) g.db.data[j] += dy.at2(i, j);
  return g;
}

namespace {

int conv_out_len(int L, int stride) { return (L + stride - 1) / stride; }

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& kernels, int stride, Pad pad) {
  require(x.rank() == 3 && kernels.rank() == 3, "conv1d: bad ranks");
  require(x.shape[1] == kernels.shape[1], "conv1d: channel mismatch");
  require(pad != Pad::none, "conv1d: pad must be circular or zero");
  require(stride >= 1, "conv1d: bad stride");
  int B = x.shape[0], Cin = x.shape[1], L = x.shape[2];
  int Cout = kernels.shape[0], kw = kernels.shape[2];
  require(L >= kw, "conv1d: input shorter than kernel");
  int left = pad_left(kw);
  int Lout = conv_out_len(L, stride);

  Tensor y = Tensor::zeros({B, Cout, Lout});
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Cout; ++co) {
      const double* kbase = &kernels.data[(static_cast<size_t>(co) * Cin) * kw];
      for (int o = 0; o < Lout; ++o) {
        double acc = 0.0;
        int start = o * stride - left;
        for (int ci = 0; ci < Cin; ++ci) {
          const double* xrow = &x.data[(static_cast<size_t>(b) * Cin + ci) * L];
          const double* krow = kbase + static_cast<size_t>(ci) * kw;
          for (int t = 0; t < kw; ++t) {
            int idx = start + t;
            if (pad == Pad::circular) {
              idx = ((idx % L) + L) % L;
              acc += krow[t] * xrow[idx];
            } else {
              if (idx >= 0 && idx < L) acc += krow[t] * xrow[idx];
            }
          }
        }
        y.at3(b, co, o) = acc;
      }
    }
  }
  return y;
}

ConvGrads conv1d_backward(const Tensor& x, const Tensor& kernels, int stride, Pad pad,
                          const Tensor& dy) {
  int B = x.shape[0], Cin = x.shape[1], L = x.shape[2];
  int Cout = kernels.shape[0], kw = kernels.shape[2];
  int left = pad_left(kw);
  int Lout = conv_out_len(L, stride);
  require(dy.shape[0] == B && dy.shape[1] == Cout && dy.shape[2] == Lout,
          "conv1d_backward: dy shape mismatch");

  ConvGrads g;
  g.dx = Tensor::zeros({B, Cin, L});
  g.dk = Tensor::zeros({Cout, Cin, kw});
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Cout; ++co) {
      for (int o = 0; o < Lout; ++o) {
        double gy = dy.at3(b, co, o);
        if (gy == 0.0) continue;
        int start = o * stride - left;
        for (int ci = 0; ci < Cin; ++ci) {
          const double* xrow = &x.data[(static_cast<size_t>(b) * Cin + ci) * L];
          double* dxrow = &g.dx.data[(static_cast<size_t>(b) * Cin + ci) * L];
          const double* krow = &kernels.data[(static_cast<size_t>(co) * Cin + ci) * kw];
          double* dkrow = &g.dk.data[(static_cast<size_t>(co) * Cin + ci) * kw];
          for (int t = 0; t < kw; ++t) {
            int idx = start + t;
            if (pad == Pad::circular)
              idx = ((idx % L) + L) % L;
            else if (idx < 0 || idx >= L)
              continue;
            dkrow[t] += gy * xrow[idx];
            dxrow[idx] += gy * krow[t];
          }
        }
      }
    }
  }
  return g;
}

Tensor maxpool1d(const Tensor& x, int k, int stride, Pad pad,
                 std::vector<long long>* argmax) {
  require(x.rank() == 3, "maxpool1d: expected [B,C,L]");
  require(k >= 1 && stride >= 1, "maxpool1d: bad window");
  int B = x.shape[0], C = x.shape[1], L = x.shape[2];
  int left = pad == Pad::zero ? pad_left(k) : 0;
  int Lout;
  if (pad == Pad::none) {
    require(L >= k, "maxpool1d: window larger than input");
    Lout = (L - k) / stride + 1;
  } else {
    Lout = conv_out_len(L, stride);
  }
  Tensor y = Tensor::zeros({B, C, Lout});
  if (argmax) argmax->assign(static_cast<size_t>(B) * C * Lout, -1);

  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xrow = &x.data[(static_cast<size_t>(b) * C + c) * L];
      for (int o = 0; o < Lout; ++o) {
        double best = -std::numeric_limits<double>::infinity();
        long long best_idx = -1;
        int start = o * stride - left;
        for (int t = 0; t < k; ++t) {
          int idx = start + t;
          double v;
          if (pad == Pad::circular) {
            idx = ((idx % L) + L) % L;
            v = xrow[idx];
          } else if (idx >= 0 && idx < L) {
            v = xrow[idx];
          } else if (pad == Pad::zero) {
            v = 0.0;
            idx = -1;
          } else {
            continue;
          }
          if (v > best) {
            best = v;
            best_idx = idx < 0 ? -1 : (static_cast<long long>(b) * C + c) * L + idx;
          }
        }
        y.at3(b, c, o) = best;
        if (argmax) (*argmax)[(static_cast<size_t>(b) * C + c) * Lout + o] = best_idx;
      }
    }
  }
  return y;
}

Tensor maxpool1d_backward(const std::vector<long long>& argmax, const Tensor& dy,
                          const std::vector<int>& x_shape) {
  Tensor dx = Tensor::zeros(x_shape);
  require(argmax.size() == dy.data.size(), "maxpool1d_backward: argmax/dy mismatch");
  for (size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= 0) dx.data[static_cast<size_t>(argmax[i])] += dy.data[i];
  }
  return dx;
}

Tensor global_maxpool(const Tensor& x, std::vector<long long>* argmax) {
  require(x.rank() == 3, "global_maxpool: expected [B,C,L]");
  int B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(L >= 1, "global_maxpool: empty length axis");
  Tensor y = Tensor::zeros({B, C});
  if (argmax) argmax->assign(static_cast<size_t>(B) * C, -1);
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xrow = &x.data[(static_cast<size_t>(b) * C + c) * L];
      double best = xrow[0];
      int best_l = 0;
      for (int l = 1; l < L; ++l) {
        if (xrow[l] > best) {
          best = xrow[l];
          best_l = l;
        }
      }
      y.at2(b, c) = best;
      if (argmax)
        (*argmax)[static_cast<size_t>(b) * C + c] = (static_cast<long long>(b) * C + c) * L + best_l;
    }
  }
  return y;
}

Tensor global_maxpool_backward(const std::vector<long long>& argmax, const Tensor& dy,
                               const std::vector<int>& x_shape) {
  Tensor dx = Tensor::zeros(x_shape);
  for (size_t i = 0; i < argmax.size(); ++i)
    if (argmax[i] >= 0) dx.data[static_cast<size_t>(argmax[i])] += dy.data[i];
  return dx;
}

Tensor global_avgpool(const Tensor& x) {
  require(x.rank() == 3, "global_avgpool: expected [B,C,L]");
  int B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(L >= 1, "global_avgpool: empty length axis");
  Tensor y = Tensor::zeros({B, C});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int l = 0; l < L; ++l) acc += x.at3(b, c, l);
      y.at2(b, c) = acc / L;
    }
  return y;
}

Tensor global_avgpool_backward(const Tensor& dy, const std::vector<int>& x_shape) {
  Tensor dx = Tensor::zeros(x_shape);
  int B = x_shape[0], C = x_shape[1], L = x_shape[2];
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      double g = dy.at2(b, c) / L;
      for (int l = 0; l < L; ++l) dx.at3(b, c, l) = g;
    }
  return dx;
}

Tensor batch_norm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta, bool train,
                    BnState& state, BnCache* cache, double eps, double momentum) {
  require(x.rank() == 3, "batch_norm1d: expected [B,C,L]");
  int B = x.shape[0], C = x.shape[1], L = x.shape[2];
  require(gamma.shape == std::vector<int>{C} && beta.shape == std::vector<int>{C},
          "batch_norm1d: affine shape mismatch");
  if (state.running_mean.data.empty()) {
    state.running_mean = Tensor::zeros({C});
    state.running_var = Tensor::full({C}, 1.0);
  }
  if (train) require(B >= 2, "batch_norm1d: train mode needs batch size >= 2");

  Tensor y = Tensor::zeros({B, C, L});
  Tensor xhat = Tensor::zeros({B, C, L});
  std::vector<double> invstd(C, 0.0);
  long long n = static_cast<long long>(B) * L;

  for (int c = 0; c < C; ++c) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) s += x.at3(b, c, l);
      mean = s / n;
      double sq = 0.0;
      for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
          double d = x.at3(b, c, l) - mean;
          sq += d * d;
        }
      var = sq / n;  // biased, used for normalization
      double unbiased = n > 1 ? sq / (n - 1) : var;
      state.running_mean.data[c] = (1.0 - momentum) * state.running_mean.data[c] + momentum * mean;
      state.running_var.data[c] = (1.0 - momentum) * state.running_var.data[c] + momentum * unbiased;
    } else {
      mean = state.running_mean.data[c];
      var = state.running_var.data[c];
    }
    double inv = 1.0 / std::sqrt(var + eps);
    invstd[c] = inv;
    double g = gamma.data[c], be = beta.data[c];
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        double xh = (x.at3(b, c, l) - mean) * inv;
        xhat.at3(b, c, l) = xh;
        y.at3(b, c, l) = g * xh + be;
      }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->invstd = std::move(invstd);
  }
  return y;
}

BnGrads batch_norm1d_backward(const Tensor& dy, const BnCache& cache, const Tensor& gamma) {
  int B = dy.shape[0], C = dy.shape[1], L = dy.shape[2];
  BnGrads g;
  g.dx = Tensor::zeros({B, C, L});
  g.dgamma = Tensor::zeros({C});
  g.dbeta = Tensor::zeros({C});
  long long n = static_cast<long long>(B) * L;

  for (int c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        double d = dy.at3(b, c, l);
        sum_dy += d;
        sum_dy_xhat += d * cache.xhat.at3(b, c, l);
      }
    g.dgamma.data[c] = sum_dy_xhat;
    g.dbeta.data[c] = sum_dy;
    double gm = gamma.data[c];
    double inv = cache.invstd[c];
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        double dxhat = dy.at3(b, c, l) * gm;
        g.dx.at3(b, c, l) =
            inv * (dxhat - (sum_dy * gm + cache.xhat.at3(b, c, l) * sum_dy_xhat * gm) / n);
      }
  }
  return g;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, LnCache* cache,
                  double eps) {
  require(x.rank() == 2, "layer_norm: expected [B,F]");
  int B = x.shape[0], F = x.shape[1];
  require(F >= 1, "layer_norm: empty feature axis");
  require(gamma.shape == std::vector<int>{F} && beta.shape == std::vector<int>{F},
          "layer_norm: affine shape mismatch");

  Tensor y = Tensor::zeros({B, F});
  Tensor xhat = Tensor::zeros({B, F});
  std::vector<double> invstd(B);
  for (int b = 0; b < B; ++b) {
    double s = 0.0;
    for (int f = 0; f < F; ++f) s += x.at2(b, f);
    double mean = s / F;
    double sq = 0.0;
    for (int f = 0; f < F; ++f) {
      double d = x.at2(b, f) - mean;
      sq += d * d;
    }
    double inv = 1.0 / std::sqrt(sq / F + eps);
    invstd[b] = inv;
    for (int f = 0; f < F; ++f) {
      double xh = (x.at2(b, f) - mean) * inv;
      xhat.at2(b, f) = xh;
      y.at2(b, f) = gamma.data[f] * xh + beta.data[f];
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->invstd = std::move(invstd);
  }
  return y;
}

LnGrads layer_norm_backward(const Tensor& dy, const LnCache& cache, const Tensor& gamma) {
  int B = dy.shape[0], F = dy.shape[1];
  LnGrads g;
  g.dx = Tensor::zeros({B, F});
  g.dgamma = Tensor::zeros({F});
  g.dbeta = Tensor::zeros({F});
  for (int b = 0; b < B; ++b) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int f = 0; f < F; ++f) {
      double dxhat = dy.at2(b, f) * gamma.data[f];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * cache.xhat.at2(b, f);
      g.dgamma.data[f] += dy.at2(b, f) * cache.xhat.at2(b, f);
      g.dbeta.data[f] += dy.at2(b, f);
    }
    double inv = cache.invstd[b];
    for (int f = 0; f < F; ++f) {
      double dxhat = dy.at2(b, f) * gamma.data[f];
      g.dx.at2(b, f) =
          inv * (dxhat - (sum_dxhat + cache.xhat.at2(b, f) * sum_dxhat_xhat) / F);
    }
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i)
    if (x.data[i] <= 0.0) dx.data[i] = 0.0;
  return dx;
}

Tensor dropout(const Tensor& x, double p, Rng& rng, bool train, Tensor* mask) {
  require(p >= 0.0 && p < 1.0, "dropout: rate must be in [0,1)");
  if (!train || p == 0.0) {
    if (mask) *mask = Tensor::full(x.shape, 1.0);
    return x;
  }
  Tensor m = Tensor::zeros(x.shape);
  double scale = 1.0 / (1.0 - p);
  for (double& v : m.data) v = rng.uniform() >= p ? scale : 0.0;
  Tensor y = x;
  for (size_t i = 0; i < y.data.size(); ++i) y.data[i] *= m.data[i];
  if (mask) *mask = std::move(m);
  return y;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask.data[i];
  return dx;
}

Tensor residual_block1d(const Tensor& x, const Tensor& k1, const Tensor& g1, const Tensor& b1,
                        BnState& s1, const Tensor& k2, const Tensor& g2, const Tensor& b2,
                        BnState& s2, bool train, Pad pad, ResBlockCache* cache) {
  require(k1.shape[0] == x.shape[1] && k1.shape[1] == x.shape[1], "residual_block1d: channels");
  ResBlockCache local;
  ResBlockCache& cc = cache ? *cache : local;
  cc.x = x;
  cc.h1 = conv1d(x, k1, 1, pad);
  Tensor h1n = batch_norm1d(cc.h1, g1, b1, train, s1, &cc.bn1);
  cc.a1 = relu(h1n);
  cc.h2 = conv1d(cc.a1, k2, 1, pad);
  Tensor h2n = batch_norm1d(cc.h2, g2, b2, train, s2, &cc.bn2);
  cc.sum = h2n;
  for (size_t i = 0; i < cc.sum.data.size(); ++i) cc.sum.data[i] += x.data[i];
  return relu(cc.sum);
}

ResBlockGrads residual_block1d_backward(const Tensor& dy, const ResBlockCache& cache,
                                        const Tensor& k1, const Tensor& k2, const Tensor& g1,
                                        const Tensor& g2, Pad pad) {
  ResBlockGrads out;
  Tensor dsum = relu_backward(cache.sum, dy);
  BnGrads bg2 = batch_norm1d_backward(dsum, cache.bn2, g2);
  out.dg2 = std::move(bg2.dgamma);
  out.db2 = std::move(bg2.dbeta);
  ConvGrads cg2 = conv1d_backward(cache.a1, k2, 1, pad, bg2.dx);
  out.dk2 = std::move(cg2.dk);
  // relu mask from a1: a1 > 0 iff its pre-activation was > 0
  Tensor da1 = relu_backward(cache.a1, cg2.dx);
  BnGrads bg1 = batch_norm1d_backward(da1, cache.bn1, g1);
  out.dg1 = std::move(bg1.dgamma);
  out.db1 = std::move(bg1.dbeta);
  ConvGrads cg1 = conv1d_backward(cache.x, k1, 1, pad, bg1.dx);
  out.dk1 = std::move(cg1.dk);
  out.dx = std::move(cg1.dx);
  for (size_t i = 0; i < out.dx.data.size(); ++i) out.dx.data[i] += dsum.data[i];
  return out;
}

SoftmaxLoss softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  require(logits.rank() == 2, "softmax_cross_entropy: expected [B,K]");
  int B = logits.shape[0], K = logits.shape[1];
  require(static_cast<int>(labels.size()) == B, "softmax_cross_entropy: label count");
  SoftmaxLoss out;
  out.probs = Tensor::zeros({B, K});
  out.grad = Tensor::zeros({B, K});
  double total = 0.0;
  for (int b = 0; b < B; ++b) {
    int y = labels[b];
    require(y >= 0 && y < K, "softmax_cross_entropy: label out of range");
    double mx = logits.at2(b, 0);
    for (int k = 1; k < K; ++k) mx = std::max(mx, logits.at2(b, k));
    double z = 0.0;
    for (int k = 0; k < K; ++k) z += std::exp(logits.at2(b, k) - mx);
    double logz = std::log(z) + mx;
    for (int k = 0; k < K; ++k) {
      double p = std::exp(logits.at2(b, k) - logz);
      out.probs.at2(b, k) = p;
      out.grad.at2(b, k) = (p - (k == y ? 1.0 : 0.0)) / B;
    }
    total += logz - logits.at2(b, y);
  }
  out.loss = total / B;
  return out;
}

void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    require(g.data.size() == p.data.size(), "adam_step: gradient shape mismatch");
    Tensor& m = state.m.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    for (size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
      v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      p.data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

void sgd_step(ParamMap& params, const ParamMap& grads, double lr) {
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * git->second.data[i];
  }
}

Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
  return t;
}

double grad_check(const std::function<std::pair<double, ParamMap>(const ParamMap&)>& f,
                  const ParamMap& params, double eps) {
  auto [loss0, analytic] = f(params);
  (void)loss0;
  double worst = 0.0;
  for (const auto& [name, p] : params) {
    auto ait = analytic.find(name);
    for (size_t i = 0; i < p.data.size(); ++i) {
      ParamMap plus = params;
      ParamMap minus = params;
      plus[name].data[i] += eps;
      minus[name].data[i] -= eps;
      double num = (f(plus).first - f(minus).first) / (2.0 * eps);
      double ana = ait != analytic.end() ? ait->second.data[i] : 0.0;
      double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace polyenc::nn
