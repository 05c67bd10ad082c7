#include "polyenc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>

#include "polyenc/error.hpp"

namespace polyenc {

namespace {

constexpr double kDegenerateDet = 1e-12;
constexpr double kConfluentGap = 0.5;  // below this, evaluate by series

int half_count(int n_wx) { return n_wx / 2; }

}  // namespace

FrequencyMap linear_grid(int n_wx) {
  if (n_wx < 2) fail(Errc::domain, "linear_grid: N_wx must be at least 2");
  FrequencyMap map;
  map.kind = GridKind::linear;
  map.n_wx = n_wx;
  int u = half_count(n_wx);
  int x_hi = (n_wx % 2 == 1) ? u : u - 1;
  for (int v = -u; v <= x_hi; ++v) map.wx.push_back(static_cast<double>(v));
  map.n_wy = u + 1;
  for (int v = 0; v <= u; ++v) map.wy.push_back(static_cast<double>(v));
  for (double x : map.wx)
    for (double y : map.wy) map.freqs.push_back({x, y});
  return map;
}

FrequencyMap geometric_grid(int n_wx, double w_min, double w_max) {
  if (n_wx < 3) fail(Errc::domain, "geometric_grid: N_wx must be at least 3");
  if (!(w_min > 0.0) || !(w_max > w_min))
    fail(Errc::domain, "geometric_grid: need 0 < w_min < w_max");

  FrequencyMap map;
  map.kind = GridKind::geometric;
  map.n_wx = n_wx;
  map.w_min = w_min;
  map.w_max = w_max;

  int u = (n_wx % 2 == 1) ? (n_wx - 1) / 2 : n_wx / 2;
  double ratio = w_max / w_min;
  std::vector<double> series(u);
  for (int i = 0; i < u; ++i)
    series[i] = (u == 1) ? w_min : w_min * std::pow(ratio, static_cast<double>(i) / (u - 1));

  int pos_count = (n_wx % 2 == 1) ? u : u - 1;
  for (int i = u - 1; i >= 0; --i) map.wx.push_back(-series[i]);
  map.wx.push_back(0.0);
  for (int i = 0; i < pos_count; ++i) map.wx.push_back(series[i]);

  map.n_wy = u + 1;
  map.wy.push_back(0.0);
  for (int i = 0; i < u; ++i) map.wy.push_back(series[i]);

  for (double x : map.wx)
    for (double y : map.wy) map.freqs.push_back({x, y});
  return map;
}

namespace {

// Second divided difference of f(s) = exp(-i s) over three phase nodes,
// uniformly accurate across confluent configurations. The per-simplex NUFT is
// -det * dd2(phases).
std::complex<double> dd2_expneg(double s1, double s2, double s3) {
  const std::complex<double> I(0.0, 1.0);

  double g12 = std::abs(s1 - s2);
  double g13 = std::abs(s1 - s3);
  double g23 = std::abs(s2 - s3);
  double gmax = std::max({g12, g13, g23});

  if (gmax < kConfluentGap) {
    // series around the node mean via complete homogeneous symmetric
    // polynomials: f[x1,x2,x3] = sum_k f^(k+2)(c)/(k+2)! * h_k(deltas)
    double c = (s1 + s2 + s3) / 3.0;
    double d1 = s1 - c, d2 = s2 - c, d3 = s3 - c;
    // power sums
    constexpr int kMaxTerms = 26;
    double p[kMaxTerms + 1];
    p[0] = 3.0;
    double a = 1.0, b = 1.0, e = 1.0;
    for (int j = 1; j <= kMaxTerms; ++j) {
      a *= d1;
      b *= d2;
      e *= d3;
      p[j] = a + b + e;
    }
    // Newton's identity: k h_k = sum_{j=1..k} p_j h_{k-j}
    double h[kMaxTerms + 1];
    h[0] = 1.0;
    for (int k = 1; k <= kMaxTerms; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= k; ++j) acc += p[j] * h[k - j];
      h[k] = acc / k;
    }
    std::complex<double> sum(0.0, 0.0);
    double fact = 2.0;  // (k+2)! starting at k=0
    for (int k = 0; k <= kMaxTerms; ++k) {
      if (k > 0) fact *= (k + 2);
      // (-i)^(k+2)
      static const std::complex<double> cyc[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
      std::complex<double> term = cyc[(k + 2) % 4] * (h[k] / fact);
      sum += term;
      if (std::abs(h[k]) / fact < 1e-18) break;
    }
    return std::exp(-I * c) * sum;
  }

  // First divided difference in a cancellation-free form:
  // f[x,y] = -i * exp(-i (x+y)/2) * sinc((x-y)/2)
  auto dd1 = [&](double x, double y) {
    double m = 0.5 * (x + y);
    double h = 0.5 * (x - y);
    double sinc = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
    return -I * std::exp(-I * m) * sinc;
  };

  // divide across the widest pair
  double a, b, c;
  if (g13 >= g12 && g13 >= g23) {
    a = s1; b = s2; c = s3;
  } else if (g12 >= g23) {
    a = s1; b = s3; c = s2;
  } else {
    a = s2; b = s1; c = s3;
  }
  return (dd1(a, b) - dd1(b, c)) / (a - c);
}

}  // namespace

SpectralVector nuft(const SimplexMesh& mesh, std::shared_ptr<const FrequencyMap> map,
                    double freq_scale) {
  if (!map) fail(Errc::domain, "nuft: null frequency map");
  for (const auto& v : mesh.vertices) {
    if (v.x < -1e-9 || v.x > 2.0 + 1e-9 || v.y < -1e-9 || v.y > 2.0 + 1e-9)
      fail(Errc::domain, "nuft: coordinate outside [0,2]^2");
  }

  int m = mesh.size();
  std::vector<double> dets(m);
  for (int n = 0; n < m; ++n) dets[n] = signed_content_factor(mesh, n);

  SpectralVector out;
  out.map = std::move(map);
  out.values.assign(out.map->size(), {0.0, 0.0});

  for (int k = 0; k < out.map->size(); ++k) {
    double wx = out.map->freqs[k][0] * freq_scale;
    double wy = out.map->freqs[k][1] * freq_scale;
    std::complex<double> acc(0.0, 0.0);
    for (int n = 0; n < m; ++n) {
      if (std::abs(dets[n]) < kDegenerateDet) continue;
      const Point2& a = mesh.vertices[mesh.simplices[n][0]];
      const Point2& b = mesh.vertices[mesh.simplices[n][1]];
      double s1 = wx * a.x + wy * a.y;
      double s2 = wx * b.x + wy * b.y;
      acc += (mesh.density[n] * -dets[n]) * dd2_expneg(s1, s2, 0.0);
    }
    out.values[k] = acc;
  }
  return out;
}

std::vector<double> flatten_spectrum(const SpectralVector& spec, SpectrumNorm mode) {
  std::vector<double> out;
  out.reserve(2 * spec.values.size());
  for (const auto& v : spec.values) {
    out.push_back(v.real());
    out.push_back(v.imag());
  }
  if (mode == SpectrumNorm::l2) {
    double n2 = 0.0;
    for (double v : out) n2 += v * v;
    double n = std::sqrt(n2);
    if (n < 1e-15) fail(Errc::domain, "flatten_spectrum: l2 on an all-zero spectrum");
    for (double& v : out) v /= n;
  }
  return out;
}

RasterImage ifft_rasterize(const SpectralVector& spec, int side) {
  if (!spec.map) fail(Errc::domain, "ifft_rasterize: spectrum without a frequency map");
  if (spec.map->kind != GridKind::linear)
    fail(Errc::domain, "ifft_rasterize: inverse DFT needs a linear frequency map");
  if (side < spec.map->n_wx)
    fail(Errc::domain, "ifft_rasterize: side below N_wx");

  RasterImage img;
  img.height = img.width = side;
  img.pixels.assign(static_cast<size_t>(side) * side, 0.0);

  const std::complex<double> I(0.0, 1.0);
  for (int row = 0; row < side; ++row) {
    double py = (row + 0.5) * 2.0 / side;
    for (int col = 0; col < side; ++col) {
      double px = (col + 0.5) * 2.0 / side;
      std::complex<double> acc(0.0, 0.0);
      for (int k = 0; k < spec.size(); ++k) {
        double nx = spec.map->freqs[k][0];
        double ny = spec.map->freqs[k][1];
        double phase = kRasterFreqUnit * (nx * px + ny * py);
        std::complex<double> e = std::exp(I * phase);
        acc += spec.values[k] * e;
        if (ny > 0.0) acc += std::conj(spec.values[k]) * std::conj(e);
      }
      img.at(row, col) = 0.25 * acc.real();
    }
  }
  return img;
}

PcaModel pca_fit(const std::vector<std::vector<double>>& rows, double var_target) {
  if (rows.size() < 2) fail(Errc::domain, "pca_fit: need at least 2 rows");
  if (!(var_target > 0.0) || var_target > 1.0)
    fail(Errc::domain, "pca_fit: var_target must be in (0, 1]");
  size_t n = rows.size();
  size_t dim = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != dim) fail(Errc::domain, "pca_fit: ragged row widths");

  Eigen::MatrixXd X(n, dim);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < dim; ++j) X(i, j) = rows[i][j];
  Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) fail(Errc::internal, "pca_fit: eigensolver failed");
  Eigen::VectorXd evals = solver.eigenvalues();    // ascending
  Eigen::MatrixXd evecs = solver.eigenvectors();   // columns

  double total = 0.0;
  for (int i = 0; i < evals.size(); ++i) total += std::max(0.0, evals(i));

  PcaModel model;
  model.var_target = var_target;
  model.mean.assign(mean.data(), mean.data() + dim);

  int d = static_cast<int>(dim);
  int k = 0;
  double cum = 0.0;
  for (int i = d - 1; i >= 0; --i) {
    double ev = std::max(0.0, evals(i));
    model.explained_variance.push_back(ev);
    std::vector<double> comp(dim);
    for (size_t j = 0; j < dim; ++j) comp[j] = evecs(j, i);
    model.components.push_back(std::move(comp));
    cum += ev;
    ++k;
    if (total <= 0.0 || cum >= var_target * total - 1e-12 * total) break;
  }
  (void)k;
  return model;
}

std::vector<double> pca_project(const PcaModel& model, std::span<const double> v) {
  if (static_cast<int>(v.size()) != model.dim())
    fail(Errc::domain, "pca_project: dimension mismatch");
  std::vector<double> out(model.k(), 0.0);
  for (int i = 0; i < model.k(); ++i) {
    double acc = 0.0;
    const auto& comp = model.components[i];
    for (int j = 0; j < model.dim(); ++j) acc += comp[j] * (v[j] - model.mean[j]);
    out[i] = acc;
  }
  return out;
}

void export_spectrum_csv(const SpectralVector& spec, std::ostream& os) {
  os << "index,w_x,w_y,re,im\n";
  for (int k = 0; k < spec.size(); ++k)
    os << k << ',' << spec.map->freqs[k][0] << ',' << spec.map->freqs[k][1] << ','
       << spec.values[k].real() << ',' << spec.values[k].imag() << '\n';
}

}  // namespace polyenc
