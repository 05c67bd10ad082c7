#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "polyenc/simplex.hpp"

namespace polyenc {

enum class GridKind { linear, geometric };

// Ordered set of 2D Fourier frequencies, row-major over W_x x W_y.
struct FrequencyMap {
  GridKind kind = GridKind::linear;
  int n_wx = 0;
  int n_wy = 0;
  double w_min = 0.0;  // geometric only
  double w_max = 0.0;  // geometric only
  std::vector<double> wx;  // X-axis frequency set, ascending
  std::vector<double> wy;  // Y-axis frequency set, ascending
  std::vector<std::array<double, 2>> freqs;

  int size() const { return static_cast<int>(freqs.size()); }
};

// Integer frequency grid: W_x = {-U..U} (odd N_wx) or {-U..U-1} (even),
// W_y = {0..U} with N_wy = floor(N_wx/2)+1.
FrequencyMap linear_grid(int n_wx);

// Geometric series w_min * (w_max/w_min)^(u/(U-1)) for the positive axis,
// zero included, negatives mirrored on X.
FrequencyMap geometric_grid(int n_wx, double w_min, double w_max);

struct SpectralVector {
  std::vector<std::complex<double>> values;
  std::shared_ptr<const FrequencyMap> map;

  int size() const { return static_cast<int>(values.size()); }
};

// Non-uniform Fourier transform of the mesh's piecewise-constant function at
// every map frequency, evaluated per simplex in closed form. Simplices with
// |det| < 1e-12 contribute exactly zero; the zero frequency yields the exact
// DC limit sum(density * det / 2). freq_scale multiplies every frequency at
// evaluation time (the rasterization pipeline uses pi, see ifft_rasterize).
SpectralVector nuft(const SimplexMesh& mesh, std::shared_ptr<const FrequencyMap> map,
                    double freq_scale = 1.0);

enum class SpectrumNorm { none, l2, batch_stats };

// [Re(F_1), Im(F_1), ..., Re(F_Nw), Im(F_Nw)] in map order. l2 divides by the
// Euclidean norm. batch_stats is a marker resolved by the training loop
// (per-feature standardization by training-set statistics); here it flattens
// like none.
std::vector<double> flatten_spectrum(const SpectralVector& spec, SpectrumNorm mode);

struct RasterImage {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;  // row-major

  double& at(int row, int col) { return pixels[row * width + col]; }
  double at(int row, int col) const { return pixels[row * width + col]; }
};

// Direct inverse DFT of a linear-grid spectrum onto pixel centers of [0,2]^2,
// with conjugate-symmetric completion of the half Y-plane. The map's integer
// pairs are mode numbers of the period-2 square, so the matching analysis
// frequencies are pi * n (nuft with freq_scale = pi). Rejects geometric maps.
RasterImage ifft_rasterize(const SpectralVector& spec, int side);

// Angular frequency per integer mode on the [0,2]^2 domain.
inline constexpr double kRasterFreqUnit = 3.14159265358979323846;

struct PcaModel {
  std::vector<double> mean;                 // dim
  std::vector<std::vector<double>> components;  // K rows, orthonormal
  std::vector<double> explained_variance;   // K, non-increasing
  double var_target = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }
  int k() const { return static_cast<int>(components.size()); }
};

// Mean-centered eigendecomposition of the sample covariance; keeps the
// smallest component count whose cumulative explained-variance ratio reaches
// var_target.
PcaModel pca_fit(const std::vector<std::vector<double>>& rows, double var_target);

std::vector<double> pca_project(const PcaModel& model, std::span<const double> v);

// CSV rows: index, w_x, w_y, re, im.
void export_spectrum_csv(const SpectralVector& spec, std::ostream& os);

}  // namespace polyenc
