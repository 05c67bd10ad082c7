#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "polyenc/geometry.hpp"

namespace polyenc {

// 2-simplex mesh produced by the auxiliary-node conversion. One simplex per
// boundary edge; the third vertex of every simplex is the origin, stored as
// the last row of `vertices`.
struct SimplexMesh {
  std::vector<Point2> vertices;              // m+1 rows, last is (0,0)
  std::vector<std::array<int, 3>> simplices; // m rows, third index == m
  std::vector<double> density;               // m rows, ones by default
  int j = 2;

  int size() const { return static_cast<int>(simplices.size()); }
};

// One simplex per edge, in ring traversal order, exterior before holes,
// parts in stored order. Expects a valid geometry already normalized into
// [0,2]^2 (see normalize_unit with nuft_space).
SimplexMesh to_simplex_mesh(const PolyGeom& g);

// det of the 2x2 matrix whose rows are the simplex's two non-origin
// vertices; the signed content distortion factor.
double signed_content_factor(const SimplexMesh& mesh, int n);

// sum_n density_n * det_n / 2; equals the source geometry's area.
double mesh_signed_area(const SimplexMesh& mesh);

// Debug dump of (V, E, D) as CSV triplets.
void dump_mesh_csv(const SimplexMesh& mesh, std::ostream& os);

}  // namespace polyenc
