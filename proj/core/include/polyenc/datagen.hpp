#pragma once

#include <string>
#include <vector>

#include "polyenc/geometry.hpp"

namespace polyenc {

// N_r = 9 relation inventory.
enum class RelationLabel {
  isPartOf,
  north,
  east,
  south,
  west,
  northwest,
  northeast,
  southwest,
  southeast,
};
inline constexpr int kNumRelations = 9;

const char* relation_name(RelationLabel r);
RelationLabel relation_from_name(const std::string& name);

struct ShapeSample {
  std::string id;
  int label = 0;
  PolyGeom geom;
};

struct RelationSample {
  std::string id;
  PolyGeom subject;
  PolyGeom object;
  RelationLabel relation = RelationLabel::isPartOf;
  bool sliver = false;
};

inline constexpr int kNumShapeClasses = 5;
const char* shape_class_name(int label);

// 5 procedural classes: (0) convex blob, (1) star, (2) annulus,
// (3) two-part multipolygon, (4) C-shape. Each instance randomly rotated,
// scaled and jittered; rings resampled so the total vertex count equals
// vertex_budget. Deterministic in seed, class-balanced, grouped by index
// (sample i of class c sits at position i*5+c).
std::vector<ShapeSample> gen_shape_dataset(int n_per_class, int vertex_budget,
                                           std::uint64_t seed);

// isPartOf pairs place a shrunk polygon strictly inside another; directional
// pairs are disjoint with the subject centroid in the labeled 45-degree
// sector at >= 5 degrees from the sector boundaries. A sliver_fraction of the
// isPartOf pairs (exact count round(fraction*n)) goes through sliver_perturb
// while keeping the isPartOf label. Ring origins are randomized.
std::vector<RelationSample> gen_relation_dataset(int n_per_relation, double sliver_fraction,
                                                 int vertex_budget, std::uint64_t seed);

// Displaces 1-3 subject vertices nearest to the object boundary outward so
// the result crosses it (verified, retried with a larger displacement when
// needed). The output stays a valid simple ring.
PolyGeom sliver_perturb(const PolyGeom& g_sub, const PolyGeom& g_obj, double magnitude,
                        Rng& rng);

// Distributes a total vertex budget over rings proportionally to perimeter
// (largest remainder) and resamples each ring.
PolyGeom resample_geometry(const PolyGeom& g, int vertex_budget);

}  // namespace polyenc
