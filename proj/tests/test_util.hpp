#pragma once

#include <cmath>
#include <vector>

#include "polyenc/geometry.hpp"
#include "polyenc/rng.hpp"

// Small geometry builders for tests. Kept independent of the datagen module
// so module tests do not lean on the code under test elsewhere.
namespace testutil {

inline polyenc::Ring ring(std::initializer_list<std::pair<double, double>> pts) {
  polyenc::Ring r;
  for (auto [x, y] : pts) r.pts.push_back({x, y});
  return r;
}

inline polyenc::PolyGeom simple(std::initializer_list<std::pair<double, double>> pts) {
  polyenc::PolyGeom g;
  g.parts.emplace_back();
  g.parts[0].exterior = ring(pts);
  return g;
}

inline polyenc::PolyGeom unit_square() {
  return simple({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

// square [0,2]^2 with the hole [0.5,1.5]^2 (hole clockwise)
inline polyenc::PolyGeom square_with_hole() {
  polyenc::PolyGeom g = simple({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  g.parts[0].holes.push_back(ring({{0.5, 0.5}, {0.5, 1.5}, {1.5, 1.5}, {1.5, 0.5}}));
  return g;
}

// star polygon with random radii; always simple
inline polyenc::PolyGeom random_star(polyenc::Rng& rng, int n = 12, double cx = 0.0,
                                     double cy = 0.0, double base_r = 1.0) {
  polyenc::Ring r;
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * 3.14159265358979323846 * i / n;
    double rad = base_r * rng.uniform(0.4, 1.0);
    r.pts.push_back({cx + rad * std::cos(a), cy + rad * std::sin(a)});
  }
  polyenc::PolyGeom g;
  g.parts.emplace_back();
  g.parts[0].exterior = r;
  return g;
}

// mix of simple / holed / multipart random geometries
inline polyenc::PolyGeom random_geometry(polyenc::Rng& rng) {
  int kind = rng.uniform_int(0, 2);
  if (kind == 0) return random_star(rng, rng.uniform_int(8, 24));
  if (kind == 1) {
    polyenc::PolyGeom g = random_star(rng, rng.uniform_int(10, 20));
    // concentric shrunk hole, reversed to clockwise
    polyenc::Ring h;
    double k = rng.uniform(0.25, 0.45);
    for (const auto& p : g.parts[0].exterior.pts) h.pts.push_back({p.x * k, p.y * k});
    std::reverse(h.pts.begin(), h.pts.end());
    g.parts[0].holes.push_back(h);
    return g;
  }
  polyenc::PolyGeom g = random_star(rng, rng.uniform_int(8, 16), -1.6, 0.0, 0.9);
  polyenc::PolyGeom b = random_star(rng, rng.uniform_int(8, 16), 1.6, 0.0, 0.9);
  g.parts.push_back(b.parts[0]);
  return g;
}

}  // namespace testutil
