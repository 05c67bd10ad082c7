#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "polyenc/rng.hpp"

namespace polyenc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
};

double dot(Point2 a, Point2 b);
double cross(Point2 a, Point2 b);
double norm(Point2 a);

// Open linear ring: first point is not repeated at the end.
struct Ring {
  std::vector<Point2> pts;

  int size() const { return static_cast<int>(pts.size()); }
  double perimeter() const;
};

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
};

struct PolyGeom {
  std::vector<Polygon> parts;

  // Total vertex count over every ring; equals the edge count m.
  int vertex_count() const;
  int ring_count() const;
};

// p' = (p + translate_pre) * scale + translate_post
struct AffineTransform {
  double scale = 1.0;
  Point2 translate_pre{0.0, 0.0};
  Point2 translate_post{0.0, 0.0};

  Point2 apply(Point2 p) const {
    return {(p.x + translate_pre.x) * scale + translate_post.x,
            (p.y + translate_pre.y) * scale + translate_post.y};
  }
};

PolyGeom apply_transform(const PolyGeom& g, const AffineTransform& t);

struct ValidationIssue {
  std::string code;    // e.g. "orientation", "self_intersection"
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Shoelace area: positive for counterclockwise rings.
double ring_signed_area(const Ring& r);

// Sum over parts of exterior area minus hole areas. Positive for valid input.
double geometry_area(const PolyGeom& g);

// Area-weighted centroid (holes subtract).
Point2 centroid(const PolyGeom& g);

// {min, max} corners over every vertex.
std::array<Point2, 2> bounding_box(const PolyGeom& g);
std::array<Point2, 2> bounding_box(const std::vector<PolyGeom>& gs);

// Reverses rings as needed: exteriors counterclockwise, holes clockwise.
PolyGeom enforce_orientation(PolyGeom g);

// Boundary points count as inside.
bool point_in_polygon(Point2 p, const PolyGeom& g);

// Distance from p to the closest boundary segment of g.
double distance_to_boundary(Point2 p, const PolyGeom& g);

enum class NormalizeTarget { centered_unit, nuft_space };

// One shared transform from the joint bounding box: centered at the origin,
// isotropic scale so the larger half-extent becomes 1. nuft_space adds a
// (+1,+1) translation into [0,2]^2.
std::pair<std::vector<PolyGeom>, AffineTransform> normalize_unit(
    const std::vector<PolyGeom>& gs, NormalizeTarget target);

// Upsamples to exactly n vertices, keeping every original vertex. Extra
// vertices go to edges by largest-remainder over edge length, equally spaced
// within each edge. Ties break toward the lowest edge index.
Ring resample_ring(const Ring& r, int n);

// Douglas-Peucker per ring, tolerance found by bisection so the total vertex
// count is <= n_target while the result stays valid.
PolyGeom simplify(const PolyGeom& g, int n_target);

// Rotates the addressed ring's vertex list left by s (mod ring length).
// ring 0 is the exterior, ring 1..H the holes.
PolyGeom loop_shift(const PolyGeom& g, int part, int ring, int s);

// Inserts k vertices at random positions along random edges, weighted by
// edge length. The enclosed region is unchanged.
PolyGeom insert_trivial_vertices(const PolyGeom& g, int k, Rng& rng);

PolyGeom permute_parts(const PolyGeom& g, const std::vector<int>& perm);

// Every hole becomes a new hole-free part with its ring reversed to CCW.
PolyGeom holes_to_parts(const PolyGeom& g);

ValidationReport validate(const PolyGeom& g);

// Drops vertices collinear with their neighbours within tol (perpendicular
// distance). Helper for the resample round-trip property.
Ring remove_collinear_vertices(const Ring& r, double tol);

}  // namespace polyenc
