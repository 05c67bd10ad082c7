#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "polyenc/error.hpp"
#include "polyenc/geometry.hpp"
#include "polyenc/wkt.hpp"
#include "test_util.hpp"

using namespace polyenc;
using testutil::ring;
using testutil::simple;

TEST_CASE("parse_wkt basic polygon") {
  PolyGeom g = parse_wkt("POLYGON((0 0,2 0,2 2,0 2))");
  CHECK(g.parts.size() == 1);
  CHECK(g.parts[0].exterior.size() == 4);
  CHECK(g.parts[0].holes.empty());
  CHECK(ring_signed_area(g.parts[0].exterior) == doctest::Approx(4.0));
}

TEST_CASE("parse_wkt multipolygon") {
  PolyGeom g = parse_wkt("MULTIPOLYGON(((0 0,1 0,0 1)),((2 2,3 2,2 3)))");
  CHECK(g.parts.size() == 2);
  CHECK(g.parts[0].exterior.size() == 3);
  CHECK(g.parts[1].exterior.size() == 3);
}

TEST_CASE("parse_wkt reports syntax errors with byte offsets") {
  CHECK_THROWS_WITH_AS(parse_wkt("POLYGON((0 0,1 0)"),
                       doctest::Contains("byte offset"), Error);
  CHECK_THROWS_AS(parse_wkt("LINESTRING(0 0,1 1)"), Error);
  CHECK_THROWS_AS(parse_wkt("POLYGON((0 0,1 0))"), Error);  // degenerate ring
}

TEST_CASE("parse_wkt enforces orientation and drops closing vertex") {
  // clockwise input with duplicate closing vertex
  PolyGeom g = parse_wkt("POLYGON((0 0,0 1,1 1,1 0,0 0))");
  CHECK(g.parts[0].exterior.size() == 4);
  CHECK(ring_signed_area(g.parts[0].exterior) > 0);
}

TEST_CASE("serialize_wkt examples") {
  CHECK(serialize_wkt(testutil::unit_square()) == "POLYGON((0 0,1 0,1 1,0 1))");
  PolyGeom two = parse_wkt("MULTIPOLYGON(((0 0,1 0,0 1)),((2 2,3 2,2 3)))");
  CHECK(serialize_wkt(two).rfind("MULTIPOLYGON(((", 0) == 0);
}

TEST_CASE("wkt round-trip is the identity on random geometries") {
  Rng rng(42);
  for (int i = 0; i < 40; ++i) {
    PolyGeom g = enforce_orientation(testutil::random_geometry(rng));
    REQUIRE(validate(g).ok());
    PolyGeom back = parse_wkt(serialize_wkt(g));
    REQUIRE(back.parts.size() == g.parts.size());
    for (size_t p = 0; p < g.parts.size(); ++p) {
      REQUIRE(back.parts[p].exterior.pts == g.parts[p].exterior.pts);
      REQUIRE(back.parts[p].holes.size() == g.parts[p].holes.size());
      for (size_t h = 0; h < g.parts[p].holes.size(); ++h)
        REQUIRE(back.parts[p].holes[h].pts == g.parts[p].holes[h].pts);
    }
  }
}

TEST_CASE("geojson reader") {
  PolyGeom g = parse_geojson(R"({"type":"Polygon","coordinates":[[[0,0],[2,0],[2,2],[0,2],[0,0]]]})");
  CHECK(geometry_area(g) == doctest::Approx(4.0));
  CHECK_THROWS_AS(parse_geojson(R"({"type":"Point","coordinates":[0,0]})"), Error);
}

TEST_CASE("ring_signed_area") {
  Ring r = ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(ring_signed_area(r) == doctest::Approx(1.0));
  std::reverse(r.pts.begin(), r.pts.end());
  CHECK(ring_signed_area(r) == doctest::Approx(-1.0));
  CHECK(ring_signed_area(ring({{0, 0}, {2, 0}, {0, 2}})) == doctest::Approx(2.0));
}

TEST_CASE("geometry_area") {
  CHECK(geometry_area(parse_wkt("POLYGON((0 0,2 0,2 2,0 2))")) == doctest::Approx(4.0));
  CHECK(geometry_area(testutil::square_with_hole()) == doctest::Approx(3.0));
  CHECK(geometry_area(parse_wkt("MULTIPOLYGON(((0 0,1 0,1 1,0 1)),((3 3,4 3,4 4,3 4)))")) ==
        doctest::Approx(2.0));
}

TEST_CASE("enforce_orientation") {
  PolyGeom g;
  g.parts.emplace_back();
  g.parts[0].exterior = ring({{0, 0}, {0, 1}, {1, 1}, {1, 0}});  // clockwise
  g.parts[0].holes.push_back(ring({{0.2, 0.2}, {0.4, 0.2}, {0.4, 0.4}, {0.2, 0.4}}));  // ccw
  PolyGeom fixed = enforce_orientation(g);
  CHECK(ring_signed_area(fixed.parts[0].exterior) > 0);
  CHECK(ring_signed_area(fixed.parts[0].holes[0]) < 0);
  // idempotent
  PolyGeom again = enforce_orientation(fixed);
  CHECK(again.parts[0].exterior.pts == fixed.parts[0].exterior.pts);
  CHECK(again.parts[0].holes[0].pts == fixed.parts[0].holes[0].pts);
}

TEST_CASE("point_in_polygon basics") {
  PolyGeom sq = testutil::unit_square();
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({5, 5}, sq));
  CHECK(point_in_polygon({0.0, 0.5}, sq));  // boundary counts as inside
  PolyGeom holed = testutil::square_with_hole();
  CHECK_FALSE(point_in_polygon({1, 1}, holed));
  CHECK(point_in_polygon({0.25, 0.25}, holed));
  CHECK(point_in_polygon({0.5, 1.0}, holed));  // hole boundary is boundary
}

namespace {

// independent even-odd oracle over all segments at once
bool raster_oracle_inside(Point2 p, const PolyGeom& g) {
  int crossings = 0;
  auto scan = [&](const Ring& r) {
    int n = r.size();
    for (int i = 0; i < n; ++i) {
      Point2 a = r.pts[i], b = r.pts[(i + 1) % n];
      if ((a.y > p.y) != (b.y > p.y)) {
        double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) ++crossings;
      }
    }
  };
  for (const auto& part : g.parts) {
    scan(part.exterior);
    for (const auto& h : part.holes) scan(h);
  }
  return crossings % 2 == 1;
}

}  // namespace

TEST_CASE("point_in_polygon agrees with a raster oracle on random geometries") {
  Rng rng(7);
  for (int gi = 0; gi < 100; ++gi) {
    PolyGeom g = enforce_orientation(testutil::random_geometry(rng));
    REQUIRE(validate(g).ok());
    auto bb = bounding_box(g);
    double diag = norm(bb[1] - bb[0]);
    int grid = 200;
    int mismatches = 0;
    for (int iy = 0; iy < grid; iy += 7) {  // strided subsample keeps runtime low
      for (int ix = 0; ix < grid; ix += 7) {
        Point2 p{bb[0].x + (bb[1].x - bb[0].x) * (ix + 0.5) / grid,
                 bb[0].y + (bb[1].y - bb[0].y) * (iy + 0.5) / grid};
        if (distance_to_boundary(p, g) < 1e-6 * diag) continue;  // interior points only
        if (point_in_polygon(p, g) != raster_oracle_inside(p, g)) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("normalize_unit single geometry") {
  PolyGeom sq = simple({{10, 10}, {14, 10}, {14, 14}, {10, 14}});
  auto [out, tf] = normalize_unit({sq}, NormalizeTarget::nuft_space);
  auto bb = bounding_box(out[0]);
  CHECK(bb[0].x == doctest::Approx(0.0));
  CHECK(bb[0].y == doctest::Approx(0.0));
  CHECK(bb[1].x == doctest::Approx(2.0));
  CHECK(bb[1].y == doctest::Approx(2.0));
  CHECK(tf.scale == doctest::Approx(0.5));
}

TEST_CASE("normalize_unit scales isotropically by the longer axis") {
  PolyGeom rect = simple({{0, 0}, {4, 0}, {4, 2}, {0, 2}});
  auto [out, tf] = normalize_unit({rect}, NormalizeTarget::nuft_space);
  (void)tf;
  auto bb = bounding_box(out[0]);
  CHECK(bb[0].x == doctest::Approx(0.0));
  CHECK(bb[1].x == doctest::Approx(2.0));
  CHECK(bb[0].y == doctest::Approx(0.5));
  CHECK(bb[1].y == doctest::Approx(1.5));
}

TEST_CASE("normalize_unit pair mode shares one transform") {
  PolyGeom big = simple({{0, 0}, {8, 0}, {8, 8}, {0, 8}});
  PolyGeom tiny = simple({{3, 3}, {4, 3}, {4, 4}, {3, 4}});
  auto [out, tf] = normalize_unit({big, tiny}, NormalizeTarget::nuft_space);
  (void)tf;
  // containment preserved under the shared transform
  Point2 c = centroid(out[1]);
  CHECK(point_in_polygon(c, out[0]));
  auto bb = bounding_box(std::vector<PolyGeom>{out[0], out[1]});
  CHECK(bb[0].x == doctest::Approx(0.0));
  CHECK(bb[1].x == doctest::Approx(2.0));
}

TEST_CASE("normalize_unit rejects degenerate input") {
  PolyGeom degenerate;
  degenerate.parts.emplace_back();
  degenerate.parts[0].exterior = ring({{1, 1}, {1, 1}, {1, 1}});
  CHECK_THROWS_AS(normalize_unit({degenerate}, NormalizeTarget::centered_unit), Error);
}

TEST_CASE("resample_ring midpoints and identity") {
  Ring sq = ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  Ring r8 = resample_ring(sq, 8);
  CHECK(r8.size() == 8);
  CHECK(ring_signed_area(r8) == doctest::Approx(1.0));
  CHECK(r8.pts[1].x == doctest::Approx(0.5));
  CHECK(r8.pts[1].y == doctest::Approx(0.0));
  Ring same = resample_ring(sq, 4);
  CHECK(same.pts == sq.pts);
  CHECK_THROWS_AS(resample_ring(sq, 3), Error);
}

TEST_CASE("resample_ring largest-remainder tie break goes to the lowest edges") {
  // 4 equal edges, 2 extras: quotas are all 0.5, so edges 0 and 1 win
  Ring sq = ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  Ring r6 = resample_ring(sq, 6);
  REQUIRE(r6.size() == 6);
  // expected: v0, mid01, v1, mid12, v2, v3
  CHECK(r6.pts[1].x == doctest::Approx(0.5));
  CHECK(r6.pts[1].y == doctest::Approx(0.0));
  CHECK(r6.pts[3].x == doctest::Approx(1.0));
  CHECK(r6.pts[3].y == doctest::Approx(0.5));
  CHECK(r6.pts[4].x == doctest::Approx(1.0));
  CHECK(r6.pts[4].y == doctest::Approx(1.0));
}

TEST_CASE("resample then collinear removal recovers the ring") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    PolyGeom g = enforce_orientation(testutil::random_star(rng, 10));
    Ring orig = g.parts[0].exterior;
    Ring up = resample_ring(orig, 10 + rng.uniform_int(1, 30));
    Ring back = remove_collinear_vertices(up, 1e-12);
    REQUIRE(back.size() == orig.size());
    // same cyclic sequence starting at orig.pts[0]
    int off = -1;
    for (int j = 0; j < back.size(); ++j)
      if (norm(back.pts[j] - orig.pts[0]) < 1e-13) off = j;
    REQUIRE(off >= 0);
    for (int j = 0; j < orig.size(); ++j)
      CHECK(norm(back.pts[(off + j) % back.size()] - orig.pts[j]) < 1e-12);
  }
}

TEST_CASE("simplify removes collinear midpoints") {
  Ring sq = ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  Ring up = resample_ring(sq, 8);
  PolyGeom g;
  g.parts.emplace_back();
  g.parts[0].exterior = up;
  PolyGeom s = simplify(g, 4);
  CHECK(s.vertex_count() == 4);
  CHECK(geometry_area(s) == doctest::Approx(1.0));
}

TEST_CASE("simplify keeps already-minimal rings") {
  PolyGeom tri = simple({{0, 0}, {2, 0}, {0, 2}});
  PolyGeom s = simplify(tri, 3);
  CHECK(s.parts[0].exterior.pts == tri.parts[0].exterior.pts);
  CHECK_THROWS_AS(simplify(tri, 2), Error);
}

TEST_CASE("simplify hits the vertex budget with bounded Hausdorff error") {
  // noisy circle, 64 vertices
  Rng rng(11);
  Ring circ;
  for (int i = 0; i < 64; ++i) {
    double a = 2.0 * M_PI * i / 64;
    double r = 1.0 + 0.05 * rng.uniform(-1.0, 1.0);
    circ.pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  PolyGeom g;
  g.parts.emplace_back();
  g.parts[0].exterior = circ;
  REQUIRE(validate(g).ok());
  PolyGeom s = simplify(g, 16);
  CHECK(s.vertex_count() <= 16);
  CHECK(validate(s).ok());
  // brute-force directed Hausdorff from input vertices to the simplified ring
  const Ring& sr = s.parts[0].exterior;
  double hausdorff = 0.0;
  for (const auto& p : circ.pts) {
    PolyGeom tmp;
    tmp.parts.emplace_back();
    tmp.parts[0].exterior = sr;
    hausdorff = std::max(hausdorff, distance_to_boundary(p, tmp));
  }
  CHECK(hausdorff < 0.35);  // well below the shape scale; DP keeps vertices on the input
}

TEST_CASE("loop_shift") {
  PolyGeom g = simple({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  PolyGeom shifted = loop_shift(g, 0, 0, 1);
  CHECK(shifted.parts[0].exterior.pts[0].x == doctest::Approx(1.0));
  CHECK(geometry_area(shifted) == doctest::Approx(geometry_area(g)));
  CHECK(loop_shift(g, 0, 0, 0).parts[0].exterior.pts == g.parts[0].exterior.pts);
  CHECK(loop_shift(g, 0, 0, 4).parts[0].exterior.pts == g.parts[0].exterior.pts);
  CHECK_THROWS_AS(loop_shift(g, 1, 0, 1), Error);
  CHECK_THROWS_AS(loop_shift(g, 0, 3, 1), Error);
}

TEST_CASE("loop_shift preserves area and vertex multiset on random geometries") {
  Rng rng(5);
  for (int i = 0; i < 25; ++i) {
    PolyGeom g = enforce_orientation(testutil::random_geometry(rng));
    int part = rng.uniform_int(0, static_cast<int>(g.parts.size()) - 1);
    int nring = 1 + static_cast<int>(g.parts[part].holes.size());
    int ring_i = rng.uniform_int(0, nring - 1);
    int len = ring_i == 0 ? g.parts[part].exterior.size()
                          : g.parts[part].holes[ring_i - 1].size();
    PolyGeom s = loop_shift(g, part, ring_i, rng.uniform_int(0, len - 1));
    CHECK(geometry_area(s) == geometry_area(g));  // exact: same summands reordered cyclically
    auto multiset_of = [](const PolyGeom& gg) {
      std::multiset<std::pair<double, double>> ms;
      for (const auto& part : gg.parts) {
        for (const auto& p : part.exterior.pts) ms.insert({p.x, p.y});
        for (const auto& h : part.holes)
          for (const auto& p : h.pts) ms.insert({p.x, p.y});
      }
      return ms;
    };
    CHECK(multiset_of(s) == multiset_of(g));
  }
}

TEST_CASE("insert_trivial_vertices") {
  PolyGeom sq = testutil::unit_square();
  Rng rng(42);
  CHECK(insert_trivial_vertices(sq, 0, rng).parts[0].exterior.pts == sq.parts[0].exterior.pts);
  Rng rng2(42);
  PolyGeom up = insert_trivial_vertices(sq, 4, rng2);
  CHECK(up.vertex_count() == 8);
  CHECK(geometry_area(up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(validate(up).ok());
}

TEST_CASE("insert_trivial_vertices is deterministic for a fixed seed") {
  PolyGeom tri = simple({{0, 0}, {3, 0}, {0, 3}});
  Rng a(42), b(42);
  CHECK(serialize_wkt(insert_trivial_vertices(tri, 7, a)) ==
        serialize_wkt(insert_trivial_vertices(tri, 7, b)));
}

TEST_CASE("insert_trivial_vertices preserves area and validity on random geometries") {
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    PolyGeom g = enforce_orientation(testutil::random_geometry(rng));
    double a0 = geometry_area(g);
    PolyGeom up = insert_trivial_vertices(g, 1 + rng.uniform_int(0, 20), rng);
    CHECK(std::abs(geometry_area(up) - a0) <= 1e-12 * std::abs(a0));
    CHECK(validate(up).ok());
  }
}

TEST_CASE("permute_parts") {
  PolyGeom g = parse_wkt("MULTIPOLYGON(((0 0,1 0,0 1)),((2 2,3 2,2 3)))");
  PolyGeom p = permute_parts(g, {1, 0});
  CHECK(p.parts[0].exterior.pts == g.parts[1].exterior.pts);
  CHECK(permute_parts(g, {0, 1}).parts[0].exterior.pts == g.parts[0].exterior.pts);
  CHECK_THROWS_AS(permute_parts(g, {0, 0}), Error);
  CHECK_THROWS_AS(permute_parts(g, {0}), Error);
}

TEST_CASE("holes_to_parts") {
  PolyGeom holed = testutil::square_with_hole();
  PolyGeom flat = holes_to_parts(holed);
  CHECK(flat.parts.size() == 2);
  CHECK(flat.parts[0].holes.empty());
  CHECK(geometry_area(holed) == doctest::Approx(3.0));
  CHECK(geometry_area(flat) == doctest::Approx(5.0));
  CHECK(flat.vertex_count() == holed.vertex_count());
  CHECK(validate(flat).ok());
  // hole-free input is unchanged
  PolyGeom sq = testutil::unit_square();
  CHECK(holes_to_parts(sq).parts[0].exterior.pts == sq.parts[0].exterior.pts);
}

TEST_CASE("holes_to_parts on a two-part geometry with one hole") {
  // {p0 with hole, p1} -> {p0'', p1, p2}
  PolyGeom g = testutil::square_with_hole();
  Polygon p1;
  p1.exterior = ring({{3, 0}, {4, 0}, {4, 1}, {3, 1}});
  g.parts.push_back(p1);
  PolyGeom out = holes_to_parts(g);
  REQUIRE(out.parts.size() == 3);
  CHECK(out.parts[0].holes.empty());
  CHECK(ring_signed_area(out.parts[2].exterior) > 0);  // former hole now CCW
  double hole_area = 1.0;
  CHECK(geometry_area(out) == doctest::Approx(geometry_area(g) + 2 * hole_area));
}

TEST_CASE("validate flags the documented violations") {
  CHECK(validate(testutil::unit_square()).ok());

  PolyGeom bowtie;
  bowtie.parts.emplace_back();
  bowtie.parts[0].exterior = ring({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  auto rep = validate(bowtie);
  bool has_self = false;
  for (const auto& issue : rep.issues) has_self |= issue.code == "self_intersection";
  CHECK(has_self);

  PolyGeom ccw_hole = testutil::square_with_hole();
  std::reverse(ccw_hole.parts[0].holes[0].pts.begin(), ccw_hole.parts[0].holes[0].pts.end());
  auto rep2 = validate(ccw_hole);
  bool has_orient = false;
  for (const auto& issue : rep2.issues) has_orient |= issue.code == "orientation";
  CHECK(has_orient);

  PolyGeom empty;
  CHECK_FALSE(validate(empty).ok());
}
