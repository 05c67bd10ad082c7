#include "polyenc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "polyenc/error.hpp"

namespace polyenc {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

const char* relation_name(RelationLabel r) {
  switch (r) {
    case RelationLabel::isPartOf: return "isPartOf";
    case RelationLabel::north: return "north";
    case RelationLabel::east: return "east";
    case RelationLabel::south: return "south";
    case RelationLabel::west: return "west";
    case RelationLabel::northwest: return "northwest";
    case RelationLabel::northeast: return "northeast";
    case RelationLabel::southwest: return "southwest";
    case RelationLabel::southeast: return "southeast";
  }
  return "?";
}

RelationLabel relation_from_name(const std::string& name) {
  for (int i = 0; i < kNumRelations; ++i) {
    auto r = static_cast<RelationLabel>(i);
    if (name == relation_name(r)) return r;
  }
  fail(Errc::parse, "unknown relation '" + name + "'");
}

const char* shape_class_name(int label) {
  switch (label) {
    case 0: return "blob";
    case 1: return "star";
    case 2: return "annulus";
    case 3: return "twopart";
    case 4: return "cshape";
  }
  return "?";
}

namespace {

Ring make_blob_ring(Rng& rng, double radius, int n_dirs) {
  // points on jittered directions; convex hull keeps the ring simple and convex
  std::vector<Point2> pts;
  for (int i = 0; i < n_dirs; ++i) {
    double a = 2.0 * kPi * (i + rng.uniform(0.1, 0.9)) / n_dirs;
    double r = radius * rng.uniform(0.72, 1.0);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  // Andrew monotone chain
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<Point2> hull(2 * pts.size());
  int k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (int i = static_cast<int>(pts.size()) - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  Ring r;
  r.pts = std::move(hull);
  return r;
}

Ring make_radial_ring(Rng& rng, int n, double base_radius, double jitter) {
  Ring r;
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * kPi * i / n + rng.uniform(-0.25, 0.25) * 2.0 * kPi / n;
    double rad = base_radius * (1.0 + rng.uniform(-jitter, jitter));
    r.pts.push_back({rad * std::cos(a), rad * std::sin(a)});
  }
  return r;
}

Ring make_star_ring(Rng& rng, int spikes) {
  Ring r;
  double inner_frac = rng.uniform(0.33, 0.48);
  for (int i = 0; i < spikes; ++i) {
    double a1 = 2.0 * kPi * i / spikes;
    double a2 = a1 + kPi / spikes;
    double ro = 1.0 * (1.0 + rng.uniform(-0.08, 0.08));
    double ri = ro * inner_frac * (1.0 + rng.uniform(-0.1, 0.1));
    r.pts.push_back({ro * std::cos(a1), ro * std::sin(a1)});
    r.pts.push_back({ri * std::cos(a2), ri * std::sin(a2)});
  }
  return r;
}

Ring make_cshape_ring(Rng& rng) {
  double alpha = rng.uniform(0.35, 0.65);            // half opening angle
  double inner = rng.uniform(0.42, 0.58);            // inner radius
  int n_out = 16, n_in = 12;
  Ring r;
  for (int i = 0; i < n_out; ++i) {
    double a = alpha + (2.0 * kPi - 2.0 * alpha) * i / (n_out - 1);
    r.pts.push_back({std::cos(a), std::sin(a)});
  }
  for (int i = 0; i < n_in; ++i) {
    double a = (2.0 * kPi - alpha) - (2.0 * kPi - 2.0 * alpha) * i / (n_in - 1);
    r.pts.push_back({inner * std::cos(a), inner * std::sin(a)});
  }
  return r;
}

PolyGeom transform_place(PolyGeom g, double angle, double scale, Point2 shift) {
  double c = std::cos(angle), s = std::sin(angle);
  for (auto& part : g.parts) {
    auto rot = [&](Ring& r) {
      for (auto& p : r.pts)
        p = {scale * (c * p.x - s * p.y) + shift.x, scale * (s * p.x + c * p.y) + shift.y};
    };
    rot(part.exterior);
    for (auto& h : part.holes) rot(h);
  }
  return g;
}

// canonical loop origin: start each ring at its uppermost vertex
// (ties to the smaller x)
void canonicalize_origins(PolyGeom& g) {
  auto canon = [](Ring& r) {
    int best = 0;
    for (int i = 1; i < r.size(); ++i) {
      if (r.pts[i].y > r.pts[best].y ||
          (r.pts[i].y == r.pts[best].y && r.pts[i].x < r.pts[best].x))
        best = i;
    }
    std::rotate(r.pts.begin(), r.pts.begin() + best, r.pts.end());
  };
  for (auto& part : g.parts) {
    canon(part.exterior);
    for (auto& h : part.holes) canon(h);
  }
}

void randomize_origins(PolyGeom& g, Rng& rng) {
  auto shuffle = [&](Ring& r) {
    int s = rng.uniform_int(0, r.size() - 1);
    std::rotate(r.pts.begin(), r.pts.begin() + s, r.pts.end());
  };
  for (auto& part : g.parts) {
    shuffle(part.exterior);
    for (auto& h : part.holes) shuffle(h);
  }
}

PolyGeom make_class_shape(int label, Rng& rng) {
  PolyGeom g;
  switch (label) {
    case 0: {  // convex blob
      Polygon p;
      p.exterior = make_blob_ring(rng, 1.0, 16);
      g.parts.push_back(std::move(p));
      break;
    }
    case 1: {  // star with 5-8 spikes
      Polygon p;
      p.exterior = make_star_ring(rng, rng.uniform_int(5, 8));
      g.parts.push_back(std::move(p));
      break;
    }
    case 2: {  // annulus: one polygon with one hole
      Polygon p;
      p.exterior = make_radial_ring(rng, 18, 1.0, 0.07);
      Ring hole = make_radial_ring(rng, 12, rng.uniform(0.45, 0.6), 0.05);
      Point2 off{rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08)};
      for (auto& q : hole.pts) q = q + off;
      std::reverse(hole.pts.begin(), hole.pts.end());  // clockwise
      p.holes.push_back(std::move(hole));
      g.parts.push_back(std::move(p));
      break;
    }
    case 3: {  // two disjoint parts
      Polygon a, b;
      a.exterior = make_blob_ring(rng, 0.52, 12);
      b.exterior = make_blob_ring(rng, 0.58, 12);
      double dy1 = rng.uniform(-0.12, 0.12), dy2 = rng.uniform(-0.12, 0.12);
      for (auto& q : a.exterior.pts) q = q + Point2{-0.78, dy1};
      for (auto& q : b.exterior.pts) q = q + Point2{0.78, dy2};
      g.parts.push_back(std::move(a));
      g.parts.push_back(std::move(b));
      break;
    }
    case 4: {  // C-shape
      Polygon p;
      p.exterior = make_cshape_ring(rng);
      g.parts.push_back(std::move(p));
      break;
    }
    default:
      fail(Errc::internal, "make_class_shape: bad label");
  }
  double angle = rng.uniform(0.0, 2.0 * kPi);
  double scale = rng.uniform(0.8, 1.2);
  Point2 shift{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  g = transform_place(std::move(g), angle, scale, shift);
  return enforce_orientation(std::move(g));
}

}  // namespace

PolyGeom resample_geometry(const PolyGeom& g, int vertex_budget) {
  struct RingRef {
    int part;
    int ring;  // 0 exterior, 1.. holes
    double perim;
    int current;
  };
  std::vector<RingRef> refs;
  double total = 0.0;
  int current_total = 0;
  for (int pi = 0; pi < static_cast<int>(g.parts.size()); ++pi) {
    refs.push_back({pi, 0, g.parts[pi].exterior.perimeter(), g.parts[pi].exterior.size()});
    total += refs.back().perim;
    current_total += refs.back().current;
    for (int hi = 0; hi < static_cast<int>(g.parts[pi].holes.size()); ++hi) {
      refs.push_back({pi, hi + 1, g.parts[pi].holes[hi].perimeter(),
                      g.parts[pi].holes[hi].size()});
      total += refs.back().perim;
      current_total += refs.back().current;
    }
  }
  if (vertex_budget < current_total)
    fail(Errc::domain, "resample_geometry: budget below current vertex count");

  // proportional allocation with floors at the current ring sizes
  int n = static_cast<int>(refs.size());
  std::vector<int> alloc(n);
  std::vector<std::pair<double, int>> rem(n);
  int used = 0;
  for (int i = 0; i < n; ++i) {
    double quota = vertex_budget * refs[i].perim / total;
    alloc[i] = std::max(refs[i].current, static_cast<int>(std::floor(quota)));
    used += alloc[i];
    rem[i] = {quota - std::floor(quota), i};
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  int idx = 0;
  while (used < vertex_budget) {
    alloc[rem[idx % n].second] += 1;
    ++used;
    ++idx;
  }
  // over-allocation can only come from the floors; shave from the largest
  while (used > vertex_budget) {
    int best = -1;
    for (int i = 0; i < n; ++i)
      if (alloc[i] > refs[i].current && (best < 0 || alloc[i] > alloc[best])) best = i;
    if (best < 0) fail(Errc::domain, "resample_geometry: budget infeasible");
    alloc[best] -= 1;
    --used;
  }

  PolyGeom out = g;
  for (int i = 0; i < n; ++i) {
    Ring& r = refs[i].ring == 0 ? out.parts[refs[i].part].exterior
                                : out.parts[refs[i].part].holes[refs[i].ring - 1];
    r = resample_ring(r, alloc[i]);
  }
  return out;
}

std::vector<ShapeSample> gen_shape_dataset(int n_per_class, int vertex_budget,
                                           std::uint64_t seed) {
  if (n_per_class < 1) fail(Errc::domain, "gen_shape_dataset: n_per_class must be >= 1");
  Rng base(seed);
  std::vector<ShapeSample> out;
  out.reserve(static_cast<size_t>(n_per_class) * kNumShapeClasses);
  for (int i = 0; i < n_per_class; ++i) {
    for (int label = 0; label < kNumShapeClasses; ++label) {
      long long index = static_cast<long long>(i) * kNumShapeClasses + label;
      Rng rng = base.fork(static_cast<std::uint64_t>(index));
      PolyGeom g;
      for (int attempt = 0;; ++attempt) {
        g = make_class_shape(label, rng);
        if (validate(g).ok()) break;
        if (attempt > 32) fail(Errc::internal, "gen_shape_dataset: generator stuck");
      }
      canonicalize_origins(g);
      g = resample_geometry(g, vertex_budget);
      ShapeSample s;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "shape-%06lld", index);
      s.id = buf;
      s.label = label;
      s.geom = std::move(g);
      out.push_back(std::move(s));
    }
  }
  return out;
}

PolyGeom sliver_perturb(const PolyGeom& g_sub, const PolyGeom& g_obj, double magnitude,
                        Rng& rng) {
  if (!(magnitude > 0.0)) fail(Errc::domain, "sliver_perturb: magnitude must be positive");
  auto bb = bounding_box(g_obj);
  double diam = norm(bb[1] - bb[0]);

  // vertices of the subject sorted by clearance to the object boundary
  const Ring& ring = g_sub.parts[0].exterior;
  int m = ring.size();
  std::vector<std::pair<double, int>> order(m);
  for (int i = 0; i < m; ++i)
    order[i] = {distance_to_boundary(ring.pts[i], g_obj), i};
  std::stable_sort(order.begin(), order.end());

  int n_move = rng.uniform_int(1, 3);
  double boost = 1.0;
  for (int attempt = 0; attempt < 10; ++attempt, boost *= 1.5) {
    PolyGeom out = g_sub;
    Ring& r = out.parts[0].exterior;
    bool displaced = false;
    for (int j = 0; j < n_move && j < m; ++j) {
      int vi = order[j].second;
      Point2 v = ring.pts[vi];
      double clearance = order[j].first;
      // direction to the nearest object boundary point
      Point2 best_q = v;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& part : g_obj.parts) {
        auto scan = [&](const Ring& oring) {
          int n = oring.size();
          for (int e = 0; e < n; ++e) {
            Point2 a = oring.pts[e], b = oring.pts[(e + 1) % n];
            Point2 ab = b - a;
            double len2 = dot(ab, ab);
            double tpar = len2 > 0 ? std::clamp(dot(v - a, ab) / len2, 0.0, 1.0) : 0.0;
            Point2 q = a + ab * tpar;
            double d = norm(v - q);
            if (d < best_d) {
              best_d = d;
              best_q = q;
            }
          }
        };
        scan(part.exterior);
        for (const auto& h : part.holes) scan(h);
      }
      Point2 dir = best_q - v;
      double dn = norm(dir);
      if (dn < 1e-15) continue;
      dir = dir * (1.0 / dn);
      double overshoot = boost * (magnitude * clearance + magnitude * 0.01 * diam);
      r.pts[vi] = v + dir * (clearance + overshoot);
      displaced = true;
    }
    if (!displaced) continue;
    if (!validate(out).ok()) continue;
    // crossing check: at least one displaced vertex strictly outside
    bool crossed = false;
    for (int j = 0; j < n_move && j < m; ++j) {
      Point2 p = r.pts[order[j].second];
      if (!point_in_polygon(p, g_obj)) {
        crossed = true;
        break;
      }
    }
    if (crossed) return out;
  }
  fail(Errc::domain, "sliver_perturb: could not force a boundary crossing in 10 retries");
}

std::vector<RelationSample> gen_relation_dataset(int n_per_relation, double sliver_fraction,
                                                 int vertex_budget, std::uint64_t seed) {
  if (n_per_relation < 1) fail(Errc::domain, "gen_relation_dataset: need n >= 1");
  if (sliver_fraction < 0.0 || sliver_fraction > 1.0)
    fail(Errc::domain, "gen_relation_dataset: sliver_fraction outside [0,1]");

  Rng base(seed);
  int n_sliver = static_cast<int>(std::llround(sliver_fraction * n_per_relation));

  std::vector<RelationSample> out;
  out.reserve(static_cast<size_t>(n_per_relation) * kNumRelations);
  for (int i = 0; i < n_per_relation; ++i) {
    for (int ri = 0; ri < kNumRelations; ++ri) {
      long long index = static_cast<long long>(i) * kNumRelations + ri;
      Rng rng = base.fork(0x52454Cull ^ static_cast<std::uint64_t>(index));
      auto rel = static_cast<RelationLabel>(ri);

      RelationSample s;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "rel-%06lld", index);
      s.id = buf;
      s.relation = rel;

      PolyGeom obj;
      obj.parts.emplace_back();
      obj.parts[0].exterior = make_blob_ring(rng, rng.uniform(0.9, 1.2), 16);

      if (rel == RelationLabel::isPartOf) {
        // shrink a random blob and place it strictly inside with a small
        // clearance so sliver displacements stay local
        double frac = rng.uniform(0.28, 0.48);
        PolyGeom sub;
        sub.parts.emplace_back();
        for (int attempt = 0;; ++attempt) {
          sub.parts[0].exterior = make_blob_ring(rng, frac, 12);
          Point2 oc = centroid(obj);
          Point2 offset{rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45)};
          PolyGeom placed = sub;
          for (auto& q : placed.parts[0].exterior.pts) q = q + oc + offset;
          bool ok = true;
          double min_clear = std::numeric_limits<double>::infinity();
          for (const auto& q : placed.parts[0].exterior.pts) {
            if (!point_in_polygon(q, obj)) {
              ok = false;
              break;
            }
            min_clear = std::min(min_clear, distance_to_boundary(q, obj));
          }
          if (ok && min_clear > 0.015 && min_clear < 0.35) {
            sub = std::move(placed);
            break;
          }
          if (attempt > 60) {
            frac *= 0.9;
            if (frac < 0.1) fail(Errc::internal, "gen_relation_dataset: placement stuck");
          }
        }
        s.subject = resample_geometry(enforce_orientation(std::move(sub)), vertex_budget);
        s.object = resample_geometry(enforce_orientation(std::move(obj)), vertex_budget);
        if (i < n_sliver) {
          s.subject = sliver_perturb(s.subject, s.object, 0.02, rng);
          s.sliver = true;
        }
      } else {
        // disjoint pair with the subject centroid in the labeled sector
        static const double sector_center[kNumRelations] = {0, 90, 0, 270, 180, 135, 45, 225, 315};
        double center = sector_center[ri];
        double bearing = center + rng.uniform(-17.5, 17.5);  // 5 degree margin
        double rad = bearing * kPi / 180.0;

        PolyGeom sub;
        sub.parts.emplace_back();
        sub.parts[0].exterior = make_blob_ring(rng, rng.uniform(0.35, 1.4), 12);
        for (int attempt = 0;; ++attempt) {
          double dist = rng.uniform(2.6, 4.2) * (1.0 + 0.15 * attempt);
          Point2 oc = centroid(obj);
          Point2 sc = centroid(PolyGeom{{sub.parts[0]}});
          Point2 target{oc.x + dist * std::cos(rad), oc.y + dist * std::sin(rad)};
          PolyGeom placed = sub;
          for (auto& q : placed.parts[0].exterior.pts) q = q + (target - sc);
          // disjointness: no vertex of one inside the other
          bool ok = true;
          for (const auto& q : placed.parts[0].exterior.pts)
            if (point_in_polygon(q, obj)) ok = false;
          if (ok)
            for (const auto& q : obj.parts[0].exterior.pts)
              if (point_in_polygon(q, placed)) ok = false;
          if (ok) {
            sub = std::move(placed);
            break;
          }
          if (attempt > 20) fail(Errc::internal, "gen_relation_dataset: disjoint placement stuck");
        }
        s.subject = resample_geometry(enforce_orientation(std::move(sub)), vertex_budget);
        s.object = resample_geometry(enforce_orientation(std::move(obj)), vertex_budget);
      }
      randomize_origins(s.subject, rng);
      randomize_origins(s.object, rng);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace polyenc
