#include "polyenc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyenc/error.hpp"

namespace polyenc {

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

double Ring::perimeter() const {
  double p = 0.0;
  int n = size();
  for (int i = 0; i < n; ++i) p += norm(pts[(i + 1) % n] - pts[i]);
  return p;
}

int PolyGeom::vertex_count() const {
  int m = 0;
  for (const auto& part : parts) {
    m += part.exterior.size();
    for (const auto& h : part.holes) m += h.size();
  }
  return m;
}

int PolyGeom::ring_count() const {
  int n = 0;
  for (const auto& part : parts) n += 1 + static_cast<int>(part.holes.size());
  return n;
}

PolyGeom apply_transform(const PolyGeom& g, const AffineTransform& t) {
  PolyGeom out = g;
  for (auto& part : out.parts) {
    for (auto& p : part.exterior.pts) p = t.apply(p);
    for (auto& h : part.holes)
      for (auto& p : h.pts) p = t.apply(p);
  }
  return out;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].code << " (" << issues[i].detail << ")";
  }
  return os.str();
}

double ring_signed_area(const Ring& r) {
  int n = r.size();
  double a = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2& p = r.pts[i];
    const Point2& q = r.pts[(i + 1) % n];
    a += cross(p, q);
  }
  return 0.5 * a;
}

double geometry_area(const PolyGeom& g) {
  double a = 0.0;
  for (const auto& part : g.parts) {
    a += ring_signed_area(part.exterior);
    for (const auto& h : part.holes) a += ring_signed_area(h);  // holes are CW, negative
  }
  return a;
}

namespace {

// (centroid * signed area) of one ring
Point2 ring_weighted_centroid(const Ring& r) {
  int n = r.size();
  double cx = 0.0, cy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2& p = r.pts[i];
    const Point2& q = r.pts[(i + 1) % n];
    double w = cross(p, q);
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / 6.0, cy / 6.0};
}

}  // namespace

Point2 centroid(const PolyGeom& g) {
  double area = 0.0;
  Point2 acc{0.0, 0.0};
  for (const auto& part : g.parts) {
    acc = acc + ring_weighted_centroid(part.exterior);
    area += ring_signed_area(part.exterior);
    for (const auto& h : part.holes) {
      acc = acc + ring_weighted_centroid(h);
      area += ring_signed_area(h);
    }
  }
  if (std::abs(area) < 1e-300) fail(Errc::domain, "centroid of zero-area geometry");
  return {acc.x / area, acc.y / area};
}

std::array<Point2, 2> bounding_box(const PolyGeom& g) {
  Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point2 hi{-lo.x, -lo.y};
  auto take = [&](const Ring& r) {
    for (const auto& p : r.pts) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  };
  for (const auto& part : g.parts) {
    take(part.exterior);
    for (const auto& h : part.holes) take(h);
  }
  return {lo, hi};
}

std::array<Point2, 2> bounding_box(const std::vector<PolyGeom>& gs) {
  Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point2 hi{-lo.x, -lo.y};
  for (const auto& g : gs) {
    auto bb = bounding_box(g);
    lo.x = std::min(lo.x, bb[0].x);
    lo.y = std::min(lo.y, bb[0].y);
    hi.x = std::max(hi.x, bb[1].x);
    hi.y = std::max(hi.y, bb[1].y);
  }
  return {lo, hi};
}

PolyGeom enforce_orientation(PolyGeom g) {
  for (auto& part : g.parts) {
    if (ring_signed_area(part.exterior) < 0.0)
      std::reverse(part.exterior.pts.begin(), part.exterior.pts.end());
    for (auto& h : part.holes)
      if (ring_signed_area(h) > 0.0) std::reverse(h.pts.begin(), h.pts.end());
  }
  return g;
}

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  Point2 ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 <= 0.0) return norm(p - a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  Point2 proj = a + ab * t;
  return norm(p - proj);
}

bool on_ring_boundary(Point2 p, const Ring& r, double eps) {
  int n = r.size();
  for (int i = 0; i < n; ++i) {
    if (point_segment_distance(p, r.pts[i], r.pts[(i + 1) % n]) <= eps) return true;
  }
  return false;
}

// Even-odd crossing test, valid strictly off the boundary.
bool inside_ring(Point2 p, const Ring& r) {
  int n = r.size();
  bool in = false;
  for (int i = 0; i < n; ++i) {
    const Point2& a = r.pts[i];
    const Point2& b = r.pts[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

double boundary_eps(const PolyGeom& g) {
  auto bb = bounding_box(g);
  double diag = norm(bb[1] - bb[0]);
  return 1e-12 * std::max(1.0, diag);
}

}  // namespace

bool point_in_polygon(Point2 p, const PolyGeom& g) {
  double eps = boundary_eps(g);
  for (const auto& part : g.parts) {
    if (on_ring_boundary(p, part.exterior, eps)) return true;
    if (!inside_ring(p, part.exterior)) continue;
    bool in_hole = false;
    for (const auto& h : part.holes) {
      if (on_ring_boundary(p, h, eps)) return true;  // hole boundary is geometry boundary
      if (inside_ring(p, h)) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) return true;
  }
  return false;
}

double distance_to_boundary(Point2 p, const PolyGeom& g) {
  double d = std::numeric_limits<double>::infinity();
  auto scan = [&](const Ring& r) {
    int n = r.size();
    for (int i = 0; i < n; ++i)
      d = std::min(d, point_segment_distance(p, r.pts[i], r.pts[(i + 1) % n]));
  };
  for (const auto& part : g.parts) {
    scan(part.exterior);
    for (const auto& h : part.holes) scan(h);
  }
  return d;
}

std::pair<std::vector<PolyGeom>, AffineTransform> normalize_unit(
    const std::vector<PolyGeom>& gs, NormalizeTarget target) {
  if (gs.empty()) fail(Errc::domain, "normalize_unit on empty geometry list");
  auto bb = bounding_box(gs);
  double hx = 0.5 * (bb[1].x - bb[0].x);
  double hy = 0.5 * (bb[1].y - bb[0].y);
  double half = std::max(hx, hy);
  if (!(half > 0.0)) fail(Errc::domain, "normalize_unit: zero-extent bounding box");

  AffineTransform t;
  t.translate_pre = {-0.5 * (bb[0].x + bb[1].x), -0.5 * (bb[0].y + bb[1].y)};
  t.scale = 1.0 / half;
  t.translate_post = target == NormalizeTarget::nuft_space ? Point2{1.0, 1.0} : Point2{0.0, 0.0};

  std::vector<PolyGeom> out;
  out.reserve(gs.size());
  for (const auto& g : gs) out.push_back(apply_transform(g, t));
  return {std::move(out), t};
}

Ring resample_ring(const Ring& r, int n) {
  int len = r.size();
  if (n < len) fail(Errc::domain, "resample_ring: target below current vertex count");
  if (n == len) return r;

  int extra = n - len;
  std::vector<double> el(len);
  double total = 0.0;
  for (int i = 0; i < len; ++i) {
    el[i] = norm(r.pts[(i + 1) % len] - r.pts[i]);
    total += el[i];
  }

  // largest-remainder allocation of extra vertices over edges
  std::vector<int> alloc(len, 0);
  std::vector<std::pair<double, int>> rem(len);
  int used = 0;
  for (int i = 0; i < len; ++i) {
    double quota = extra * el[i] / total;
    alloc[i] = static_cast<int>(std::floor(quota));
    used += alloc[i];
    rem[i] = {quota - alloc[i], i};
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // ties: lowest edge index first
  });
  for (int j = 0; j < extra - used; ++j) alloc[rem[j].second] += 1;

  Ring out;
  out.pts.reserve(n);
  for (int i = 0; i < len; ++i) {
    const Point2& a = r.pts[i];
    const Point2& b = r.pts[(i + 1) % len];
    out.pts.push_back(a);
    for (int j = 1; j <= alloc[i]; ++j) {
      double t = static_cast<double>(j) / (alloc[i] + 1);
      out.pts.push_back(a + (b - a) * t);
    }
  }
  return out;
}

namespace {

void dp_chain(const std::vector<Point2>& pts, int lo, int hi, double tol,
              std::vector<char>& keep) {
  if (hi - lo < 2) return;
  double best = -1.0;
  int best_i = -1;
  for (int i = lo + 1; i < hi; ++i) {
    double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (d > best) {
      best = d;
      best_i = i;
    }
  }
  if (best > tol) {
    keep[best_i] = 1;
    dp_chain(pts, lo, best_i, tol, keep);
    dp_chain(pts, best_i, hi, tol, keep);
  }
}

Ring dp_ring(const Ring& r, double tol) {
  int n = r.size();
  // anchor at vertex 0 and the vertex farthest from it
  int far_i = 1;
  double far_d = -1.0;
  for (int i = 1; i < n; ++i) {
    double d = norm(r.pts[i] - r.pts[0]);
    if (d > far_d) {
      far_d = d;
      far_i = i;
    }
  }
  std::vector<Point2> closed(r.pts.begin(), r.pts.end());
  closed.push_back(r.pts[0]);
  std::vector<char> keep(n + 1, 0);
  keep[0] = keep[far_i] = keep[n] = 1;
  dp_chain(closed, 0, far_i, tol, keep);
  dp_chain(closed, far_i, n, tol, keep);

  Ring out;
  for (int i = 0; i < n; ++i)
    if (keep[i]) out.pts.push_back(r.pts[i]);

  if (out.size() < 3) {
    // force a third vertex: the one farthest from the anchor chord
    int extra = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (keep[i]) continue;
      double d = point_segment_distance(r.pts[i], r.pts[0], r.pts[far_i]);
      if (d > best) {
        best = d;
        extra = i;
      }
    }
    if (extra >= 0) {
      keep[extra] = 1;
      out.pts.clear();
      for (int i = 0; i < n; ++i)
        if (keep[i]) out.pts.push_back(r.pts[i]);
    }
  }
  return out;
}

PolyGeom dp_geometry(const PolyGeom& g, double tol) {
  PolyGeom out;
  out.parts.reserve(g.parts.size());
  for (const auto& part : g.parts) {
    Polygon p;
    p.exterior = dp_ring(part.exterior, tol);
    for (const auto& h : part.holes) p.holes.push_back(dp_ring(h, tol));
    out.parts.push_back(std::move(p));
  }
  return out;
}

bool rings_at_least_3(const PolyGeom& g) {
  for (const auto& part : g.parts) {
    if (part.exterior.size() < 3) return false;
    for (const auto& h : part.holes)
      if (h.size() < 3) return false;
  }
  return true;
}

}  // namespace

PolyGeom simplify(const PolyGeom& g, int n_target) {
  if (n_target < 3 * g.ring_count())
    fail(Errc::domain, "simplify: n_target below 3 vertices per ring");
  if (g.vertex_count() <= n_target) return g;

  auto bb = bounding_box(g);
  double hi = norm(bb[1] - bb[0]);
  double lo = 0.0;

  auto feasible = [&](double tol, PolyGeom* result) {
    PolyGeom s = dp_geometry(g, tol);
    if (s.vertex_count() > n_target) return false;
    if (!rings_at_least_3(s)) return false;
    if (!validate(s).ok()) return false;
    if (result) *result = std::move(s);
    return true;
  };

  if (!feasible(hi, nullptr)) {
    // widen once; if even a huge tolerance cannot reach the budget validly,
    // report failure
    hi *= 8.0;
    if (!feasible(hi, nullptr))
      fail(Errc::domain, "simplify: cannot reach n_target with a valid geometry");
  }
  for (int it = 0; it < 64; ++it) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid, nullptr))
      hi = mid;
    else
      lo = mid;
  }
  PolyGeom out;
  if (!feasible(hi, &out))
    fail(Errc::internal, "simplify: converged tolerance became infeasible");
  return out;
}

PolyGeom loop_shift(const PolyGeom& g, int part, int ring, int s) {
  if (part < 0 || part >= static_cast<int>(g.parts.size()))
    fail(Errc::domain, "loop_shift: part index out of range");
  const Polygon& p = g.parts[part];
  int nrings = 1 + static_cast<int>(p.holes.size());
  if (ring < 0 || ring >= nrings) fail(Errc::domain, "loop_shift: ring index out of range");
  if (s < 0) fail(Errc::domain, "loop_shift: negative shift");

  PolyGeom out = g;
  Ring& r = ring == 0 ? out.parts[part].exterior : out.parts[part].holes[ring - 1];
  int n = r.size();
  int k = s % n;
  std::rotate(r.pts.begin(), r.pts.begin() + k, r.pts.end());
  return out;
}

PolyGeom insert_trivial_vertices(const PolyGeom& g, int k, Rng& rng) {
  if (k < 0) fail(Errc::domain, "insert_trivial_vertices: negative k");
  PolyGeom out = g;
  for (int it = 0; it < k; ++it) {
    // collect all edges with cumulative length
    struct EdgeRef {
      int part, ring, idx;
      double len;
    };
    std::vector<EdgeRef> edges;
    double total = 0.0;
    for (int pi = 0; pi < static_cast<int>(out.parts.size()); ++pi) {
      auto add_ring = [&](const Ring& r, int ri) {
        int n = r.size();
        for (int i = 0; i < n; ++i) {
          double len = norm(r.pts[(i + 1) % n] - r.pts[i]);
          edges.push_back({pi, ri, i, len});
          total += len;
        }
      };
      add_ring(out.parts[pi].exterior, 0);
      for (int hi = 0; hi < static_cast<int>(out.parts[pi].holes.size()); ++hi)
        add_ring(out.parts[pi].holes[hi], hi + 1);
    }
    double pick = rng.uniform() * total;
    size_t chosen = 0;
    double acc = 0.0;
    for (size_t i = 0; i < edges.size(); ++i) {
      acc += edges[i].len;
      if (pick < acc || i + 1 == edges.size()) {
        chosen = i;
        break;
      }
    }
    double u = rng.uniform();
    while (u <= 1e-12 || u >= 1.0 - 1e-12) u = rng.uniform();

    const EdgeRef& e = edges[chosen];
    Ring& r = e.ring == 0 ? out.parts[e.part].exterior : out.parts[e.part].holes[e.ring - 1];
    int n = r.size();
    Point2 a = r.pts[e.idx];
    Point2 b = r.pts[(e.idx + 1) % n];
    r.pts.insert(r.pts.begin() + e.idx + 1, a + (b - a) * u);
  }
  return out;
}

PolyGeom permute_parts(const PolyGeom& g, const std::vector<int>& perm) {
  int n = static_cast<int>(g.parts.size());
  if (static_cast<int>(perm.size()) != n)
    fail(Errc::domain, "permute_parts: permutation length mismatch");
  std::vector<char> seen(n, 0);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[v]) fail(Errc::domain, "permute_parts: not a permutation");
    seen[v] = 1;
  }
  PolyGeom out;
  out.parts.reserve(n);
  for (int v : perm) out.parts.push_back(g.parts[v]);
  return out;
}

PolyGeom holes_to_parts(const PolyGeom& g) {
  PolyGeom out;
  for (const auto& part : g.parts) {
    Polygon kept;
    kept.exterior = part.exterior;
    out.parts.push_back(std::move(kept));
  }
  for (const auto& part : g.parts) {
    for (const auto& h : part.holes) {
      Polygon np;
      np.exterior = h;
      std::reverse(np.exterior.pts.begin(), np.exterior.pts.end());
      out.parts.push_back(std::move(np));
    }
  }
  return out;
}

namespace {

// Proper or improper intersection of segments ab and cd, excluding shared
// endpoints of adjacent ring segments (the caller filters adjacency).
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  auto orient = [](Point2 p, Point2 q, Point2 r) {
    double v = cross(q - p, r - p);
    double scale = std::abs(q.x - p.x) + std::abs(q.y - p.y) + std::abs(r.x - p.x) +
                   std::abs(r.y - p.y);
    double eps = 1e-14 * std::max(1.0, scale * scale);
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
  };
  auto on_seg = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) - 1e-14 <= r.x && r.x <= std::max(p.x, q.x) + 1e-14 &&
           std::min(p.y, q.y) - 1e-14 <= r.y && r.y <= std::max(p.y, q.y) + 1e-14;
  };
  int o1 = orient(a, b, c);
  int o2 = orient(a, b, d);
  int o3 = orient(c, d, a);
  int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(a, b, c)) return true;
  if (o2 == 0 && on_seg(a, b, d)) return true;
  if (o3 == 0 && on_seg(c, d, a)) return true;
  if (o4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

bool ring_self_intersects(const Ring& r) {
  int n = r.size();
  for (int i = 0; i < n; ++i) {
    Point2 a = r.pts[i];
    Point2 b = r.pts[(i + 1) % n];
    for (int j = i + 1; j < n; ++j) {
      // skip adjacent segments (they share an endpoint)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(a, b, r.pts[j], r.pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

bool rings_cross(const Ring& r1, const Ring& r2) {
  int n1 = r1.size(), n2 = r2.size();
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      if (segments_intersect(r1.pts[i], r1.pts[(i + 1) % n1], r2.pts[j],
                             r2.pts[(j + 1) % n2]))
        return true;
  return false;
}

}  // namespace

ValidationReport validate(const PolyGeom& g) {
  ValidationReport rep;
  auto issue = [&](const std::string& code, const std::string& detail) {
    rep.issues.push_back({code, detail});
  };
  if (g.parts.empty()) {
    issue("empty", "geometry has no parts");
    return rep;
  }
  for (int pi = 0; pi < static_cast<int>(g.parts.size()); ++pi) {
    const Polygon& part = g.parts[pi];
    auto check_ring = [&](const Ring& r, const std::string& where, bool want_ccw) {
      int n = r.size();
      if (n < 3) {
        issue("degenerate_ring", where + ": fewer than 3 vertices");
        return false;
      }
      for (const auto& p : r.pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
          issue("nonfinite", where + ": non-finite coordinate");
          return false;
        }
      }
      if (r.pts.front() == r.pts.back())
        issue("duplicate_closing_vertex", where + ": first point repeated at end");
      for (int i = 0; i < n; ++i) {
        if (norm(r.pts[(i + 1) % n] - r.pts[i]) < 1e-12)
          issue("duplicate_point", where + ": consecutive points coincide");
      }
      double a = ring_signed_area(r);
      if (want_ccw && a <= 0.0) issue("orientation", where + ": exterior not counterclockwise");
      if (!want_ccw && a >= 0.0) issue("orientation", where + ": hole not clockwise");
      if (ring_self_intersects(r)) issue("self_intersection", where);
      return true;
    };
    std::string pstr = "part " + std::to_string(pi);
    bool ext_ok = check_ring(part.exterior, pstr + " exterior", true);
    for (int hi = 0; hi < static_cast<int>(part.holes.size()); ++hi) {
      std::string hstr = pstr + " hole " + std::to_string(hi);
      bool h_ok = check_ring(part.holes[hi], hstr, false);
      if (ext_ok && h_ok) {
        bool inside_ok = true;
        for (const auto& p : part.holes[hi].pts) {
          if (!inside_ring(p, part.exterior) &&
              !on_ring_boundary(p, part.exterior, boundary_eps(g))) {
            inside_ok = false;
            break;
          }
        }
        if (!inside_ok || rings_cross(part.holes[hi], part.exterior))
          issue("hole_containment", hstr + ": not inside exterior");
        for (int hj = hi + 1; hj < static_cast<int>(part.holes.size()); ++hj) {
          if (rings_cross(part.holes[hi], part.holes[hj]) ||
              inside_ring(part.holes[hi].pts[0], part.holes[hj]) ||
              inside_ring(part.holes[hj].pts[0], part.holes[hi]))
            issue("hole_overlap", pstr + ": holes " + std::to_string(hi) + " and " +
                                      std::to_string(hj) + " not disjoint");
        }
      }
    }
  }
  return rep;
}

Ring remove_collinear_vertices(const Ring& r, double tol) {
  Ring out = r;
  bool changed = true;
  while (changed && out.size() > 3) {
    changed = false;
    int n = out.size();
    for (int i = 0; i < n; ++i) {
      Point2 prev = out.pts[(i + n - 1) % n];
      Point2 cur = out.pts[i];
      Point2 next = out.pts[(i + 1) % n];
      if (point_segment_distance(cur, prev, next) <= tol) {
        out.pts.erase(out.pts.begin() + i);
        changed = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace polyenc
