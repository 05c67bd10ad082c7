#include "polyenc/wkt.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>

#include <nlohmann/json.hpp>

#include "polyenc/error.hpp"

namespace polyenc {

namespace {

class WktScanner {
 public:
  explicit WktScanner(std::string_view text) : text_(text) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(Errc::parse, what + " at byte offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) error(std::string("expected '") + c + "'");
  }

  bool eat_keyword(const char* kw) {
    skip_ws();
    size_t n = std::strlen(kw);
    if (text_.size() - pos_ < n) return false;
    for (size_t i = 0; i < n; ++i) {
      if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != kw[i]) return false;
    }
    pos_ += n;
    return true;
  }

  double number() {
    skip_ws();
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) error("expected a number");
    pos_ += static_cast<size_t>(res.ptr - begin);
    return v;
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) error("trailing characters");
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
};

Ring parse_ring(WktScanner& s) {
  Ring r;
  s.expect('(');
  do {
    double x = s.number();
    double y = s.number();
    r.pts.push_back({x, y});
  } while (s.eat(','));
  s.expect(')');
  if (r.size() >= 2 && r.pts.front() == r.pts.back()) r.pts.pop_back();
  if (r.size() < 3) s.error("degenerate ring (fewer than 3 distinct points)");
  return r;
}

Polygon parse_polygon_body(WktScanner& s) {
  Polygon p;
  s.expect('(');
  p.exterior = parse_ring(s);
  while (s.eat(',')) p.holes.push_back(parse_ring(s));
  s.expect(')');
  return p;
}

PolyGeom finish_geometry(PolyGeom g) {
  if (g.parts.empty()) fail(Errc::parse, "empty geometry");
  g = enforce_orientation(std::move(g));
  ValidationReport rep = validate(g);
  if (!rep.ok()) fail(Errc::invalid, "parsed geometry is invalid: " + rep.to_string());
  return g;
}

void format_coord(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void serialize_ring(std::string& out, const Ring& r) {
  out += '(';
  for (int i = 0; i < r.size(); ++i) {
    if (i) out += ',';
    format_coord(out, r.pts[i].x);
    out += ' ';
    format_coord(out, r.pts[i].y);
  }
  out += ')';
}

void serialize_polygon_body(std::string& out, const Polygon& p) {
  out += '(';
  serialize_ring(out, p.exterior);
  for (const auto& h : p.holes) {
    out += ',';
    serialize_ring(out, h);
  }
  out += ')';
}

}  // namespace

PolyGeom parse_wkt(std::string_view text) {
  WktScanner s(text);
  PolyGeom g;
  if (s.eat_keyword("MULTIPOLYGON")) {
    s.expect('(');
    do {
      g.parts.push_back(parse_polygon_body(s));
    } while (s.eat(','));
    s.expect(')');
  } else if (s.eat_keyword("POLYGON")) {
    g.parts.push_back(parse_polygon_body(s));
  } else {
    s.error("expected POLYGON or MULTIPOLYGON");
  }
  s.finish();
  return finish_geometry(std::move(g));
}

std::string serialize_wkt(const PolyGeom& g) {
  std::string out;
  if (g.parts.size() == 1) {
    out += "POLYGON";
    serialize_polygon_body(out, g.parts[0]);
  } else {
    out += "MULTIPOLYGON(";
    for (size_t i = 0; i < g.parts.size(); ++i) {
      if (i) out += ',';
      serialize_polygon_body(out, g.parts[i]);
    }
    out += ')';
  }
  return out;
}

PolyGeom parse_geojson(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::parse, "GeoJSON: not valid JSON");

  auto read_ring = [](const nlohmann::json& arr) {
    Ring r;
    for (const auto& pt : arr) {
      if (!pt.is_array() || pt.size() < 2) fail(Errc::parse, "GeoJSON: bad coordinate pair");
      r.pts.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    if (r.size() >= 2 && r.pts.front() == r.pts.back()) r.pts.pop_back();
    if (r.size() < 3) fail(Errc::parse, "GeoJSON: degenerate ring");
    return r;
  };
  auto read_polygon = [&](const nlohmann::json& rings) {
    Polygon p;
    if (!rings.is_array() || rings.empty()) fail(Errc::parse, "GeoJSON: polygon without rings");
    p.exterior = read_ring(rings[0]);
    for (size_t i = 1; i < rings.size(); ++i) p.holes.push_back(read_ring(rings[i]));
    return p;
  };

  std::string type = j.value("type", "");
  const auto& coords = j.contains("coordinates") ? j["coordinates"] : nlohmann::json();
  PolyGeom g;
  if (type == "Polygon") {
    g.parts.push_back(read_polygon(coords));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : coords) g.parts.push_back(read_polygon(poly));
  } else {
    fail(Errc::parse, "GeoJSON: expected Polygon or MultiPolygon, got '" + type + "'");
  }
  return finish_geometry(std::move(g));
}

}  // namespace polyenc
