#pragma once

#include <string>
#include <string_view>

#include "polyenc/geometry.hpp"

namespace polyenc {

// POLYGON / MULTIPOLYGON subset. Orientation is enforced on ingest and
// duplicate closing vertices are dropped; the result passes validate().
PolyGeom parse_wkt(std::string_view text);

// Coordinates round-trip exactly (17 significant digits). Rings are written
// open, without the repeated closing vertex.
std::string serialize_wkt(const PolyGeom& g);

// Convenience reader for GeoJSON Polygon / MultiPolygon geometry objects.
// WKT stays the normative format.
PolyGeom parse_geojson(std::string_view text);

}  // namespace polyenc
