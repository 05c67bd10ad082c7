#include "polyenc/simplex.hpp"

#include <ostream>

#include "polyenc/error.hpp"

namespace polyenc {

SimplexMesh to_simplex_mesh(const PolyGeom& g) {
  if (g.parts.empty()) fail(Errc::domain, "to_simplex_mesh: empty geometry");

  int m = g.vertex_count();
  SimplexMesh mesh;
  mesh.vertices.reserve(m + 1);
  mesh.simplices.reserve(m);
  mesh.density.assign(m, 1.0);

  auto add_ring = [&](const Ring& r) {
    int base = static_cast<int>(mesh.vertices.size());
    int n = r.size();
    for (const auto& p : r.pts) mesh.vertices.push_back(p);
    for (int i = 0; i < n; ++i)
      mesh.simplices.push_back({base + i, base + (i + 1) % n, m});
  };
  for (const auto& part : g.parts) {
    add_ring(part.exterior);
    for (const auto& h : part.holes) add_ring(h);
  }
  mesh.vertices.push_back({0.0, 0.0});  // auxiliary origin
  return mesh;
}

double signed_content_factor(const SimplexMesh& mesh, int n) {
  if (n < 0 || n >= mesh.size()) fail(Errc::domain, "signed_content_factor: index out of range");
  const Point2& a = mesh.vertices[mesh.simplices[n][0]];
  const Point2& b = mesh.vertices[mesh.simplices[n][1]];
  return a.x * b.y - a.y * b.x;
}

double mesh_signed_area(const SimplexMesh& mesh) {
  double s = 0.0;
  for (int n = 0; n < mesh.size(); ++n) s += mesh.density[n] * signed_content_factor(mesh, n);
  return 0.5 * s;
}

void dump_mesh_csv(const SimplexMesh& mesh, std::ostream& os) {
  os << "# V: index,x,y\n";
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    os << i << ',' << mesh.vertices[i].x << ',' << mesh.vertices[i].y << '\n';
  os << "# E: index,v0,v1,v2\n";
  for (int n = 0; n < mesh.size(); ++n)
    os << n << ',' << mesh.simplices[n][0] << ',' << mesh.simplices[n][1] << ','
       << mesh.simplices[n][2] << '\n';
  os << "# D: index,density\n";
  for (int n = 0; n < mesh.size(); ++n) os << n << ',' << mesh.density[n] << '\n';
}

}  // namespace polyenc
