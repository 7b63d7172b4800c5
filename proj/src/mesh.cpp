#include "dualmix/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dualmix {

void Triangulation::buildEdges(
    const std::function<BoundaryTag(const Vec2&)>& boundary_tag) {
  edges.clear();
  tri_edges.assign(triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> edge_of;
  for (int t = 0; t < numTriangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      int u = triangles[t][(i + 1) % 3];
      int v = triangles[t][(i + 2) % 3];
      auto key = std::minmax(u, v);
      auto it = edge_of.find(key);
      int e;
      if (it == edge_of.end()) {
        e = numEdges();
        edges.push_back({key.first, key.second, BoundaryTag::Interior});
        edge_tris.push_back({t, -1});
        edge_of.emplace(key, e);
      } else {
        e = it->second;
        if (edge_tris[e][1] >= 0)
          throw std::runtime_error("edge shared by more than two triangles");
        edge_tris[e][1] = t;
      }
      tri_edges[t][i] = e;
    }
  }
  for (int e = 0; e < numEdges(); ++e) {
    if (!isBoundaryEdge(e)) continue;
    edges[e].tag = boundary_tag ? boundary_tag(edgeMidpoint(e)) : BoundaryTag::Dirichlet;
    if (edges[e].tag == BoundaryTag::Interior)
      edges[e].tag = BoundaryTag::Dirichlet;
  }
}

Vec2 Triangulation::outwardNormal(int e) const {
  Vec2 n = edgeNormal(e);
  int t = edge_tris[e][0];
  Vec2 toCentroid = centroid(t) - edgeMidpoint(e);
  return (n.dot(toCentroid) > 0.0) ? n * -1.0 : n;
}

double Triangulation::maxEdgeLength() const {
  double h = 0.0;
  for (int e = 0; e < numEdges(); ++e) h = std::max(h, edgeLength(e));
  return h;
}

bool Triangulation::vertexOnBoundary(int v) const {
  for (int e = 0; e < numEdges(); ++e)
    if (isBoundaryEdge(e) && (edges[e].a == v || edges[e].b == v)) return true;
  return false;
}

Triangulation uniformSquareMesh(
    int n, const Rect& domain,
    const std::function<BoundaryTag(const Vec2&)>& boundary_tag) {
  if (n < 1) throw std::invalid_argument("uniformSquareMesh: n must be >= 1");
  Triangulation mesh;
  const double hx = (domain.x1 - domain.x0) / n;
  const double hy = (domain.y1 - domain.y0) / n;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back({domain.x0 + i * hx, domain.y0 + j * hy});
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  // Diagonal from lower-left to upper-right in every cell.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  mesh.buildEdges(boundary_tag);
  return mesh;
}

std::function<BoundaryTag(const Vec2&)> tractionRightTag(const Rect& domain,
                                                         double tol) {
  double x1 = domain.x1;
  double scale = std::max(1.0, std::abs(x1));
  return [x1, tol, scale](const Vec2& mid) {
    return std::abs(mid.x - x1) < tol * scale ? BoundaryTag::Traction
                                              : BoundaryTag::Dirichlet;
  };
}

Triangulation singleTriangleMesh(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  Triangulation mesh;
  mesh.vertices = {p0, p1, p2};
  if (0.5 * (p1 - p0).cross(p2 - p0) <= 0.0)
    throw std::invalid_argument("singleTriangleMesh: vertices must be counterclockwise");
  mesh.triangles.push_back({0, 1, 2});
  mesh.buildEdges(nullptr);
  return mesh;
}

Triangulation barycentricRefine(const Triangulation& mesh) {
  Triangulation out;
  out.vertices = mesh.vertices;
  out.parent_vertex_count = mesh.numVertices();
  out.parent_triangle_count = mesh.numTriangles();
  out.triangles.reserve(3 * mesh.numTriangles());
  out.parent.reserve(3 * mesh.numTriangles());
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    int c = out.numVertices();
    out.vertices.push_back(mesh.centroid(t));
    const auto& tri = mesh.triangles[t];
    out.triangles.push_back({tri[0], tri[1], c});
    out.triangles.push_back({tri[1], tri[2], c});
    out.triangles.push_back({tri[2], tri[0], c});
    out.parent.insert(out.parent.end(), 3, t);
  }
  // Parent edges are uncut; inherit their tags, spokes are interior.
  std::map<std::pair<int, int>, BoundaryTag> parent_tag;
  for (const auto& e : mesh.edges) parent_tag[{e.a, e.b}] = e.tag;
  out.buildEdges(nullptr);
  for (auto& e : out.edges) {
    if (auto it = parent_tag.find({e.a, e.b}); it != parent_tag.end())
      e.tag = it->second;
  }
  return out;
}

std::vector<MacroElement> extractMacroelements(const Triangulation& mesh,
                                               MacroKind kind) {
  std::vector<MacroElement> patches;
  if (kind == MacroKind::VertexPatch) {
    std::vector<std::vector<int>> star(mesh.numVertices());
    for (int t = 0; t < mesh.numTriangles(); ++t)
      for (int v : mesh.triangles[t]) star[v].push_back(t);
    for (int v = 0; v < mesh.numVertices(); ++v) {
      if (mesh.vertexOnBoundary(v) || star[v].empty()) continue;
      patches.push_back({MacroKind::VertexPatch, star[v], v});
    }
  } else {
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      MacroElement p{MacroKind::FacetPatch, {t}, t};
      bool interior = true;
      for (int e : mesh.tri_edges[t]) {
        if (mesh.isBoundaryEdge(e)) {
          interior = false;
          break;
        }
        int other = mesh.edge_tris[e][0] == t ? mesh.edge_tris[e][1]
                                              : mesh.edge_tris[e][0];
        p.tris.push_back(other);
      }
      if (interior) patches.push_back(std::move(p));
    }
  }
  return patches;
}

double centroidCollinearityMargin(const std::array<Vec2, 4>& c) {
  Vec2 mean = (c[0] + c[1] + c[2] + c[3]) / 4.0;
  // Singular values of the shifted 4x2 matrix M are the square roots of the
  // eigenvalues of the 2x2 matrix M^T M.
  double sxx = 0, sxy = 0, syy = 0;
  for (const Vec2& p : c) {
    Vec2 d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  double tr = sxx + syy;
  double det = sxx * syy - sxy * sxy;
  double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  double lmin = std::max(0.0, tr / 2.0 - disc);
  return std::sqrt(lmin);
}

double centroidCollinearityMargin(const MacroElement& patch,
                                  const Triangulation& mesh) {
  if (patch.tris.size() != 4)
    throw std::invalid_argument("centroidCollinearityMargin: patch must have 4 triangles");
  std::array<Vec2, 4> c;
  for (int i = 0; i < 4; ++i) c[i] = mesh.centroid(patch.tris[i]);
  return centroidCollinearityMargin(c);
}

void dumpMesh(const Triangulation& mesh, std::ostream& out) {
  out << mesh.numTriangles() << ' ' << mesh.numVertices() << ' '
      << mesh.numEdges() << '\n';
  out.precision(17);
  for (const Vec2& v : mesh.vertices) out << v.x << ' ' << v.y << '\n';
  for (const auto& t : mesh.triangles)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.edges)
    out << e.a << ' ' << e.b << ' ' << static_cast<int>(e.tag) << '\n';
}

Triangulation readMesh(std::istream& in) {
  int ntri = 0, nvert = 0, nedge = 0;
  if (!(in >> ntri >> nvert >> nedge))
    throw std::runtime_error("readMesh: bad header");
  Triangulation mesh;
  mesh.vertices.resize(nvert);
  for (auto& v : mesh.vertices) in >> v.x >> v.y;
  mesh.triangles.resize(ntri);
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  std::map<std::pair<int, int>, BoundaryTag> tags;
  for (int e = 0; e < nedge; ++e) {
    int a, b, tag;
    in >> a >> b >> tag;
    tags[{a, b}] = static_cast<BoundaryTag>(tag);
  }
  if (!in) throw std::runtime_error("readMesh: truncated file");
  mesh.buildEdges(nullptr);
  if (mesh.numEdges() != nedge)
    throw std::runtime_error("readMesh: edge count mismatch");
  for (auto& e : mesh.edges)
    if (auto it = tags.find({e.a, e.b}); it != tags.end()) e.tag = it->second;
  return mesh;
}

std::string checkMesh(const Triangulation& mesh) {
  std::ostringstream err;
  for (int t = 0; t < mesh.numTriangles(); ++t)
    if (mesh.signedArea(t) <= 0.0) err << "triangle " << t << " has nonpositive area; ";
  for (int e = 0; e < mesh.numEdges(); ++e) {
    bool bdry = mesh.isBoundaryEdge(e);
    if (bdry && mesh.edges[e].tag == BoundaryTag::Interior)
      err << "boundary edge " << e << " tagged interior; ";
    if (!bdry && mesh.edges[e].tag != BoundaryTag::Interior)
      err << "interior edge " << e << " tagged as boundary; ";
  }
  int euler = mesh.numVertices() - mesh.numEdges() + mesh.numTriangles();
  if (euler != 1) err << "Euler relation violated: " << euler << "; ";
  return err.str();
}

}  // namespace dualmix
