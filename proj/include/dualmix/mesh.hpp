// 2D triangulations of rectangular domains: construction, barycentric
// refinement, macroelement extraction and the geometric predicates used by
// the stability diagnostics.
#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualmix/geometry.hpp"

namespace dualmix {

enum class BoundaryTag { Interior, Dirichlet, Traction };

struct Edge {
  int a = -1;  // lower vertex index
  int b = -1;  // higher vertex index
  BoundaryTag tag = BoundaryTag::Interior;
};

struct Rect {
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;
};

// Immutable after construction.  Edge orientation runs from the lower vertex
// index to the higher; the edge normal is the unit tangent rotated 90
// degrees clockwise, n = (t.y, -t.x).
class Triangulation {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<Edge> edges;
  // tri_edges[t][i] is the edge opposite local vertex i of triangle t.
  std::vector<std::array<int, 3>> tri_edges;
  // For each edge, the adjacent triangles (second is -1 on the boundary).
  std::vector<std::array<int, 2>> edge_tris;
  // Barycentric refinement bookkeeping: parent triangle per child, and the
  // vertex count of the parent mesh (-1 / 0 when not a refinement).
  std::vector<int> parent;
  int parent_vertex_count = 0;
  int parent_triangle_count = 0;

  int numVertices() const { return static_cast<int>(vertices.size()); }
  int numTriangles() const { return static_cast<int>(triangles.size()); }
  int numEdges() const { return static_cast<int>(edges.size()); }
  bool isRefinement() const { return !parent.empty(); }

  double signedArea(int t) const {
    const Vec2& p0 = vertices[triangles[t][0]];
    const Vec2& p1 = vertices[triangles[t][1]];
    const Vec2& p2 = vertices[triangles[t][2]];
    return 0.5 * (p1 - p0).cross(p2 - p0);
  }
  double area(int t) const { return signedArea(t); }
  Vec2 centroid(int t) const {
    const Vec2& p0 = vertices[triangles[t][0]];
    const Vec2& p1 = vertices[triangles[t][1]];
    const Vec2& p2 = vertices[triangles[t][2]];
    return (p0 + p1 + p2) / 3.0;
  }
  double edgeLength(int e) const {
    return (vertices[edges[e].b] - vertices[edges[e].a]).norm();
  }
  Vec2 edgeTangent(int e) const {
    Vec2 t = vertices[edges[e].b] - vertices[edges[e].a];
    return t / t.norm();
  }
  // Global unit normal fixed by the edge orientation.
  Vec2 edgeNormal(int e) const {
    Vec2 t = edgeTangent(e);
    return {t.y, -t.x};
  }
  Vec2 edgeMidpoint(int e) const {
    return (vertices[edges[e].a] + vertices[edges[e].b]) * 0.5;
  }
  bool isBoundaryEdge(int e) const { return edge_tris[e][1] < 0; }
  // Outward unit normal of a boundary edge.
  Vec2 outwardNormal(int e) const;
  double maxEdgeLength() const;
  bool vertexOnBoundary(int v) const;

  // Connectivity derived from `triangles`; called by the builders.
  void buildEdges(const std::function<BoundaryTag(const Vec2&)>& boundary_tag);
};

enum class MacroKind { VertexPatch, FacetPatch };

struct MacroElement {
  MacroKind kind = MacroKind::VertexPatch;
  std::vector<int> tris;
  int anchor = -1;  // vertex index (vertex patch) or central triangle (facet patch)
};

// All boundary edges Dirichlet by default; pass a predicate on edge midpoints
// to tag Traction parts (the reference experiment tags x = x1).
Triangulation uniformSquareMesh(
    int n, const Rect& domain = Rect{},
    const std::function<BoundaryTag(const Vec2&)>& boundary_tag = nullptr);

// Convenience predicate for the right-edge traction setup.
std::function<BoundaryTag(const Vec2&)> tractionRightTag(const Rect& domain,
                                                         double tol = 1e-12);

// One-triangle mesh (used for local dimension counts).
Triangulation singleTriangleMesh(const Vec2& p0, const Vec2& p1, const Vec2& p2);

// Each triangle is split into 3 at its centroid; parent indices retained
// (children of parent t are 3t, 3t+1, 3t+2).
Triangulation barycentricRefine(const Triangulation& mesh);

std::vector<MacroElement> extractMacroelements(const Triangulation& mesh,
                                               MacroKind kind);

// Smallest singular value of the mean-shifted 4x2 centroid matrix; zero iff
// the four centroids are collinear.  Rejects patches without 4 triangles.
double centroidCollinearityMargin(const MacroElement& patch,
                                  const Triangulation& mesh);
double centroidCollinearityMargin(const std::array<Vec2, 4>& centroids);

// Plain-text mesh exchange: header "ntri nvert nedge", vertex coordinates,
// triangle vertex triples, edge records with boundary tags.
void dumpMesh(const Triangulation& mesh, std::ostream& out);
Triangulation readMesh(std::istream& in);

// Validity checks (positive areas, edge sharing counts, Euler relation).
// Returns an empty string when the mesh is consistent.
std::string checkMesh(const Triangulation& mesh);

}  // namespace dualmix
