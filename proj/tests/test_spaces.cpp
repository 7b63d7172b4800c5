#include <Eigen/Dense>

#include <random>

#include "doctest.h"
#include "dualmix/quadrature.hpp"
#include "dualmix/spaces.hpp"

using namespace dualmix;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(42);
  return gen;
}

double uniform(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng());
}

Vec2 randomPointIn(const Triangulation& mesh, int t) {
  double a = uniform(0.0, 1.0), b = uniform(0.0, 1.0);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  const Vec2& p0 = mesh.vertices[mesh.triangles[t][0]];
  const Vec2& p1 = mesh.vertices[mesh.triangles[t][1]];
  const Vec2& p2 = mesh.vertices[mesh.triangles[t][2]];
  return p0 + (p1 - p0) * a + (p2 - p0) * b;
}

}  // namespace

TEST_CASE("global dof counts match the forced element counts") {
  Triangulation mesh = uniformSquareMesh(8);  // 128 tris, 81 verts, 208 edges
  CHECK(buildGSpace(ElementFamily::parse("afw"), mesh).ndof == 896);
  CHECK(buildGSpace(ElementFamily::parse("peers"), mesh).ndof == 849);
  CHECK(buildUSpace(ElementFamily::parse("afw"), mesh).ndof == 256);
  CHECK(buildSSpace(ElementFamily::parse("afw"), mesh).ndof == 832);
  Triangulation fine = barycentricRefine(mesh);
  CHECK(buildUSpace(ElementFamily::parse("svrt1"), fine).ndof == 2304);
  CHECK(buildGSpace(ElementFamily::parse("svrt1"), fine).ndof == 9 * 384);
}

TEST_CASE("svrt builders reject unrefined meshes") {
  Triangulation mesh = uniformSquareMesh(2);
  CHECK_THROWS(buildGSpace(ElementFamily::parse("svrt1"), mesh));
  CHECK_THROWS(buildSSpace(ElementFamily::parse("svrt1"), mesh));
}

TEST_CASE("G basis functions are pointwise trace free") {
  for (const char* fam : {"peers", "afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(3);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace g = buildGSpace(ElementFamily::parse(fam), mesh);
    for (int t = 0; t < mesh.numTriangles(); t += 3) {
      for (int trial = 0; trial < 4; ++trial) {
        Vec2 x = randomPointIn(mesh, t);
        for (int i = 0; i < g.localSize(t); ++i)
          CHECK(std::abs(g.evalTensor(t, i, x).trace()) < 1e-13);
      }
    }
  }
}

TEST_CASE("U space reproduces constant fields exactly") {
  for (const char* fam : {"afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(3);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace u = buildUSpace(ElementFamily::parse(fam), mesh);
    Vec2 target{1.25, -0.5};
    // Both families carry the constant mode pair as the first two locals.
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(u.ndof);
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      coeffs[u.elem_dofs[t][0]] = target.x;
      coeffs[u.elem_dofs[t][1]] = target.y;
    }
    for (int t = 0; t < mesh.numTriangles(); t += 2) {
      Vec2 x = randomPointIn(mesh, t);
      Vec2 val;
      for (int i = 0; i < u.localSize(t); ++i)
        val = val + u.evalVector(t, i, x) * coeffs[u.elem_dofs[t][i]];
      CHECK(std::abs(val.x - target.x) < 1e-13);
      CHECK(std::abs(val.y - target.y) < 1e-13);
    }
  }
}

TEST_CASE("S basis divergence is consistent with finite differences") {
  for (const char* fam : {"peers", "afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(2);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace s = buildSSpace(ElementFamily::parse(fam), mesh);
    const double h = 1e-6;
    for (int t = 0; t < mesh.numTriangles(); t += 5) {
      Vec2 c = mesh.centroid(t);
      for (int i = 0; i < s.localSize(t); ++i) {
        Mat2 xp = s.evalTensor(t, i, {c.x + h, c.y});
        Mat2 xm = s.evalTensor(t, i, {c.x - h, c.y});
        Mat2 yp = s.evalTensor(t, i, {c.x, c.y + h});
        Mat2 ym = s.evalTensor(t, i, {c.x, c.y - h});
        Vec2 fd{(xp(0, 0) - xm(0, 0)) / (2 * h) + (yp(0, 1) - ym(0, 1)) / (2 * h),
                (xp(1, 0) - xm(1, 0)) / (2 * h) + (yp(1, 1) - ym(1, 1)) / (2 * h)};
        Vec2 dv = s.evalDiv(t, i, c);
        CHECK(std::abs(fd.x - dv.x) < 1e-6);
        CHECK(std::abs(fd.y - dv.y) < 1e-6);
      }
    }
  }
}

TEST_CASE("S space rows have continuous normal components across edges") {
  for (const char* fam : {"peers", "afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(2);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace s = buildSSpace(ElementFamily::parse(fam), mesh);
    Eigen::VectorXd coeffs(s.ndof);
    for (int i = 0; i < s.ndof; ++i) coeffs[i] = uniform(-1.0, 1.0);
    for (int e = 0; e < mesh.numEdges(); ++e) {
      if (mesh.isBoundaryEdge(e)) continue;
      int ta = mesh.edge_tris[e][0], tb = mesh.edge_tris[e][1];
      Vec2 n = mesh.edgeNormal(e);
      Vec2 pa = mesh.vertices[mesh.edges[e].a];
      Vec2 pb = mesh.vertices[mesh.edges[e].b];
      for (double xi : {0.21, 0.57, 0.86}) {
        Vec2 x = pa + (pb - pa) * xi;
        Mat2 va, vb;
        for (int i = 0; i < s.localSize(ta); ++i)
          va = va + s.evalTensor(ta, i, x) * coeffs[s.elem_dofs[ta][i]];
        for (int i = 0; i < s.localSize(tb); ++i)
          vb = vb + s.evalTensor(tb, i, x) * coeffs[s.elem_dofs[tb][i]];
        Vec2 ja = (va - vb).apply(n);
        CHECK(std::abs(ja.x) < 1e-11);
        CHECK(std::abs(ja.y) < 1e-11);
      }
    }
  }
}

TEST_CASE("constant tensors are represented exactly in every S space") {
  for (const char* fam : {"peers", "afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(2);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace s = buildSSpace(ElementFamily::parse(fam), mesh);
    Mat2 m{1.5, -0.25, 0.75, 2.0};
    Eigen::VectorXd coeffs = representConstantTensor(s, m);
    for (int t = 0; t < mesh.numTriangles(); t += 3) {
      Vec2 x = randomPointIn(mesh, t);
      Mat2 val;
      for (int i = 0; i < s.localSize(t); ++i)
        val = val + s.evalTensor(t, i, x) * coeffs[s.elem_dofs[t][i]];
      CHECK((val - m).frobNorm() < 1e-11);
    }
  }
}

TEST_CASE("G space is closed under pointwise transpose") {
  // A random member, transposed pointwise, must be representable: solve a
  // local least-squares fit and require zero residual.
  for (const char* fam : {"peers", "afw", "svrt1"}) {
    Triangulation mesh = uniformSquareMesh(2);
    if (ElementFamily::parse(fam).isSVRT()) mesh = barycentricRefine(mesh);
    FESpace g = buildGSpace(ElementFamily::parse(fam), mesh);
    Eigen::VectorXd coeffs(g.ndof);
    for (int i = 0; i < g.ndof; ++i) coeffs[i] = uniform(-1.0, 1.0);
    const QuadratureRule& rule = triangleRule(4);
    for (int t = 0; t < mesh.numTriangles(); t += 4) {
      const Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
      const Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
      const Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
      int nl = g.localSize(t);
      Eigen::MatrixXd basis(4 * rule.points.size(), nl);
      Eigen::VectorXd target(4 * rule.points.size());
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Vec2 x = p0 + e1 * rule.points[q].x + e2 * rule.points[q].y;
        Mat2 v;
        for (int i = 0; i < nl; ++i) {
          Mat2 phi = g.evalTensor(t, i, x);
          for (int c = 0; c < 4; ++c) basis(4 * q + c, i) = phi(c / 2, c % 2);
          v = v + phi * coeffs[g.elem_dofs[t][i]];
        }
        Mat2 vt = v.transpose();
        for (int c = 0; c < 4; ++c) target[4 * q + c] = vt(c / 2, c % 2);
      }
      Eigen::VectorXd fit = basis.colPivHouseholderQr().solve(target);
      CHECK((basis * fit - target).norm() < 1e-11);
    }
  }
}

TEST_CASE("rowwise curls of continuous piecewise quadratics lie in the SVRT stress space") {
  Triangulation base = uniformSquareMesh(2);
  Triangulation mesh = barycentricRefine(base);
  FESpace s = buildSSpace(ElementFamily::parse("svrt1"), mesh);
  // Random continuous piecewise quadratic via vertex + edge-midpoint values.
  std::vector<double> vval(mesh.numVertices()), eval(mesh.numEdges());
  for (double& v : vval) v = uniform(-1.0, 1.0);
  for (double& v : eval) v = uniform(-1.0, 1.0);
  const QuadratureRule& rule = triangleRule(3);
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    const Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
    const Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
    const Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
    // P2 nodal expansion of the scalar: lambda_i(2 lambda_i - 1) at vertices,
    // 4 lambda_i lambda_j at midpoints.  Work in barycentric coordinates of
    // the reference map.
    auto quad = [&](double a, double b) {
      double l0 = 1 - a - b, l1 = a, l2 = b;
      double val = vval[mesh.triangles[t][0]] * l0 * (2 * l0 - 1) +
                   vval[mesh.triangles[t][1]] * l1 * (2 * l1 - 1) +
                   vval[mesh.triangles[t][2]] * l2 * (2 * l2 - 1);
      // tri_edges[t][i] is opposite vertex i, so its midpoint pairs the other two.
      val += 4 * l1 * l2 * eval[mesh.tri_edges[t][0]];
      val += 4 * l0 * l2 * eval[mesh.tri_edges[t][1]];
      val += 4 * l0 * l1 * eval[mesh.tri_edges[t][2]];
      return val;
    };
    double det = e1.cross(e2);
    auto curlAt = [&](double a, double b) {
      const double h = 1e-6;
      // gradient in reference coords -> physical via inverse transpose
      double da = (quad(a + h, b) - quad(a - h, b)) / (2 * h);
      double db = (quad(a, b + h) - quad(a, b - h)) / (2 * h);
      Vec2 grad{(da * e2.y - db * e1.y) / det, (-da * e2.x + db * e1.x) / det};
      return Vec2{grad.y, -grad.x};  // perp of the gradient
    };
    int nl = s.localSize(t);
    for (int row = 0; row < 2; ++row) {
      Eigen::MatrixXd basis(2 * rule.points.size(), nl);
      Eigen::VectorXd target(2 * rule.points.size());
      for (size_t q = 0; q < rule.points.size(); ++q) {
        double a = rule.points[q].x, b = rule.points[q].y;
        Vec2 x = p0 + e1 * a + e2 * b;
        for (int i = 0; i < nl; ++i) {
          Mat2 phi = s.evalTensor(t, i, x);
          basis(2 * q, i) = phi(row, 0);
          basis(2 * q + 1, i) = phi(row, 1);
        }
        Vec2 c = curlAt(a, b);
        target[2 * q] = c.x;
        target[2 * q + 1] = c.y;
      }
      Eigen::VectorXd fit = basis.colPivHouseholderQr().solve(target);
      CHECK((basis * fit - target).norm() < 1e-7);  // limited by the FD gradient
    }
  }
}

TEST_CASE("traction dofs are flagged exactly on traction edges") {
  Rect rect;
  Triangulation mesh = uniformSquareMesh(4, rect, tractionRightTag(rect));
  FESpace s = buildSSpace(ElementFamily::parse("afw"), mesh);
  CHECK(!s.mean_trace_active);
  CHECK(static_cast<int>(s.traction_dofs.size()) == 4 * 4);  // 4 edges x 4 dofs
  Triangulation allDirichlet = uniformSquareMesh(4);
  FESpace s2 = buildSSpace(ElementFamily::parse("afw"), allDirichlet);
  CHECK(s2.mean_trace_active);
  CHECK(s2.traction_dofs.empty());
}
