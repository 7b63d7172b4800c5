// Stability diagnostics: the Lanczos-based constants against dense
// eigenvalue oracles, macroelement kernel certification, and the
// centroid-collinearity predicate.
#include <algorithm>
#include <array>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "dualmix/verify.hpp"

using namespace dualmix;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd dense(const SpMat& m) { return MatrixXd(m); }

// Orthonormal basis of the null space of the rows of m.
MatrixXd rowsNull(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-11 * svd.singularValues()(0)) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

struct DenseConstants {
  double infsup, korn, trace_lo, trace_hi;
};

// Same three constants computed with dense generalized eigensolvers on
// explicitly constructed constraint null spaces.
DenseConstants denseOracle(const Problem& pr) {
  MatrixXd X = dense(assembleGUGram(pr.g, pr.u));
  MatrixXd B = dense(assembleB(pr.s, pr.g, pr.u));
  MatrixXd N = dense(assembleSGram(pr.s, false));
  MatrixXd K = dense(assembleGUSymGram(pr.g, pr.u));
  MatrixXd Q1 = dense(assembleSGram(pr.s, true));
  VectorXd c = meanTraceVector(pr.s);
  MatrixXd Z = rowsNull(c.transpose());

  DenseConstants out{};
  MatrixXd Xi = X.ldlt().solve(B.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> schur(
      MatrixXd(Z.transpose() * (B * Xi) * Z), MatrixXd(Z.transpose() * N * Z));
  out.infsup = std::sqrt(schur.eigenvalues().minCoeff());

  MatrixXd W = rowsNull(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> korn(
      MatrixXd(W.transpose() * K * W), MatrixXd(W.transpose() * X * W));
  out.korn = std::sqrt(1.0 / korn.eigenvalues().minCoeff() - 1.0);

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> trace(
      MatrixXd(Z.transpose() * Q1 * Z), MatrixXd(Z.transpose() * N * Z));
  out.trace_lo = trace.eigenvalues().minCoeff();
  out.trace_hi = trace.eigenvalues().maxCoeff();
  return out;
}

}  // namespace

TEST_CASE("iterative stability constants match dense oracle") {
  for (const char* name : {"peers", "afw", "svrt1"}) {
    CAPTURE(name);
    Problem pr = makeProblem(ElementFamily::parse(name), 2, false);
    DenseConstants ref = denseOracle(pr);
    CHECK(infsupConstant(pr.g, pr.u, pr.s) ==
          doctest::Approx(ref.infsup).epsilon(1e-7));
    CHECK(kornConstant(pr.g, pr.u, pr.s) ==
          doctest::Approx(ref.korn).epsilon(1e-7));
    auto [lo, hi] = traceEquivalenceConstants(pr.s);
    CHECK(lo == doctest::Approx(ref.trace_lo).epsilon(1e-7));
    CHECK(hi == doctest::Approx(ref.trace_hi).epsilon(1e-7));
  }
}

TEST_CASE("stability constants reject traction problems") {
  // The bordered saddle operators are singular there; demand a clear error.
  Problem pr = makeProblem(ElementFamily::parse("afw"), 2, true);
  CHECK_THROWS_AS(infsupConstant(pr.g, pr.u, pr.s), std::invalid_argument);
  CHECK_THROWS_AS(kornConstant(pr.g, pr.u, pr.s), std::invalid_argument);
  CHECK_THROWS_AS(traceEquivalenceConstants(pr.s), std::invalid_argument);
}

TEST_CASE("macroelement kernel is span{I} on vertex patches (peers)") {
  Triangulation mesh = uniformSquareMesh(6);
  ElementFamily fam = ElementFamily::parse("peers");
  FESpace g = buildGSpace(fam, mesh);
  FESpace u = buildUSpace(fam, mesh);
  FESpace s = buildSSpace(fam, mesh);
  auto patches = extractMacroelements(mesh, MacroKind::VertexPatch);
  REQUIRE(patches.size() >= 20);
  for (const auto& p : patches) {
    KernelResult r = macroelementKernel(g, u, s, p, true);
    CHECK(r.dim == 1);
    CHECK(r.identity_residual < 1e-10);
    // Without the skew-orthogonality rows the kernel gains spurious modes.
    KernelResult neg = macroelementKernel(g, u, s, p, false);
    CHECK(neg.dim >= 2);
  }
}

TEST_CASE("macroelement kernel is span{I} on facet patches (afw)") {
  Triangulation mesh = uniformSquareMesh(6);
  ElementFamily fam = ElementFamily::parse("afw");
  FESpace g = buildGSpace(fam, mesh);
  FESpace u = buildUSpace(fam, mesh);
  FESpace s = buildSSpace(fam, mesh);
  auto patches = extractMacroelements(mesh, MacroKind::FacetPatch);
  REQUIRE(patches.size() >= 20);
  for (const auto& p : patches) {
    KernelResult r = macroelementKernel(g, u, s, p, true);
    CHECK(r.dim == 1);
    CHECK(r.identity_residual < 1e-10);
  }
}

TEST_CASE("macroelement kernel is span{I} on parent patches (svrt1)") {
  Triangulation base = uniformSquareMesh(4);
  Triangulation mesh = barycentricRefine(base);
  ElementFamily fam = ElementFamily::parse("svrt1");
  FESpace g = buildGSpace(fam, mesh);
  FESpace u = buildUSpace(fam, mesh);
  FESpace s = buildSSpace(fam, mesh);
  REQUIRE(base.numTriangles() >= 20);
  for (int p = 0; p < base.numTriangles(); ++p) {
    MacroElement me{MacroKind::FacetPatch, {3 * p, 3 * p + 1, 3 * p + 2}, p};
    KernelResult r = macroelementKernel(g, u, s, me, true);
    CHECK(r.dim == 1);
    CHECK(r.identity_residual < 1e-10);
  }
}

TEST_CASE("collinear centroids give zero margin") {
  std::array<Vec2, 4> on_line = {Vec2{0.0, 1.0}, Vec2{1.0, 1.5},
                                 Vec2{2.0, 2.0}, Vec2{-3.0, -0.5}};
  CHECK(centroidCollinearityMargin(on_line) < 1e-14);
}

TEST_CASE("reference facet configuration has positive margin") {
  // Central triangle (0,0), (-3,0), (0,-3) with one neighbor across each
  // edge; centroids (-1,-1), (-4/3,2/3), (2/3,-4/3), (-2,-2).
  Triangulation mesh;
  mesh.vertices = {{0, 0}, {-3, 0}, {0, -3}, {-1, 2}, {2, -1}, {-3, -3}};
  mesh.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 4}, {1, 5, 2}};
  mesh.buildEdges([](const Vec2&) { return BoundaryTag::Dirichlet; });
  MacroElement patch{MacroKind::FacetPatch, {0, 1, 2, 3}, 0};
  double margin = centroidCollinearityMargin(patch, mesh);
  CHECK(margin > 0.1);

  MacroElement bad{MacroKind::FacetPatch, {0, 1, 2}, 0};
  CHECK_THROWS(centroidCollinearityMargin(bad, mesh));
}

TEST_CASE("random facet patches always have positive margin") {
  std::mt19937 rng(0x0c011);
  std::uniform_real_distribution<double> jiggle(-0.3, 0.3);
  int checked = 0;
  while (checked < 1000) {
    Triangulation mesh = uniformSquareMesh(8);
    double h = 2.0 / 8.0;
    std::vector<Vec2> saved = mesh.vertices;
    // Perturb interior vertices; redraw whole meshes that fold a triangle.
    for (int v = 0; v < mesh.numVertices(); ++v) {
      if (mesh.vertexOnBoundary(v)) continue;
      mesh.vertices[v].x += jiggle(rng) * h;
      mesh.vertices[v].y += jiggle(rng) * h;
    }
    bool valid = true;
    for (int t = 0; t < mesh.numTriangles(); ++t)
      if (mesh.signedArea(t) < 1e-6) valid = false;
    if (!valid) continue;
    for (const auto& p : extractMacroelements(mesh, MacroKind::FacetPatch)) {
      CHECK(centroidCollinearityMargin(p, mesh) > 0.0);
      ++checked;
    }
  }
}

TEST_CASE("margin sign is affine invariant") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::array<Vec2, 4> spread = {Vec2{0.0, 0.0}, Vec2{1.0, 0.2},
                                Vec2{0.3, 1.1}, Vec2{-0.8, 0.5}};
  std::array<Vec2, 4> flat = {Vec2{0.0, 0.0}, Vec2{1.0, 1.0}, Vec2{2.0, 2.0},
                              Vec2{-1.0, -1.0}};
  for (int trial = 0; trial < 50; ++trial) {
    double a = entry(rng), b = entry(rng), c = entry(rng), d = entry(rng);
    if (std::abs(a * d - b * c) < 0.1) continue;  // keep the map invertible
    Vec2 shift{entry(rng), entry(rng)};
    auto map = [&](const Vec2& p) {
      return Vec2{a * p.x + b * p.y + shift.x, c * p.x + d * p.y + shift.y};
    };
    std::array<Vec2, 4> ms, mf;
    for (int i = 0; i < 4; ++i) {
      ms[i] = map(spread[i]);
      mf[i] = map(flat[i]);
    }
    // The margin is a square root, so roundoff in the zero case surfaces at
    // sqrt(machine eps) times the coordinate scale.
    CHECK(centroidCollinearityMargin(ms) > 1e-3);
    CHECK(centroidCollinearityMargin(mf) < 1e-6);
  }
}
