#include <Eigen/Dense>

#include "doctest.h"
#include "dualmix/solver.hpp"
#include "dualmix/verify.hpp"

using namespace dualmix;

TEST_CASE("composite element dimensions") {
  LocalDims d = localSpaceDims();
  CHECK(d.g == 27);
  CHECK(d.u == 18);
  CHECK(d.s == 36);
  CHECK(d.s_condensed == 15);
}

TEST_CASE("patch stress transform is invertible and splits 12+3+21") {
  Triangulation base = uniformSquareMesh(2);
  Triangulation mesh = barycentricRefine(base);
  FESpace g = buildGSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace s = buildSSpace(ElementFamily::parse("svrt1"), mesh);
  auto patches = buildParentPatches(g, u, s);
  CHECK(static_cast<int>(patches.size()) == base.numTriangles());
  for (const ParentPatch& p : patches) {
    CHECK(static_cast<int>(p.s_dofs.size()) == 36);
    CHECK(p.n_s_edge == 12);
    CHECK(p.n_s_outer == 15);
    CHECK(p.t_s.rows() == 36);
    CHECK(p.t_s.cols() == 36);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(p.t_s);
    CHECK(lu.rank() == 36);
    CHECK(p.t_u.rows() == 18);
    Eigen::FullPivLU<Eigen::MatrixXd> lu2(p.t_u);
    CHECK(lu2.rank() == 18);
  }
}

TEST_CASE("condensed interior stress basis has zero parent-edge moments") {
  Triangulation base = uniformSquareMesh(1);
  Triangulation mesh = barycentricRefine(base);
  FESpace g = buildGSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace s = buildSSpace(ElementFamily::parse("svrt1"), mesh);
  auto patches = buildParentPatches(g, u, s);
  for (const ParentPatch& p : patches) {
    // Interior columns (after the 12 edge + 3 symmetry columns) must not
    // touch the parent-edge dofs, which are listed first in s_dofs.
    Eigen::MatrixXd interior = p.t_s.rightCols(36 - p.n_s_outer);
    CHECK(interior.topRows(p.n_s_edge).cwiseAbs().maxCoeff() < 1e-9);
    // Edge-condensed columns have unit moments on their own edge dof.
    Eigen::MatrixXd edge = p.t_s.leftCols(p.n_s_edge).topRows(p.n_s_edge);
    CHECK((edge - Eigen::MatrixXd::Identity(p.n_s_edge, p.n_s_edge))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("condensed and uncondensed solutions coincide on N in {4,8}") {
  ManufacturedSolution ms;
  for (int n : {4, 8}) {
    Problem pr = makeProblem(ElementFamily::parse("svrt1"), n, true);
    AssembledSystem sys = assembleManufactured(pr, ms);
    SolverConfig cfg;
    SolutionFields a = solveNavierStokes(pr.g, pr.u, pr.s, sys, cfg);
    auto patches = buildParentPatches(pr.g, pr.u, pr.s);
    SolutionFields b =
        solveNavierStokesCondensed(pr.g, pr.u, pr.s, sys, cfg, patches);
    CHECK(b.converged);
    CHECK(b.iterations == a.iterations);
    CHECK((a.g - b.g).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.s - b.s).cwiseAbs().maxCoeff() < 1e-8);
    int reduced = condensedUnknowns(sys, patches);
    CHECK(reduced < (pr.g.ndof + pr.u.ndof + pr.s.ndof) / 3);
  }
}
