// Manufactured-solution studies and numerical stability diagnostics:
// error norms and convergence rates, inf-sup and Korn constants, the
// trace-norm equivalence constants, and macroelement kernel certification.
#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dualmix/solver.hpp"

namespace dualmix {

// u = ((-m/k) sin(kx)cos(my), cos(kx) sin(my)),  div u = 0,
// p = -(1/2)((m/k)^2 sin^2(kx) + sin^2(my)),
// S = nu (grad u + grad u^T) - p I - (1/2) u (x) u,  f = nu (k^2 + m^2) u.
struct ManufacturedSolution {
  double k = M_PI;
  double m = M_PI / 2.0;
  double nu = 0.05;

  Vec2 velocity(const Vec2& x) const;
  Mat2 gradient(const Vec2& x) const;
  double pressure(const Vec2& x) const;
  Mat2 stress(const Vec2& x) const;
  Vec2 forcing(const Vec2& x) const;
};

// A mesh/space/system bundle; owns the meshes the spaces point into.
struct Problem {
  std::unique_ptr<Triangulation> base;     // unrefined mesh
  std::unique_ptr<Triangulation> refined;  // only for the SVRT family
  FESpace g, u, s;
  double h = 0.0;

  const Triangulation& mesh() const { return refined ? *refined : *base; }
};

// Uniform N x N mesh of (-1,1)^2, h = 2/N; traction tags the x = 1 edge.
Problem makeProblem(ElementFamily family, int n, bool traction_right);

AssembledSystem assembleManufactured(const Problem& pr,
                                     const ManufacturedSolution& ms);

struct ErrorRow {
  double h = 0.0;
  double gsym = 0.0, gskw = 0.0, u = 0.0, s = 0.0, divs = 0.0;
};

struct ConvergenceReport {
  std::string family;
  std::vector<ErrorRow> rows;  // ordered by decreasing h
  ErrorRow norms;              // exact-solution norms (h unused)
  ErrorRow rates;              // least-squares slopes (h = 0)
};

struct StabilityRow {
  double h = 0.0;
  double infsup = 0.0, korn = 0.0, trace_lo = 0.0, trace_hi = 0.0;
};

struct StabilityReport {
  std::string family;
  std::vector<StabilityRow> rows;
};

struct StudyConfig {
  ElementFamily family;
  std::vector<int> meshes;      // N values, increasing
  bool traction_right = true;
  double nu = 0.05;
  double k = M_PI;
  double m = M_PI / 2.0;
  SolverConfig solver;
  bool condense = false;        // condensed linear algebra (SVRT only)
  double rate_hmax = 1e30;      // rows with h <= rate_hmax enter the rate fit
};

ErrorRow errorNorms(const FESpace& gsp, const FESpace& usp, const FESpace& ssp,
                    const SolutionFields& fields, const ManufacturedSolution& ms);
// L2 norms of (grad u)^sym, (grad u)^skw, u, S, div S, refinement-converged.
ErrorRow exactNorms(const ManufacturedSolution& ms);

ConvergenceReport convergenceStudy(const StudyConfig& cfg);
StabilityReport stabilityStudy(const StudyConfig& cfg);

// sqrt of the smallest generalized eigenvalue of B X^{-1} B^T against the
// stress Gram |S|^2 + |div S|^2 (L2 surrogates).
double infsupConstant(const FESpace& gsp, const FESpace& usp, const FESpace& ssp);
// max of |(G^skw, u)| / |G^sym| over the kernel of the b operator.
double kornConstant(const FESpace& gsp, const FESpace& usp, const FESpace& ssp);
// Extreme generalized eigenvalues of |S0|^2 + |div S|^2 vs |S|^2 + |div S|^2.
std::pair<double, double> traceEquivalenceConstants(const FESpace& ssp);

struct KernelResult {
  int dim = 0;
  // Residual of projecting the (1-dim) kernel onto span{I}; < 1e-10 certifies
  // the basis is proportional to the identity.
  double identity_residual = 1.0;
};
// Local orthogonality kernel on one macroelement; include_skw=false drops the
// skew-orthogonality constraints (the documented negative control).
KernelResult macroelementKernel(const FESpace& gsp, const FESpace& usp,
                                const FESpace& ssp, const MacroElement& patch,
                                bool include_skw = true);

std::string toCsv(const ConvergenceReport& report);
std::string toCsv(const StabilityReport& report);
std::string toMarkdown(const ConvergenceReport& report);
std::string toMarkdown(const StabilityReport& report);

}  // namespace dualmix
