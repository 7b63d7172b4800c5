// Nonlinear solves of the discrete dual-mixed system
//
//   [ A + C(x)  -B^T ] [x]   [ load ]
//   [ B          0   ] [S] = [ dirichlet ]
//
// (plus the mean-trace multiplier row/column when active, and with traction
// dofs eliminated).  The default iteration is Picard: C(x_k) is frozen and
// the linear saddle problem re-solved; the skew structure of c keeps every
// Picard system solvable.  Newton is an opt-in accelerator that kicks in
// once the Picard residual is small.
#pragma once

#include <vector>

#include "dualmix/condense.hpp"
#include "dualmix/forms.hpp"

namespace dualmix {

struct SolverConfig {
  double tol = 1e-10;       // infinity norm of the algebraic residual
  int max_iter = 50;
  bool newton = false;
  double newton_threshold = 1e-3;  // switch to Newton below this residual
  double damping = 1.0;
  bool verbose = false;
};

struct SolutionFields {
  Eigen::VectorXd g, u, s;
  double multiplier = 0.0;  // mean-trace Lagrange multiplier
  // Piecewise quadratic pressure, 6 monomial coefficients per element in the
  // element-scaled frame (filled by recoverPressure).
  Eigen::VectorXd pressure;
  std::vector<double> history;  // residual per iteration
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double energy_gap = 0.0;  // relative defect of (A(G),G) = (f,u) + b(S,(G,u))
};

// One linear solve with the convection block omitted.
SolutionFields solveStokes(const FESpace& gsp, const FESpace& usp,
                           const FESpace& ssp, const AssembledSystem& sys);

SolutionFields solveNavierStokes(const FESpace& gsp, const FESpace& usp,
                                 const FESpace& ssp, const AssembledSystem& sys,
                                 const SolverConfig& config);

// Same fixed point as solveNavierStokes; each linear solve eliminates the
// patch-interior unknowns exactly and solves only for the interface ones.
SolutionFields solveNavierStokesCondensed(const FESpace& gsp, const FESpace& usp,
                                          const FESpace& ssp,
                                          const AssembledSystem& sys,
                                          const SolverConfig& config,
                                          const std::vector<ParentPatch>& patches);

// Number of globally coupled unknowns of the condensed solve.
int condensedUnknowns(const AssembledSystem& sys,
                      const std::vector<ParentPatch>& patches);

// p = -1/2 (tr S + 1/2 |u|^2), projected elementwise onto quadratics
// (exact for every shipped family).
void recoverPressure(const FESpace& usp, const FESpace& ssp, SolutionFields& out);
double evalPressure(const FESpace& ssp, const SolutionFields& fields, int t,
                    const Vec2& x);

}  // namespace dualmix
