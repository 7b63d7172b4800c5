// Bilinear/trilinear forms of the dual-mixed saddle problem
//
//   a((G,u),(H,v)) = (A(G), H)
//   b(S,(H,v))     = (S, H) + (div S, v)
//   c((F,w),(G,u),(H,v)) = 1/2 [ (G w, v) - (H w, u) ]
//
// assembled over product dofs x = [G dofs, U dofs].  Block layout of the
// discrete problem:
//
//   [ A + C(w)  -B^T ] [x]   [ load ]
//   [ B          0   ] [S] = [ dirichlet ]
//
// Dirichlet data is natural here (it enters through the S-test equation);
// traction data is essential (prescribed S dofs on traction edges).
#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "dualmix/spaces.hpp"

namespace dualmix {

using SpMat = Eigen::SparseMatrix<double>;
using VecFn = std::function<Vec2(const Vec2&)>;
using TenFn = std::function<Mat2(const Vec2&)>;

struct ConstitutiveLaw {
  double nu = 0.05;
  Mat2 apply(const Mat2& g) const { return (g + g.transpose()) * nu; }
};

// Dense element kernels (shared by global assembly and static condensation).
// Column/row order follows elem_dofs of the respective space.
Eigen::MatrixXd elemA(const FESpace& gsp, const ConstitutiveLaw& law, int t);
// (local S) x (local G + local U) block of b.
Eigen::MatrixXd elemB(const FESpace& ssp, const FESpace& gsp, const FESpace& usp,
                      int t);
// C(w): rows test (H,v), cols trial (G,u); w is the velocity of `state`
// (layout [G dofs, U dofs]).
Eigen::MatrixXd elemConvection(const FESpace& gsp, const FESpace& usp, int t,
                               const Eigen::VectorXd& state);
// Matrix of x -> c(x, x_w, .), the other Newton linearization term.
Eigen::MatrixXd elemConvectionFirstSlot(const FESpace& gsp, const FESpace& usp,
                                        int t, const Eigen::VectorXd& state);
Eigen::MatrixXd elemMassU(const FESpace& usp, int t);
Eigen::VectorXd elemLoad(const FESpace& usp, int t, const VecFn& f, int degree);

SpMat assembleA(const FESpace& gsp, const FESpace& usp, const ConstitutiveLaw& law);
SpMat assembleB(const FESpace& ssp, const FESpace& gsp, const FESpace& usp);
SpMat assembleConvection(const FESpace& gsp, const FESpace& usp,
                         const Eigen::VectorXd& state);
SpMat assembleConvectionFirstSlot(const FESpace& gsp, const FESpace& usp,
                                  const Eigen::VectorXd& state);
// (f, v) in the U rows of a length nG+nU vector.
Eigen::VectorXd assembleLoad(const FESpace& gsp, const FESpace& usp, const VecFn& f,
                             int degree = 12);
// Boundary term of the S-test equation: int_{Dirichlet edges} g . (T n_out).
Eigen::VectorXd assembleDirichletData(const FESpace& ssp, const VecFn& g,
                                      int degree = 12);
// Mean-trace constraint vector c_i = int tr(T_i).
Eigen::VectorXd meanTraceVector(const FESpace& ssp);
// Edge-moment interpolant of the exact stress on the traction dofs
// (zero elsewhere).
Eigen::VectorXd interpolateTraction(const FESpace& ssp, const TenFn& exact_stress,
                                    int degree = 12);

// L2 Gram matrices used by the stability diagnostics.
SpMat assembleGUGram(const FESpace& gsp, const FESpace& usp);
// (P(S), P(T)) + (div S, div T) with P the identity or the trace-free part.
SpMat assembleSGram(const FESpace& ssp, bool trace_free_part);
// (S^sym, T^sym) only, no divergence term.
SpMat assembleSSymGram(const FESpace& ssp);
// (G_i^sym, G_j^sym) over the combined (G,u) dofs (U block zero).
SpMat assembleGUSymGram(const FESpace& gsp, const FESpace& usp);

struct AssembledSystem {
  int nG = 0, nU = 0, nS = 0;
  SpMat A;  // (nG+nU)^2
  SpMat B;  // nS x (nG+nU)
  Eigen::VectorXd load;       // nG+nU
  Eigen::VectorXd dirichlet;  // nS
  Eigen::VectorXd trace_c;    // nS, empty when the constraint is inactive
  Eigen::VectorXd traction;   // nS, prescribed values (meaningful on traction dofs)
  bool mean_trace = false;
};

// `dirichlet_g` and `exact_stress` may be null (treated as zero data).
AssembledSystem assembleSystem(const FESpace& gsp, const FESpace& usp,
                               const FESpace& ssp, const ConstitutiveLaw& law,
                               const VecFn& f, const VecFn& dirichlet_g,
                               const TenFn& exact_stress, int data_degree = 12);

}  // namespace dualmix
