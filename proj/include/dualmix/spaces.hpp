// Discrete spaces G_h, U_h, S_h for the three element families:
//
//   AugmentedPEERS: G = trace-free (P1 cont skew + P1 disc sym),
//                   U = P0^2, S = RT0 rows + P0^2 (x) (grad b)^perp
//   AugmentedAFW:   G = trace-free (P0 disc skew + P1 disc sym),
//                   U = P0^2, S = BDM1 rows
//   SVRT(1):        G = trace-free P1 disc, U = P1 disc^2, S = RT1 rows,
//                   all on a barycentric refinement
//
// S spaces are rowwise H(div)-conforming; conformity comes from globally
// defined edge-moment degrees of freedom (no sign bookkeeping: both adjacent
// elements evaluate the same functional on the globally oriented edge).
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualmix/mesh.hpp"
#include "dualmix/poly.hpp"

namespace dualmix {

enum class Role { G, U, S };

enum class FamilyKind { AugmentedPEERS, AugmentedAFW, SVRT };

struct ElementFamily {
  FamilyKind kind = FamilyKind::AugmentedAFW;
  int order = 1;  // SVRT order; only k = 1 is shipped

  bool isSVRT() const { return kind == FamilyKind::SVRT; }
  std::string name() const;
  static ElementFamily parse(const std::string& tag);
};

class FESpace {
 public:
  Role role = Role::G;
  ElementFamily family;
  const Triangulation* mesh = nullptr;
  int ndof = 0;

  std::vector<std::vector<int>> elem_dofs;
  // Local shape functions, one entry per element.  Tensor-valued for G and S
  // (polynomials in the element-scaled coordinate), vector-valued for U.
  std::vector<std::vector<TensorPoly>> tbasis;
  std::vector<std::vector<VecPoly>> vbasis;
  // Rowwise divergence of the S shape functions (physical scale baked in).
  std::vector<std::vector<VecPoly>> divs;

  std::vector<Vec2> elem_center;
  std::vector<double> elem_scale;

  // S-space constraint data.
  std::vector<int> traction_dofs;
  std::vector<char> dof_on_traction;
  bool mean_trace_active = false;

  Vec2 local(int e, const Vec2& p) const {
    return (p - elem_center[e]) / elem_scale[e];
  }
  Mat2 evalTensor(int e, int k, const Vec2& p) const {
    return tbasis[e][k].eval(local(e, p));
  }
  Vec2 evalVector(int e, int k, const Vec2& p) const {
    return vbasis[e][k].eval(local(e, p));
  }
  Vec2 evalDiv(int e, int k, const Vec2& p) const {
    return divs[e][k].eval(local(e, p));
  }
  int localSize(int e) const { return static_cast<int>(elem_dofs[e].size()); }
};

FESpace buildGSpace(ElementFamily family, const Triangulation& mesh);
FESpace buildUSpace(ElementFamily family, const Triangulation& mesh);
// Traction edges default to the mesh's Traction-tagged boundary edges.
// The mean-trace-zero constraint is active iff no traction edge exists.
FESpace buildSSpace(ElementFamily family, const Triangulation& mesh);
FESpace buildSSpace(ElementFamily family, const Triangulation& mesh,
                    const std::vector<int>& traction_edges);

// Diagnostic builders that skip the refinement requirement of the SVRT
// builders (used by the deliberately unstable triple in the stability suite).
FESpace buildGSpaceUnchecked(ElementFamily family, const Triangulation& mesh);
FESpace buildUSpaceUnchecked(ElementFamily family, const Triangulation& mesh);

// Coefficient vector representing the constant tensor M in an S-space
// (constants are contained in all shipped stress spaces).
Eigen::VectorXd representConstantTensor(const FESpace& sspace, const Mat2& m);

// Local dimensions of the SVRT(1) composite element on one parent triangle:
// (dim G, dim U, dim S, dim of the condensed stress space).
struct LocalDims {
  int g = 0, u = 0, s = 0, s_condensed = 0;
};
LocalDims localSpaceDims(const Vec2& p0, const Vec2& p1, const Vec2& p2);
LocalDims localSpaceDims();  // reference triangle

}  // namespace dualmix
