// Static condensation of the composite element on a barycentrically refined
// mesh.  On each parent triangle the stress space (36 local dofs: 12 on the
// parent edges, 12 on the spokes, 12 child interior) is re-based as
//
//   12 "edge" functions      unit parent-edge moments, weakly symmetric,
//                            divergence orthogonal to the non-parent-P1
//                            part of the local velocity space,
//    3 "sym-average" modes   same constraints, zero parent-edge moments,
//   21 interior functions    zero parent-edge moments, complement.
//
// The velocity space is re-based as 6 parent-P1 modes plus a 12-dim
// L2-orthogonal complement.  Interface unknowns (velocity parent modes,
// stress edge + sym-average modes) couple across parents; everything else is
// local to the parent and can be eliminated exactly, so the condensed solve
// reproduces the uncondensed iterates.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dualmix/spaces.hpp"

namespace dualmix {

struct ParentPatch {
  std::array<int, 3> children{};
  // Local-to-global dof maps.  s_dofs: the 36 unique stress dofs, parent-edge
  // dofs first in ascending global order, then spokes, then child interior.
  std::vector<int> g_dofs;  // 27
  std::vector<int> u_dofs;  // 18
  std::vector<int> s_dofs;  // 36
  int n_s_edge = 12;        // leading parent-edge dofs within s_dofs

  // Basis transforms: columns are new basis vectors in local dof coordinates.
  // t_u: [6 parent-P1 modes | 12 complement]; t_s: [12 edge | 3 sym | 21 int].
  Eigen::MatrixXd t_u;  // 18 x 18
  Eigen::MatrixXd t_s;  // 36 x 36
  int n_s_outer = 15;   // edge + sym-average columns

  // Scatter from child-local dof positions to patch-local positions:
  // child_pos[c][k] is the patch-local index of dof k of child c.
  std::array<std::vector<int>, 3> g_pos, u_pos, s_pos;
};

// Requires SVRT spaces on a barycentric refinement.
std::vector<ParentPatch> buildParentPatches(const FESpace& gsp, const FESpace& usp,
                                            const FESpace& ssp);

}  // namespace dualmix
