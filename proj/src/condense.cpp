#include "dualmix/condense.hpp"

#include <algorithm>
#include <stdexcept>

#include "dualmix/forms.hpp"

namespace dualmix {

namespace {

constexpr double kRankTol = 1e-9;

// Columns of V spanning the null space of M (relative tolerance on sigma).
Eigen::MatrixXd nullSpace(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  double cut = sigma.size() ? sigma(0) * kRankTol : 0.0;
  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > cut) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

Eigen::MatrixXd pseudoInverse(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  double cut = sigma(0) * kRankTol;
  Eigen::VectorXd inv = sigma;
  for (int i = 0; i < inv.size(); ++i) inv(i) = sigma(i) > cut ? 1.0 / sigma(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

bool isParentEdgeDof(const FESpace& ssp, int dof) {
  const Triangulation& mesh = *ssp.mesh;
  if (dof >= 4 * mesh.numEdges()) return false;  // child interior dof
  const Edge& e = mesh.edges[dof / 4];
  return e.a < mesh.parent_vertex_count && e.b < mesh.parent_vertex_count;
}

}  // namespace

std::vector<ParentPatch> buildParentPatches(const FESpace& gsp, const FESpace& usp,
                                            const FESpace& ssp) {
  const Triangulation& mesh = *ssp.mesh;
  if (!mesh.isRefinement())
    throw std::invalid_argument("static condensation needs a barycentric refinement");

  std::vector<ParentPatch> patches(mesh.parent_triangle_count);
  for (int p = 0; p < mesh.parent_triangle_count; ++p) {
    ParentPatch& patch = patches[p];
    patch.children = {3 * p, 3 * p + 1, 3 * p + 2};

    for (int c = 0; c < 3; ++c) {
      int t = patch.children[c];
      for (int d : gsp.elem_dofs[t]) {
        patch.g_pos[c].push_back(static_cast<int>(patch.g_dofs.size()));
        patch.g_dofs.push_back(d);
      }
      for (int d : usp.elem_dofs[t]) {
        patch.u_pos[c].push_back(static_cast<int>(patch.u_dofs.size()));
        patch.u_dofs.push_back(d);
      }
    }

    // Unique stress dofs: parent-edge first (ascending), then the rest.
    std::vector<int> edge_dofs, inner_dofs;
    for (int c = 0; c < 3; ++c)
      for (int d : ssp.elem_dofs[patch.children[c]]) {
        auto& bucket = isParentEdgeDof(ssp, d) ? edge_dofs : inner_dofs;
        if (std::find(bucket.begin(), bucket.end(), d) == bucket.end())
          bucket.push_back(d);
      }
    std::sort(edge_dofs.begin(), edge_dofs.end());
    std::sort(inner_dofs.begin(), inner_dofs.end());
    patch.n_s_edge = static_cast<int>(edge_dofs.size());
    patch.s_dofs = edge_dofs;
    patch.s_dofs.insert(patch.s_dofs.end(), inner_dofs.begin(), inner_dofs.end());
    for (int c = 0; c < 3; ++c)
      for (int d : ssp.elem_dofs[patch.children[c]]) {
        auto it = std::find(patch.s_dofs.begin(), patch.s_dofs.end(), d);
        patch.s_pos[c].push_back(static_cast<int>(it - patch.s_dofs.begin()));
      }

    const int ng = static_cast<int>(patch.g_dofs.size());
    const int nu = static_cast<int>(patch.u_dofs.size());
    const int ns = static_cast<int>(patch.s_dofs.size());
    const int nse = patch.n_s_edge;

    // Patch-local mass and b-form blocks.
    Eigen::MatrixXd mass_u = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd b_sg = Eigen::MatrixXd::Zero(ns, ng);  // (T_i, H_j)
    Eigen::MatrixXd b_su = Eigen::MatrixXd::Zero(ns, nu);  // (div T_i, u_j)
    for (int c = 0; c < 3; ++c) {
      int t = patch.children[c];
      Eigen::MatrixXd mu = elemMassU(usp, t);
      Eigen::MatrixXd b = elemB(ssp, gsp, usp, t);
      int ngl = gsp.localSize(t), nul = usp.localSize(t);
      for (int i = 0; i < nul; ++i)
        for (int j = 0; j < nul; ++j)
          mass_u(patch.u_pos[c][i], patch.u_pos[c][j]) += mu(i, j);
      for (int i = 0; i < ssp.localSize(t); ++i) {
        for (int j = 0; j < ngl; ++j)
          b_sg(patch.s_pos[c][i], patch.g_pos[c][j]) += b(i, j);
        for (int j = 0; j < nul; ++j)
          b_su(patch.s_pos[c][i], patch.u_pos[c][j]) += b(i, ngl + j);
      }
    }

    // Velocity transform: parent-P1 modes, then an L2-orthogonal complement.
    Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(nu, 6);
    for (int c = 0; c < 3; ++c) {
      int t = patch.children[c];
      Vec2 ctr = usp.elem_center[t];
      double s = usp.elem_scale[t];
      // Child-local dofs are coefficients of e_comp * {1, xi, eta}; the
      // physical parent modes e_comp * {1, x, y} expand as below.
      for (int comp = 0; comp < 2; ++comp) {
        p1(patch.u_pos[c][0 + comp], 2 * 0 + comp) += 1.0;         // mode 1
        p1(patch.u_pos[c][0 + comp], 2 * 1 + comp) += ctr.x;       // mode x
        p1(patch.u_pos[c][2 + comp], 2 * 1 + comp) += s;
        p1(patch.u_pos[c][0 + comp], 2 * 2 + comp) += ctr.y;       // mode y
        p1(patch.u_pos[c][4 + comp], 2 * 2 + comp) += s;
      }
    }
    Eigen::MatrixXd u_comp = nullSpace(p1.transpose() * mass_u);  // nu x 12
    patch.t_u.resize(nu, nu);
    patch.t_u << p1, u_comp;

    // Stress transform.  Constraints: weak symmetry against the skew part of
    // the local G space, and divergence orthogonal to the velocity complement.
    std::vector<int> skew_cols;
    for (int j = 0; j < ng; ++j)
      if (j % 3 == 2) skew_cols.push_back(j);  // E_skw * mode columns
    Eigen::MatrixXd constraints(static_cast<int>(skew_cols.size()) + u_comp.cols(),
                                ns);
    for (size_t r = 0; r < skew_cols.size(); ++r)
      constraints.row(static_cast<int>(r)) = b_sg.col(skew_cols[r]).transpose();
    constraints.bottomRows(u_comp.cols()) = (b_su * u_comp).transpose();

    Eigen::MatrixXd n = nullSpace(constraints);  // ns x (expected 15)
    Eigen::MatrixXd pn = n.topRows(nse);         // parent-edge moments
    Eigen::MatrixXd edge_basis = n * pseudoInverse(pn);  // unit edge moments
    Eigen::MatrixXd sym_basis = n * nullSpace(pn);       // zero edge moments
    {
      Eigen::JacobiSVD<Eigen::MatrixXd> chk(pn);
      if (chk.rank() < nse)
        throw std::runtime_error("condensed stress basis: edge moments degenerate");
    }

    // Interior complement inside the zero-edge-moment subspace.
    int nz = ns - nse;
    Eigen::MatrixXd k = sym_basis.bottomRows(nz);
    Eigen::HouseholderQR<Eigen::MatrixXd> kqr(k);
    Eigen::MatrixXd kq =
        kqr.householderQ() * Eigen::MatrixXd::Identity(nz, k.cols());
    Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(nz, nz) - kq * kq.transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pqr(proj);
    Eigen::MatrixXd pq = pqr.householderQ() *
                         Eigen::MatrixXd::Identity(nz, nz - k.cols());

    patch.n_s_outer = nse + static_cast<int>(sym_basis.cols());
    patch.t_s = Eigen::MatrixXd::Zero(ns, patch.n_s_outer + (nz - k.cols()));
    if (patch.t_s.cols() != ns)
      throw std::runtime_error("condensed stress basis dimension mismatch");
    patch.t_s.leftCols(nse) = edge_basis;
    patch.t_s.middleCols(nse, sym_basis.cols()) = sym_basis;
    patch.t_s.bottomRightCorner(nz, nz - k.cols()) = pq;
  }
  return patches;
}

LocalDims localSpaceDims(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  Triangulation parent = singleTriangleMesh(p0, p1, p2);
  Triangulation mesh = barycentricRefine(parent);
  ElementFamily fam{FamilyKind::SVRT, 1};
  FESpace g = buildGSpace(fam, mesh);
  FESpace u = buildUSpace(fam, mesh);
  FESpace s = buildSSpace(fam, mesh);
  auto patches = buildParentPatches(g, u, s);
  LocalDims dims;
  dims.g = static_cast<int>(patches[0].g_dofs.size());
  dims.u = static_cast<int>(patches[0].u_dofs.size());
  dims.s = static_cast<int>(patches[0].s_dofs.size());
  dims.s_condensed = patches[0].n_s_outer;
  return dims;
}

LocalDims localSpaceDims() {
  return localSpaceDims(Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1});
}

}  // namespace dualmix
