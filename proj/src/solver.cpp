#include "dualmix/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <stdexcept>
#include <iostream>

#include "dualmix/quadrature.hpp"

namespace dualmix {

namespace {

int guSize(const AssembledSystem& sys) { return sys.nG + sys.nU; }
int totalSize(const AssembledSystem& sys) {
  return guSize(sys) + sys.nS + (sys.mean_trace ? 1 : 0);
}

// Traction dofs are fixed to their interpolated values; rows/columns are
// eliminated symmetrically.
struct Constraints {
  std::vector<char> fixed;
  Eigen::VectorXd vals;
};

Constraints makeConstraints(const AssembledSystem& sys, const FESpace& ssp) {
  Constraints con;
  con.fixed.assign(totalSize(sys), 0);
  con.vals = Eigen::VectorXd::Zero(totalSize(sys));
  int n = guSize(sys);
  for (int d : ssp.traction_dofs) {
    con.fixed[n + d] = 1;
    con.vals[n + d] = sys.traction[d];
  }
  return con;
}

Eigen::VectorXd baseRhs(const AssembledSystem& sys) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(totalSize(sys));
  rhs.head(guSize(sys)) = sys.load;
  rhs.segment(guSize(sys), sys.nS) = sys.dirichlet;
  return rhs;
}

struct Saddle {
  SpMat M;
  Eigen::VectorXd rhs;
};

Saddle buildSaddle(const AssembledSystem& sys, const Constraints& con,
                   const SpMat* conv, const SpMat* conv1,
                   const Eigen::VectorXd* rhs_extra) {
  int n = guSize(sys);
  int total = totalSize(sys);
  Saddle out;
  out.rhs = baseRhs(sys);
  if (rhs_extra) out.rhs.head(n) += *rhs_extra;
  std::vector<Eigen::Triplet<double>> trips;
  auto add = [&](int r, int c, double v) {
    if (v == 0.0 || con.fixed[r]) return;
    if (con.fixed[c]) {
      out.rhs[r] -= v * con.vals[c];
      return;
    }
    trips.emplace_back(r, c, v);
  };
  auto addBlock = [&](const SpMat& m, int roff, int coff, double sign) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        add(static_cast<int>(it.row()) + roff, static_cast<int>(it.col()) + coff,
            sign * it.value());
  };
  auto addBlockT = [&](const SpMat& m, int roff, int coff, double sign) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        add(static_cast<int>(it.col()) + roff, static_cast<int>(it.row()) + coff,
            sign * it.value());
  };
  addBlock(sys.A, 0, 0, 1.0);
  if (conv) addBlock(*conv, 0, 0, 1.0);
  if (conv1) addBlock(*conv1, 0, 0, 1.0);
  addBlock(sys.B, n, 0, 1.0);
  addBlockT(sys.B, 0, n, -1.0);
  if (sys.mean_trace) {
    int lam = n + sys.nS;
    for (int i = 0; i < sys.nS; ++i) {
      add(n + i, lam, sys.trace_c[i]);
      add(lam, n + i, sys.trace_c[i]);
    }
  }
  for (int i = 0; i < total; ++i)
    if (con.fixed[i]) {
      trips.emplace_back(i, i, 1.0);
      out.rhs[i] = con.vals[i];
    }
  out.M.resize(total, total);
  out.M.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd sparseSolve(const SpMat& m, const Eigen::VectorXd& rhs) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(
        "saddle system factorization failed (unstable space triple?)");
  return lu.solve(rhs);
}

void finalize(const AssembledSystem& sys, const Eigen::VectorXd& z,
              SolutionFields& out) {
  int n = guSize(sys);
  out.g = z.head(sys.nG);
  out.u = z.segment(sys.nG, sys.nU);
  out.s = z.segment(n, sys.nS);
  out.multiplier = sys.mean_trace ? z[n + sys.nS] : 0.0;
  Eigen::VectorXd x = z.head(n);
  double energy = x.dot(sys.A * x);
  double work = x.dot(sys.load) + out.s.dot(sys.B * x);
  out.energy_gap = std::abs(energy - work) / std::max(1.0, std::abs(energy));
}

}  // namespace

SolutionFields solveStokes(const FESpace& gsp, const FESpace& usp,
                           const FESpace& ssp, const AssembledSystem& sys) {
  (void)gsp;
  (void)usp;
  Constraints con = makeConstraints(sys, ssp);
  Saddle saddle = buildSaddle(sys, con, nullptr, nullptr, nullptr);
  SolutionFields out;
  Eigen::VectorXd z = sparseSolve(saddle.M, saddle.rhs);
  out.residual = (saddle.M * z - saddle.rhs).cwiseAbs().maxCoeff();
  out.history = {out.residual};
  out.iterations = 1;
  out.converged = true;
  finalize(sys, z, out);
  return out;
}

SolutionFields solveNavierStokes(const FESpace& gsp, const FESpace& usp,
                                 const FESpace& ssp, const AssembledSystem& sys,
                                 const SolverConfig& config) {
  Constraints con = makeConstraints(sys, ssp);
  int n = guSize(sys);
  SolutionFields out;

  Eigen::VectorXd z;
  {
    Saddle stokes = buildSaddle(sys, con, nullptr, nullptr, nullptr);
    z = sparseSolve(stokes.M, stokes.rhs);
  }
  out.iterations = 1;

  double alpha = config.damping;
  int increases = 0;
  double prev_res = -1.0;
  for (;;) {
    SpMat conv = assembleConvection(gsp, usp, z.head(n));
    Saddle picard = buildSaddle(sys, con, &conv, nullptr, nullptr);
    double res = (picard.M * z - picard.rhs).cwiseAbs().maxCoeff();
    out.history.push_back(res);
    out.residual = res;
    if (res < config.tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= config.max_iter) break;
    if (prev_res >= 0.0 && res > prev_res) {
      if (++increases >= 2) {
        alpha = std::max(alpha * 0.5, 0.0625);
        increases = 0;
      }
    } else {
      increases = 0;
    }
    prev_res = res;

    Eigen::VectorXd znew;
    if (config.newton && res < config.newton_threshold) {
      SpMat conv1 = assembleConvectionFirstSlot(gsp, usp, z.head(n));
      Eigen::VectorXd extra = conv * z.head(n);
      Saddle newton = buildSaddle(sys, con, &conv, &conv1, &extra);
      znew = sparseSolve(newton.M, newton.rhs);
    } else {
      znew = sparseSolve(picard.M, picard.rhs);
    }
    z += alpha * (znew - z);
    ++out.iterations;
  }
  finalize(sys, z, out);
  if (!out.converged)
    throw std::runtime_error("nonlinear iteration did not converge, residual " +
                             std::to_string(out.residual));
  return out;
}

// ---------------------------------------------------------------------------
// Condensed solve
// ---------------------------------------------------------------------------

namespace {

// Iteration-independent per-patch data in the condensed basis.  The dense
// local matrices (change of basis, local saddle) are deliberately not cached:
// at ~105 KB per patch they dominate memory on fine meshes, so they are
// rebuilt from the element integrals each iteration.
struct PatchWork {
  Eigen::VectorXd f_base;     // transform^T [load; dirichlet(owned)]
  Eigen::VectorXd trace_ct;   // transform^T [0; c(owned)]
  std::vector<int> inner;     // local new-basis indices, size 60
  std::vector<int> outer;     // local new-basis indices, size 21
  std::vector<int> outer_gid; // interface ids of `outer`; -1 for eliminated
  std::vector<char> elim;     // per `outer` entry: eliminated at second level
  // Recovery matrix K_ii^{-1} [K_io | f_i], refreshed every iteration.
  Eigen::MatrixXd recover;
  // Second-level recovery S_ll^{-1} [S_ls | f_l] for the patch-local
  // interface modes (parent-P1 velocity, sym-average stress), which couple
  // only to the patch's own edge unknowns and are eliminated too.
  Eigen::MatrixXd recover2;
};

// 81x81 blkdiag(I_ng, t_u, t_s) change of basis for one patch.
Eigen::MatrixXd patchTransform(const ParentPatch& patch) {
  const int ng = static_cast<int>(patch.g_dofs.size());
  const int nu = static_cast<int>(patch.u_dofs.size());
  const int ns = static_cast<int>(patch.s_dofs.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(ng + nu + ns, ng + nu + ns);
  t.block(ng, ng, nu, nu) = patch.t_u;
  t.block(ng + nu, ng + nu, ns, ns) = patch.t_s;
  return t;
}

// transform^T [A, -B^T; B, 0] transform for one patch (linear part only).
Eigen::MatrixXd patchSaddle(const FESpace& gsp, const FESpace& usp,
                            const FESpace& ssp, const AssembledSystem& sys,
                            const ParentPatch& patch,
                            const Eigen::MatrixXd& transform) {
  const int ng = static_cast<int>(patch.g_dofs.size());
  const int nu = static_cast<int>(patch.u_dofs.size());
  const int ns = static_cast<int>(patch.s_dofs.size());
  const int nx = ng + nu;
  const int nl = nx + ns;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nl, nl);
  for (int c = 0; c < 3; ++c) {
    int t = patch.children[c];
    Eigen::MatrixXd b = elemB(ssp, gsp, usp, t);
    int ngl = gsp.localSize(t), nul = usp.localSize(t);
    for (int i = 0; i < ssp.localSize(t); ++i) {
      int ip = nx + patch.s_pos[c][i];
      for (int j = 0; j < ngl; ++j) {
        m(ip, patch.g_pos[c][j]) += b(i, j);
        m(patch.g_pos[c][j], ip) -= b(i, j);
      }
      for (int j = 0; j < nul; ++j) {
        m(ip, ng + patch.u_pos[c][j]) += b(i, ngl + j);
        m(ng + patch.u_pos[c][j], ip) -= b(i, ngl + j);
      }
    }
  }
  // G-G block of the a form, gathered from the assembled global matrix.
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j)
      m(i, j) = sys.A.coeff(patch.g_dofs[i], patch.g_dofs[j]);
  return transform.transpose() * m * transform;
}

// The globally coupled interface carries only the shared parent-edge stress
// unknowns (plus the mean-trace multiplier); everything else is recovered
// patch by patch.
struct CondensedLayout {
  std::vector<int> pe_index;  // parent-edge stress dof -> condensed edge slot
  std::vector<int> owner;     // stress dof -> owning patch
  int n_pe = 0;
  int lambda = -1, total = 0;
};

CondensedLayout makeLayout(const AssembledSystem& sys,
                           const std::vector<ParentPatch>& patches) {
  CondensedLayout lay;
  lay.pe_index.assign(sys.nS, -1);
  lay.owner.assign(sys.nS, -1);
  int np = static_cast<int>(patches.size());
  for (int p = 0; p < np; ++p) {
    const ParentPatch& patch = patches[p];
    for (size_t j = 0; j < patch.s_dofs.size(); ++j) {
      int d = patch.s_dofs[j];
      if (lay.owner[d] < 0) lay.owner[d] = p;
      if (static_cast<int>(j) < patch.n_s_edge && lay.pe_index[d] < 0)
        lay.pe_index[d] = lay.n_pe++;
    }
  }
  lay.total = lay.n_pe;
  if (sys.mean_trace) lay.lambda = lay.total++;
  return lay;
}

PatchWork makePatchWork(const FESpace& gsp, const FESpace& usp, const FESpace& ssp,
                        const AssembledSystem& sys, const ParentPatch& patch,
                        int p, const CondensedLayout& lay) {
  const int ng = static_cast<int>(patch.g_dofs.size());
  const int nu = static_cast<int>(patch.u_dofs.size());
  const int ns = static_cast<int>(patch.s_dofs.size());
  const int nx = ng + nu;
  const int nl = nx + ns;

  PatchWork w;
  Eigen::MatrixXd transform = patchTransform(patch);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(nl);
  for (int i = 0; i < ng; ++i) f[i] = sys.load[patch.g_dofs[i]];
  for (int i = 0; i < nu; ++i) f[ng + i] = sys.load[sys.nG + patch.u_dofs[i]];
  Eigen::VectorXd ct = Eigen::VectorXd::Zero(nl);
  for (int i = 0; i < ns; ++i) {
    int d = patch.s_dofs[i];
    if (lay.owner[d] != p) continue;  // shared parent-edge dofs counted once
    f[nx + i] = sys.dirichlet[d];
    if (sys.mean_trace) ct[nx + i] = sys.trace_c[d];
  }
  w.f_base = transform.transpose() * f;
  if (sys.mean_trace) w.trace_ct = transform.transpose() * ct;

  // Interface unknowns: parent-P1 velocity modes, edge and sym-average
  // stress modes.  Everything else is interior to the patch.
  std::vector<int> candidates;  // patch-local modes, sym-average first
  for (int l = 0; l < nl; ++l) {
    if (l >= ng && l < ng + 6) {
      w.outer.push_back(l);
      w.outer_gid.push_back(-1);  // parent-P1 velocity mode, patch-local
    } else if (l >= nx && l < nx + patch.n_s_edge) {
      w.outer.push_back(l);
      w.outer_gid.push_back(lay.pe_index[patch.s_dofs[l - nx]]);
    } else if (l >= nx + patch.n_s_edge && l < nx + patch.n_s_outer) {
      w.outer.push_back(l);
      w.outer_gid.push_back(-1);  // sym-average stress mode, patch-local
    } else {
      w.inner.push_back(l);
    }
  }
  int nout = static_cast<int>(w.outer.size());
  w.elim.assign(nout, 0);
  for (int j = 0; j < nout; ++j)
    if (w.outer_gid[j] < 0 && w.outer[j] >= nx) candidates.push_back(j);
  for (int j = 0; j < nout; ++j)
    if (w.outer_gid[j] < 0 && w.outer[j] < nx) candidates.push_back(j);

  // Structural choice of the second-level elimination set, made once from
  // the linear part: the patch-local modes whose first-level Schur block
  // stays invertible.  The velocity modes not controlled by the patch's own
  // stress (three per patch) remain globally coupled.
  Eigen::MatrixXd mc = patchSaddle(gsp, usp, ssp, sys, patch, transform);
  int nin = static_cast<int>(w.inner.size());
  Eigen::MatrixXd kii(nin, nin), kio(nin, nout), koi(nout, nin), koo(nout, nout);
  for (int i = 0; i < nin; ++i) {
    for (int j = 0; j < nin; ++j) kii(i, j) = mc(w.inner[i], w.inner[j]);
    for (int j = 0; j < nout; ++j) {
      kio(i, j) = mc(w.inner[i], w.outer[j]);
      koi(j, i) = mc(w.outer[j], w.inner[i]);
    }
  }
  for (int i = 0; i < nout; ++i)
    for (int j = 0; j < nout; ++j) koo(i, j) = mc(w.outer[i], w.outer[j]);
  Eigen::MatrixXd schur0 = koo - koi * kii.partialPivLu().solve(kio);
  std::vector<int> chosen;
  for (int c : candidates) {
    std::vector<int> trial = chosen;
    trial.push_back(c);
    int t = static_cast<int>(trial.size());
    Eigen::MatrixXd sub(t, t);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j) sub(i, j) = schur0(trial[i], trial[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    double smax = svd.singularValues()[0];
    double smin = svd.singularValues()[t - 1];
    if (smin > 1e-8 * std::max(smax, 1e-30)) chosen = trial;
  }
  for (int c : chosen) w.elim[c] = 1;
  (void)p;
  return w;
}

// Convection block of one patch in the original local basis (x rows/cols).
Eigen::MatrixXd patchConvection(const FESpace& gsp, const FESpace& usp,
                                const ParentPatch& patch,
                                const Eigen::VectorXd& state) {
  int ng = static_cast<int>(patch.g_dofs.size());
  int nu = static_cast<int>(patch.u_dofs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ng + nu, ng + nu);
  for (int ch = 0; ch < 3; ++ch) {
    int t = patch.children[ch];
    Eigen::MatrixXd ce = elemConvection(gsp, usp, t, state);
    int ngl = gsp.localSize(t), nul = usp.localSize(t);
    auto pos = [&](int k) {
      return k < ngl ? patch.g_pos[ch][k] : ng + patch.u_pos[ch][k - ngl];
    };
    for (int i = 0; i < ngl + nul; ++i)
      for (int j = 0; j < ngl + nul; ++j)
        if (ce(i, j) != 0.0) c(pos(i), pos(j)) += ce(i, j);
  }
  return c;
}

Eigen::MatrixXd patchConvectionFirstSlot(const FESpace& gsp, const FESpace& usp,
                                         const ParentPatch& patch,
                                         const Eigen::VectorXd& state) {
  int ng = static_cast<int>(patch.g_dofs.size());
  int nu = static_cast<int>(patch.u_dofs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ng + nu, ng + nu);
  for (int ch = 0; ch < 3; ++ch) {
    int t = patch.children[ch];
    Eigen::MatrixXd ce = elemConvectionFirstSlot(gsp, usp, t, state);
    int ngl = gsp.localSize(t), nul = usp.localSize(t);
    auto pos = [&](int k) {
      return k < ngl ? patch.g_pos[ch][k] : ng + patch.u_pos[ch][k - ngl];
    };
    for (int i = 0; i < ngl + nul; ++i)
      for (int j = 0; j < ngl + nul; ++j)
        if (ce(i, j) != 0.0) c(pos(i), pos(j)) += ce(i, j);
  }
  return c;
}

// Nonlinear residual of the full (uncondensed) system; the linear blocks
// come from the assembled system, the convection term is accumulated element
// by element.  Rows of fixed traction dofs are satisfied exactly.
Eigen::VectorXd fullResidual(const FESpace& gsp, const FESpace& usp,
                             const AssembledSystem& sys, const Constraints& con,
                             const Eigen::VectorXd& z) {
  int n = guSize(sys);
  Eigen::VectorXd x = z.head(n);
  Eigen::VectorXd s = z.segment(n, sys.nS);
  Eigen::VectorXd r = -baseRhs(sys);
  r.head(n) += sys.A * x - sys.B.transpose() * s;
  r.segment(n, sys.nS) += sys.B * x;
  for (int t = 0; t < gsp.mesh->numTriangles(); ++t) {
    int ngl = gsp.localSize(t), nul = usp.localSize(t);
    Eigen::VectorXd xl(ngl + nul);
    for (int k = 0; k < ngl; ++k) xl[k] = z[gsp.elem_dofs[t][k]];
    for (int k = 0; k < nul; ++k) xl[ngl + k] = z[sys.nG + usp.elem_dofs[t][k]];
    Eigen::VectorXd rx = elemConvection(gsp, usp, t, x) * xl;
    for (int k = 0; k < ngl; ++k) r[gsp.elem_dofs[t][k]] += rx[k];
    for (int k = 0; k < nul; ++k) r[sys.nG + usp.elem_dofs[t][k]] += rx[ngl + k];
  }
  if (sys.mean_trace) {
    double lam = z[n + sys.nS];
    r.segment(n, sys.nS) += sys.trace_c * lam;
    r[n + sys.nS] += sys.trace_c.dot(z.segment(n, sys.nS));
  }
  for (int i = 0; i < r.size(); ++i)
    if (con.fixed[i]) r[i] = z[i] - con.vals[i];
  return r;
}

}  // namespace

int condensedUnknowns(const FESpace& gsp, const FESpace& usp, const FESpace& ssp,
                      const AssembledSystem& sys,
                      const std::vector<ParentPatch>& patches) {
  CondensedLayout lay = makeLayout(sys, patches);
  int total = lay.total;
  for (size_t p = 0; p < patches.size(); ++p) {
    PatchWork w = makePatchWork(gsp, usp, ssp, sys, patches[p],
                                static_cast<int>(p), lay);
    for (size_t j = 0; j < w.outer_gid.size(); ++j)
      if (w.outer_gid[j] < 0 && !w.elim[j]) ++total;
  }
  return total;
}

SolutionFields solveNavierStokesCondensed(const FESpace& gsp, const FESpace& usp,
                                          const FESpace& ssp,
                                          const AssembledSystem& sys,
                                          const SolverConfig& config,
                                          const std::vector<ParentPatch>& patches) {
  const int n = guSize(sys);
  const int total = totalSize(sys);
  const int np = static_cast<int>(patches.size());
  Constraints con = makeConstraints(sys, ssp);
  CondensedLayout lay = makeLayout(sys, patches);

  std::vector<PatchWork> work;
  work.reserve(np);
  for (int p = 0; p < np; ++p)
    work.push_back(makePatchWork(gsp, usp, ssp, sys, patches[p], p, lay));
  // Patch-local modes that survived the second-level elimination become
  // additional globally numbered interface unknowns.
  for (PatchWork& w : work)
    for (size_t j = 0; j < w.outer_gid.size(); ++j)
      if (w.outer_gid[j] < 0 && !w.elim[j]) w.outer_gid[j] = lay.total++;

  // Fixed (traction) interface unknowns in condensed numbering.
  std::vector<char> ofixed(lay.total, 0);
  Eigen::VectorXd ovals = Eigen::VectorXd::Zero(lay.total);
  for (int d : ssp.traction_dofs) {
    int gid = lay.pe_index[d];
    ofixed[gid] = 1;
    ovals[gid] = sys.traction[d];
  }

  SolutionFields out;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(total);
  double alpha = config.damping;
  int increases = 0;
  double prev_res = -1.0;
  bool first = true;

  for (;;) {
    if (!first) {
      Eigen::VectorXd r = fullResidual(gsp, usp, sys, con, z);
      double res = r.cwiseAbs().maxCoeff();
      out.history.push_back(res);
      out.residual = res;
      if (res < config.tol) {
        out.converged = true;
        break;
      }
      if (out.iterations >= config.max_iter) break;
      if (prev_res >= 0.0 && res > prev_res) {
        if (++increases >= 2) {
          alpha = std::max(alpha * 0.5, 0.0625);
          increases = 0;
        }
      } else {
        increases = 0;
      }
      prev_res = res;
    }

    bool use_newton = config.newton && !first && out.residual < config.newton_threshold;

    // Schur-complement assembly of the interface system.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd orhs = Eigen::VectorXd::Zero(lay.total);
    for (int p = 0; p < np; ++p) {
      const ParentPatch& patch = patches[p];
      PatchWork& w = work[p];
      int nx = static_cast<int>(patch.g_dofs.size() + patch.u_dofs.size());
      Eigen::MatrixXd transform = patchTransform(patch);

      Eigen::MatrixXd m = patchSaddle(gsp, usp, ssp, sys, patch, transform);
      Eigen::VectorXd f = w.f_base;
      if (!first) {
        Eigen::MatrixXd cx = patchConvection(gsp, usp, patch, z.head(n));
        if (use_newton)
          cx += patchConvectionFirstSlot(gsp, usp, patch, z.head(n));
        Eigen::MatrixXd tx = transform.topLeftCorner(nx, nx);
        m.topLeftCorner(nx, nx) += tx.transpose() * cx * tx;
        if (use_newton) {
          Eigen::VectorXd xl(nx);
          int ng = static_cast<int>(patch.g_dofs.size());
          for (size_t k = 0; k < patch.g_dofs.size(); ++k)
            xl[k] = z[patch.g_dofs[k]];
          for (size_t k = 0; k < patch.u_dofs.size(); ++k)
            xl[ng + k] = z[sys.nG + patch.u_dofs[k]];
          Eigen::MatrixXd conv = patchConvection(gsp, usp, patch, z.head(n));
          f.head(nx) += tx.transpose() * (conv * xl);
        }
      }

      int nin = static_cast<int>(w.inner.size());
      int nout = static_cast<int>(w.outer.size());
      int ncol = nout + (sys.mean_trace ? 1 : 0);
      Eigen::MatrixXd kii(nin, nin), kio(nin, ncol), koi(ncol, nin),
          koo(ncol, ncol);
      koo.setZero();
      kio.setZero();
      koi.setZero();
      for (int i = 0; i < nin; ++i)
        for (int j = 0; j < nin; ++j) kii(i, j) = m(w.inner[i], w.inner[j]);
      for (int i = 0; i < nin; ++i)
        for (int j = 0; j < nout; ++j) {
          kio(i, j) = m(w.inner[i], w.outer[j]);
          koi(j, i) = m(w.outer[j], w.inner[i]);
        }
      for (int i = 0; i < nout; ++i)
        for (int j = 0; j < nout; ++j) koo(i, j) = m(w.outer[i], w.outer[j]);
      if (sys.mean_trace) {
        for (int i = 0; i < nin; ++i) {
          kio(i, nout) = w.trace_ct[w.inner[i]];
          koi(nout, i) = w.trace_ct[w.inner[i]];
        }
        for (int j = 0; j < nout; ++j) {
          koo(j, nout) = w.trace_ct[w.outer[j]];
          koo(nout, j) = w.trace_ct[w.outer[j]];
        }
      }
      Eigen::VectorXd fi(nin), fo(ncol);
      for (int i = 0; i < nin; ++i) fi[i] = f[w.inner[i]];
      for (int j = 0; j < nout; ++j) fo[j] = f[w.outer[j]];
      if (sys.mean_trace) fo[nout] = 0.0;

      Eigen::MatrixXd rhs_block(nin, ncol + 1);
      rhs_block.leftCols(ncol) = kio;
      rhs_block.col(ncol) = fi;
      w.recover = kii.partialPivLu().solve(rhs_block);

      Eigen::MatrixXd schur = koo - koi * w.recover.leftCols(ncol);
      Eigen::VectorXd srhs = fo - koi * w.recover.col(ncol);

      // Second level: eliminate the patch-local interface modes, leaving
      // only the shared parent-edge unknowns (and the multiplier) coupled
      // across patches.
      auto gid = [&](int j) {
        return j < nout ? w.outer_gid[j] : lay.lambda;
      };
      std::vector<int> sh, loc;
      for (int j = 0; j < ncol; ++j)
        (gid(j) >= 0 ? sh : loc).push_back(j);
      int nsh = static_cast<int>(sh.size());
      int nloc = static_cast<int>(loc.size());
      Eigen::MatrixXd sll(nloc, nloc), sls(nloc, nsh), ssl(nsh, nloc),
          sss(nsh, nsh);
      for (int i = 0; i < nloc; ++i) {
        for (int j = 0; j < nloc; ++j) sll(i, j) = schur(loc[i], loc[j]);
        for (int j = 0; j < nsh; ++j) {
          sls(i, j) = schur(loc[i], sh[j]);
          ssl(j, i) = schur(sh[j], loc[i]);
        }
      }
      for (int i = 0; i < nsh; ++i)
        for (int j = 0; j < nsh; ++j) sss(i, j) = schur(sh[i], sh[j]);
      Eigen::MatrixXd lrhs(nloc, nsh + 1);
      lrhs.leftCols(nsh) = sls;
      for (int i = 0; i < nloc; ++i) lrhs(i, nsh) = srhs[loc[i]];
      if (getenv("DUALMIX_DEBUG_COND") && p < 3) {
        Eigen::FullPivLU<Eigen::MatrixXd> flu(sll);
        Eigen::FullPivLU<Eigen::MatrixXd> flu_u(sll.topLeftCorner(6, 6));
        Eigen::FullPivLU<Eigen::MatrixXd> flu_s(sll.bottomRightCorner(3, 3));
        Eigen::FullPivLU<Eigen::MatrixXd> kern(flu.kernel());
        fprintf(stderr,
                "patch %d: rank(sll)=%d rank(uu)=%d rank(ss)=%d |ss|=%g\n", p,
                (int)flu.rank(), (int)flu_u.rank(), (int)flu_s.rank(),
                sll.bottomRightCorner(3, 3).cwiseAbs().maxCoeff());
        std::cerr << "kernel:\n" << flu.kernel() << "\n";
      }
      w.recover2 = sll.partialPivLu().solve(lrhs);
      Eigen::MatrixXd schur2 = sss - ssl * w.recover2.leftCols(nsh);
      for (int i = 0; i < nsh; ++i) {
        int gi = gid(sh[i]);
        if (ofixed[gi]) continue;
        double ri = srhs[sh[i]];
        for (int k = 0; k < nloc; ++k) ri -= ssl(i, k) * w.recover2(k, nsh);
        orhs[gi] += ri;
        for (int j = 0; j < nsh; ++j) {
          int gj = gid(sh[j]);
          if (ofixed[gj]) {
            orhs[gi] -= schur2(i, j) * ovals[gj];
            continue;
          }
          if (schur2(i, j) != 0.0) trips.emplace_back(gi, gj, schur2(i, j));
        }
      }
    }
    for (int i = 0; i < lay.total; ++i)
      if (ofixed[i]) {
        trips.emplace_back(i, i, 1.0);
        orhs[i] = ovals[i];
      }
    SpMat outer(lay.total, lay.total);
    outer.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd osol = sparseSolve(outer, orhs);

    // Recover interior unknowns and rebuild the full coefficient vector.
    Eigen::VectorXd znew = Eigen::VectorXd::Zero(total);
    if (sys.mean_trace) znew[n + sys.nS] = osol[lay.lambda];
    for (int p = 0; p < np; ++p) {
      const ParentPatch& patch = patches[p];
      PatchWork& w = work[p];
      int ng = static_cast<int>(patch.g_dofs.size());
      int nu = static_cast<int>(patch.u_dofs.size());
      int nx = ng + nu;
      int nl = nx + static_cast<int>(patch.s_dofs.size());
      int nout = static_cast<int>(w.outer.size());
      int ncol = nout + (sys.mean_trace ? 1 : 0);
      auto gid = [&](int j) {
        return j < nout ? w.outer_gid[j] : lay.lambda;
      };
      std::vector<int> sh, loc;
      for (int j = 0; j < ncol; ++j)
        (gid(j) >= 0 ? sh : loc).push_back(j);
      int nsh = static_cast<int>(sh.size());
      Eigen::VectorXd zsh(nsh);
      for (int i = 0; i < nsh; ++i) zsh[i] = osol[gid(sh[i])];
      Eigen::VectorXd zpl =
          w.recover2.col(nsh) - w.recover2.leftCols(nsh) * zsh;
      Eigen::VectorXd zo(ncol);
      for (int i = 0; i < nsh; ++i) zo[sh[i]] = zsh[i];
      for (size_t i = 0; i < loc.size(); ++i) zo[loc[i]] = zpl[i];
      Eigen::VectorXd zi = w.recover.col(ncol) - w.recover.leftCols(ncol) * zo;
      Eigen::VectorXd znb = Eigen::VectorXd::Zero(nl);
      for (size_t i = 0; i < w.inner.size(); ++i) znb[w.inner[i]] = zi[i];
      for (int j = 0; j < nout; ++j) znb[w.outer[j]] = zo[j];
      Eigen::VectorXd zloc = patchTransform(patch) * znb;
      for (int i = 0; i < ng; ++i) znew[patch.g_dofs[i]] = zloc[i];
      for (int i = 0; i < nu; ++i) znew[sys.nG + patch.u_dofs[i]] = zloc[ng + i];
      for (size_t i = 0; i < patch.s_dofs.size(); ++i)
        znew[n + patch.s_dofs[i]] = zloc[nx + i];
    }

    if (first) {
      z = znew;
      first = false;
      out.iterations = 1;
    } else {
      z += alpha * (znew - z);
      ++out.iterations;
    }
  }
  finalize(sys, z, out);
  if (!out.converged)
    throw std::runtime_error("condensed iteration did not converge, residual " +
                             std::to_string(out.residual));
  return out;
}

void recoverPressure(const FESpace& usp, const FESpace& ssp, SolutionFields& out) {
  const Triangulation& mesh = *ssp.mesh;
  int nt = mesh.numTriangles();
  out.pressure.resize(6 * nt);
  const QuadratureRule& rule = triangleRule(6);
  for (int t = 0; t < nt; ++t) {
    Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
    Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
    Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
    double jac = 2.0 * mesh.area(t);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      Vec2 x = p0 + e1 * rule.points[k].x + e2 * rule.points[k].y;
      double wq = rule.weights[k] * jac;
      Vec2 xi = ssp.local(t, x);
      double mono[6] = {1.0, xi.x, xi.y, xi.x * xi.x, xi.x * xi.y, xi.y * xi.y};
      Mat2 sv;
      for (int i = 0; i < ssp.localSize(t); ++i)
        sv = sv + ssp.evalTensor(t, i, x) * out.s[ssp.elem_dofs[t][i]];
      Vec2 uv;
      for (int i = 0; i < usp.localSize(t); ++i)
        uv = uv + usp.evalVector(t, i, x) * out.u[usp.elem_dofs[t][i]];
      double pval = -0.5 * (sv.trace() + 0.5 * uv.dot(uv));
      for (int i = 0; i < 6; ++i) {
        rhs[i] += wq * pval * mono[i];
        for (int j = 0; j < 6; ++j) mass(i, j) += wq * mono[i] * mono[j];
      }
    }
    out.pressure.segment(6 * t, 6) = mass.ldlt().solve(rhs);
  }
}

double evalPressure(const FESpace& ssp, const SolutionFields& fields, int t,
                    const Vec2& x) {
  Vec2 xi = ssp.local(t, x);
  const double mono[6] = {1.0, xi.x, xi.y, xi.x * xi.x, xi.x * xi.y, xi.y * xi.y};
  double p = 0.0;
  for (int i = 0; i < 6; ++i) p += fields.pressure[6 * t + i] * mono[i];
  return p;
}

}  // namespace dualmix
