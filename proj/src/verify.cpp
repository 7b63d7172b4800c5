#include "dualmix/verify.hpp"

#include <Eigen/SparseLU>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "dualmix/eig.hpp"
#include "dualmix/quadrature.hpp"

namespace dualmix {

namespace {

constexpr int kDataDegree = 12;  // quadrature for trigonometric integrands
constexpr int kLanczosSteps = 400;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fmtH(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", h);
  return buf;
}

}  // namespace

Vec2 ManufacturedSolution::velocity(const Vec2& p) const {
  return {(-m / k) * std::sin(k * p.x) * std::cos(m * p.y),
          std::cos(k * p.x) * std::sin(m * p.y)};
}

Mat2 ManufacturedSolution::gradient(const Vec2& p) const {
  double sx = std::sin(k * p.x), cx = std::cos(k * p.x);
  double sy = std::sin(m * p.y), cy = std::cos(m * p.y);
  return {-m * cx * cy, (m * m / k) * sx * sy, -k * sx * sy, m * cx * cy};
}

double ManufacturedSolution::pressure(const Vec2& p) const {
  Vec2 u = velocity(p);
  double skx = std::sin(k * p.x);
  double smy = std::sin(m * p.y);
  return -0.5 * (u.dot(u) + (1.0 + (m / k) * (m / k)) * skx * skx * smy * smy);
}

Mat2 ManufacturedSolution::stress(const Vec2& p) const {
  Mat2 g = gradient(p);
  Vec2 u = velocity(p);
  Mat2 visc = (g + g.transpose()) * nu;
  return visc - Mat2::identity() * pressure(p) - outer(u, u) * 0.5;
}

Vec2 ManufacturedSolution::forcing(const Vec2& p) const {
  return velocity(p) * (nu * (k * k + m * m));
}

Problem makeProblem(ElementFamily family, int n, bool traction_right) {
  Problem pr;
  Rect rect;
  auto tag = traction_right ? tractionRightTag(rect)
                            : std::function<BoundaryTag(const Vec2&)>();
  pr.base = std::make_unique<Triangulation>(uniformSquareMesh(n, rect, tag));
  pr.h = (rect.x1 - rect.x0) / n;
  const Triangulation* mesh = pr.base.get();
  if (family.isSVRT()) {
    pr.refined = std::make_unique<Triangulation>(barycentricRefine(*pr.base));
    mesh = pr.refined.get();
  }
  pr.g = buildGSpace(family, *mesh);
  pr.u = buildUSpace(family, *mesh);
  pr.s = buildSSpace(family, *mesh);
  return pr;
}

AssembledSystem assembleManufactured(const Problem& pr,
                                     const ManufacturedSolution& ms) {
  ConstitutiveLaw law{ms.nu};
  VecFn f = [&ms](const Vec2& x) { return ms.forcing(x); };
  VecFn g = [&ms](const Vec2& x) { return ms.velocity(x); };
  TenFn st = [&ms](const Vec2& x) { return ms.stress(x); };
  return assembleSystem(pr.g, pr.u, pr.s, law, f, g, st, kDataDegree);
}

ErrorRow errorNorms(const FESpace& gsp, const FESpace& usp, const FESpace& ssp,
                    const SolutionFields& fields, const ManufacturedSolution& ms) {
  const Triangulation& mesh = *gsp.mesh;
  const QuadratureRule& rule = triangleRule(kDataDegree);
  ErrorRow row;
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
    Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
    Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
    double jac = 2.0 * mesh.area(t);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 x = p0 + e1 * rule.points[q].x + e2 * rule.points[q].y;
      double w = rule.weights[q] * jac;
      Mat2 gh, sh;
      Vec2 uh, dh;
      for (int i = 0; i < gsp.localSize(t); ++i)
        gh = gh + gsp.evalTensor(t, i, x) * fields.g[gsp.elem_dofs[t][i]];
      for (int i = 0; i < usp.localSize(t); ++i)
        uh = uh + usp.evalVector(t, i, x) * fields.u[usp.elem_dofs[t][i]];
      for (int i = 0; i < ssp.localSize(t); ++i) {
        double c = fields.s[ssp.elem_dofs[t][i]];
        sh = sh + ssp.evalTensor(t, i, x) * c;
        dh = dh + ssp.evalDiv(t, i, x) * c;
      }
      Mat2 ge = gh - ms.gradient(x);
      Mat2 gsym = ge.sym(), gskw = ge.skw();
      Vec2 ue = uh - ms.velocity(x);
      Mat2 se = sh - ms.stress(x);
      // div S = (1/2)(u . grad) u - f for the manufactured pair
      Mat2 gx = ms.gradient(x);
      Vec2 ux = ms.velocity(x);
      Vec2 divs_exact = gx.apply(ux) * 0.5 - ms.forcing(x);
      Vec2 de = dh - divs_exact;
      row.gsym += w * gsym.frobInner(gsym);
      row.gskw += w * gskw.frobInner(gskw);
      row.u += w * ue.dot(ue);
      row.s += w * se.frobInner(se);
      row.divs += w * de.dot(de);
    }
  }
  row.gsym = std::sqrt(row.gsym);
  row.gskw = std::sqrt(row.gskw);
  row.u = std::sqrt(row.u);
  row.s = std::sqrt(row.s);
  row.divs = std::sqrt(row.divs);
  return row;
}

ErrorRow exactNorms(const ManufacturedSolution& ms) {
  ErrorRow prev, cur;
  for (int n = 8; n <= 512; n *= 2) {
    Triangulation mesh = uniformSquareMesh(n);
    const QuadratureRule& rule = triangleRule(kDataDegree);
    cur = ErrorRow{};
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
      Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
      Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
      double jac = 2.0 * mesh.area(t);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        Vec2 x = p0 + e1 * rule.points[q].x + e2 * rule.points[q].y;
        double w = rule.weights[q] * jac;
        Mat2 g = ms.gradient(x);
        Vec2 u = ms.velocity(x);
        Mat2 s = ms.stress(x);
        Vec2 d = g.apply(u) * 0.5 - ms.forcing(x);
        cur.gsym += w * g.sym().frobInner(g.sym());
        cur.gskw += w * g.skw().frobInner(g.skw());
        cur.u += w * u.dot(u);
        cur.s += w * s.frobInner(s);
        cur.divs += w * d.dot(d);
      }
    }
    cur.gsym = std::sqrt(cur.gsym);
    cur.gskw = std::sqrt(cur.gskw);
    cur.u = std::sqrt(cur.u);
    cur.s = std::sqrt(cur.s);
    cur.divs = std::sqrt(cur.divs);
    if (n > 8) {
      double diff = std::abs(cur.gsym - prev.gsym) + std::abs(cur.gskw - prev.gskw) +
                    std::abs(cur.u - prev.u) + std::abs(cur.s - prev.s) +
                    std::abs(cur.divs - prev.divs);
      if (diff < 1e-8) break;
    }
    prev = cur;
  }
  return cur;
}

namespace {

double lsqSlope(const std::vector<double>& h, const std::vector<double>& e) {
  double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ConvergenceReport convergenceStudy(const StudyConfig& cfg) {
  ManufacturedSolution ms{cfg.k, cfg.m, cfg.nu};
  ConvergenceReport report;
  report.family = cfg.family.name();
  report.norms = exactNorms(ms);
  for (int n : cfg.meshes) {
    Problem pr = makeProblem(cfg.family, n, cfg.traction_right);
    AssembledSystem sys = assembleManufactured(pr, ms);
    SolutionFields fields;
    if (cfg.condense && cfg.family.isSVRT()) {
      auto patches = buildParentPatches(pr.g, pr.u, pr.s);
      fields = solveNavierStokesCondensed(pr.g, pr.u, pr.s, sys, cfg.solver,
                                          patches);
    } else {
      fields = solveNavierStokes(pr.g, pr.u, pr.s, sys, cfg.solver);
    }
    ErrorRow row = errorNorms(pr.g, pr.u, pr.s, fields, ms);
    row.h = pr.h;
    report.rows.push_back(row);
  }
  std::vector<double> hs;
  std::vector<double> cols[5];
  for (const ErrorRow& r : report.rows) {
    if (r.h > cfg.rate_hmax * (1.0 + 1e-12)) continue;
    hs.push_back(r.h);
    cols[0].push_back(r.gsym);
    cols[1].push_back(r.gskw);
    cols[2].push_back(r.u);
    cols[3].push_back(r.s);
    cols[4].push_back(r.divs);
  }
  if (hs.size() < 2) {  // not enough rows in the fit window: use all rows
    hs.clear();
    for (auto& col : cols) col.clear();
    for (const ErrorRow& r : report.rows) {
      hs.push_back(r.h);
      cols[0].push_back(r.gsym);
      cols[1].push_back(r.gskw);
      cols[2].push_back(r.u);
      cols[3].push_back(r.s);
      cols[4].push_back(r.divs);
    }
  }
  if (hs.size() >= 2) {
    report.rates.gsym = lsqSlope(hs, cols[0]);
    report.rates.gskw = lsqSlope(hs, cols[1]);
    report.rates.u = lsqSlope(hs, cols[2]);
    report.rates.s = lsqSlope(hs, cols[3]);
    report.rates.divs = lsqSlope(hs, cols[4]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Stability diagnostics
// ---------------------------------------------------------------------------

namespace {

struct AugmentedSolver {
  Eigen::SparseLU<SpMat> lu;
  int n1 = 0, n2 = 0;
  bool constrained = false;
};

// Factorization of [Q, c; c^T, 0] (constraint optional).
std::unique_ptr<AugmentedSolver> factorAugmented(const SpMat& q,
                                                 const Eigen::VectorXd* c) {
  auto out = std::make_unique<AugmentedSolver>();
  out->n1 = static_cast<int>(q.rows());
  out->constrained = c != nullptr;
  int total = out->n1 + (c ? 1 : 0);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < q.outerSize(); ++k)
    for (SpMat::InnerIterator it(q, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  if (c)
    for (int i = 0; i < out->n1; ++i)
      if ((*c)[i] != 0.0) {
        trips.emplace_back(i, out->n1, (*c)[i]);
        trips.emplace_back(out->n1, i, (*c)[i]);
      }
  SpMat m(total, total);
  m.setFromTriplets(trips.begin(), trips.end());
  out->lu.compute(m);
  if (out->lu.info() != Eigen::Success)
    throw std::runtime_error("augmented Gram factorization failed");
  return out;
}

// Factorization of the saddle [X, B^T, 0; B, 0, c; 0, c^T, 0].
std::unique_ptr<AugmentedSolver> factorSaddle(const SpMat& x, const SpMat& b,
                                              const Eigen::VectorXd* c) {
  auto out = std::make_unique<AugmentedSolver>();
  out->n1 = static_cast<int>(x.rows());
  out->n2 = static_cast<int>(b.rows());
  out->constrained = c != nullptr;
  int total = out->n1 + out->n2 + (c ? 1 : 0);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < x.outerSize(); ++k)
    for (SpMat::InnerIterator it(x, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMat::InnerIterator it(b, k); it; ++it) {
      trips.emplace_back(out->n1 + it.row(), it.col(), it.value());
      trips.emplace_back(it.col(), out->n1 + it.row(), it.value());
    }
  if (c)
    for (int i = 0; i < out->n2; ++i)
      if ((*c)[i] != 0.0) {
        trips.emplace_back(out->n1 + i, out->n1 + out->n2, (*c)[i]);
        trips.emplace_back(out->n1 + out->n2, out->n1 + i, (*c)[i]);
      }
  SpMat m(total, total);
  m.setFromTriplets(trips.begin(), trips.end());
  out->lu.compute(m);
  if (out->lu.info() != Eigen::Success)
    throw std::runtime_error("stress/velocity saddle factorization failed");
  return out;
}

Eigen::VectorXd randomVector(int n) {
  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

// With traction dofs present the constant identity tensor lies in the
// kernel of B^T but the mean-trace bordering is switched off, so the
// bordered saddle operators below would be singular.  The constants are
// defined (and measured) for the pure Dirichlet problem.
static void requireDirichlet(const FESpace& ssp) {
  if (!ssp.traction_dofs.empty())
    throw std::invalid_argument(
        "stability constants are defined for the pure Dirichlet problem");
}

double infsupConstant(const FESpace& gsp, const FESpace& usp, const FESpace& ssp) {
  requireDirichlet(ssp);
  SpMat x = assembleGUGram(gsp, usp);
  SpMat b = assembleB(ssp, gsp, usp);
  SpMat ngram = assembleSGram(ssp, false);
  Eigen::VectorXd c = meanTraceVector(ssp);
  Eigen::VectorXd kvec = representConstantTensor(ssp, Mat2::identity());
  // Any border with a nonzero component on ker B^T = span{kvec} makes the
  // saddle nonsingular; a single unit entry keeps the factorization sparse
  // (a dense border row causes catastrophic SparseLU fill on fine meshes).
  // The multiplier gauge it imposes differs from the zero-mean-trace one,
  // but the deflation below removes the kernel component from every iterate
  // and the nonzero spectrum is gauge independent.
  int kmax = 0;
  kvec.cwiseAbs().maxCoeff(&kmax);
  Eigen::VectorXd border = Eigen::VectorXd::Zero(kvec.size());
  border[kmax] = 1.0;
  auto saddle = factorSaddle(x, b, &border);
  int nx = saddle->n1, ns = saddle->n2;
  int total = nx + ns + 1;

  VecOp op = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
    rhs.segment(nx, ns) = -(ngram * s);
    return Eigen::VectorXd(saddle->lu.solve(rhs).segment(nx, ns));
  };
  InnerProduct inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& bb) {
    return a.dot(ngram * bb);
  };
  // N * kvec equals the mean-trace vector, so this deflation is the
  // N-orthogonal projection onto the zero-mean-trace stresses.
  double ck = c.dot(kvec);
  VecOp project = [&ngram, c, kvec, ck](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v - kvec * (c.dot(v) / ck));
  };
  Eigen::VectorXd start = op(randomVector(ns));
  EigExtremes ext = lanczosExtremes(op, inner, start, kLanczosSteps, project);
  if (ext.max <= 0.0) throw std::runtime_error("inf-sup eigenproblem degenerate");
  return std::sqrt(1.0 / ext.max);
}

double kornConstant(const FESpace& gsp, const FESpace& usp, const FESpace& ssp) {
  requireDirichlet(ssp);
  SpMat x = assembleGUGram(gsp, usp);
  SpMat b = assembleB(ssp, gsp, usp);
  SpMat ksym = assembleGUSymGram(gsp, usp);
  // The transposed constraint block annihilates the constant identity tensor
  // (the G space is trace free), so bordering at a single dof carrying that
  // tensor forces both B y = 0 and a zero multiplier: k^T(B y + e_j mu) = 0
  // collapses to k_j mu = 0.  The unit border also keeps the factorization
  // sparse, and the third row merely fixes the multiplier gauge, which the
  // returned head block never sees.
  Eigen::VectorXd kvec = representConstantTensor(ssp, Mat2::identity());
  int kmax = 0;
  kvec.cwiseAbs().maxCoeff(&kmax);
  Eigen::VectorXd border = Eigen::VectorXd::Zero(kvec.size());
  border[kmax] = 1.0;
  auto saddle = factorSaddle(x, b, &border);
  int nx = saddle->n1, ns = saddle->n2;
  int total = nx + ns + (saddle->constrained ? 1 : 0);

  // y = (X-orthogonal projection onto ker B) X^{-1} K_sym x; self-adjoint in
  // the X inner product on ker B.
  VecOp op = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
    rhs.head(nx) = ksym * v;
    return Eigen::VectorXd(saddle->lu.solve(rhs).head(nx));
  };
  InnerProduct inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& bb) {
    return a.dot(x * bb);
  };
  VecOp project = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
    rhs.head(nx) = x * v;
    return Eigen::VectorXd(saddle->lu.solve(rhs).head(nx));
  };
  Eigen::VectorXd start = project(randomVector(nx));
  EigExtremes ext = lanczosExtremes(op, inner, start, kLanczosSteps, project);
  if (ext.min <= 0.0)
    return std::numeric_limits<double>::infinity();  // kernel with G^sym = 0
  return std::sqrt(std::max(1.0 / ext.min - 1.0, 0.0));
}

std::pair<double, double> traceEquivalenceConstants(const FESpace& ssp) {
  requireDirichlet(ssp);
  SpMat q1 = assembleSGram(ssp, true);
  SpMat q2 = assembleSGram(ssp, false);
  Eigen::VectorXd c = meanTraceVector(ssp);
  // Q2 is the full stress Gram and positive definite on its own; the zero
  // mode of the pencil is handled purely by deflation.
  auto aug = factorAugmented(q2, nullptr);
  int ns = aug->n1;
  int total = ns;
  // The constant identity tensor spans the kernel of the trace-free part of
  // the norm; Q2 * kvec = c, so deflating it is a Q2-orthogonal projection
  // onto the zero-mean-trace space.  Without it rounding drags the Lanczos
  // basis onto the zero mode.
  Eigen::VectorXd kvec = representConstantTensor(ssp, Mat2::identity());
  double ck = c.dot(kvec);
  auto deflate = [&](Eigen::VectorXd v) {
    v -= kvec * (c.dot(v) / ck);
    return v;
  };
  VecOp op = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
    rhs.head(ns) = q1 * s;
    return deflate(aug->lu.solve(rhs).head(ns));
  };
  InnerProduct inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& bb) {
    return a.dot(q2 * bb);
  };
  VecOp project = [&](const Eigen::VectorXd& v) { return deflate(v); };
  Eigen::VectorXd rhs0 = Eigen::VectorXd::Zero(total);
  rhs0.head(ns) = q2 * randomVector(ns);
  Eigen::VectorXd start = deflate(aug->lu.solve(rhs0).head(ns));
  EigExtremes ext = lanczosExtremes(op, inner, start, kLanczosSteps, project);
  return {ext.min, ext.max};
}

StabilityReport stabilityStudy(const StudyConfig& cfg) {
  StabilityReport report;
  report.family = cfg.family.name();
  for (int n : cfg.meshes) {
    Problem pr = makeProblem(cfg.family, n, false);
    StabilityRow row;
    row.h = pr.h;
    row.infsup = infsupConstant(pr.g, pr.u, pr.s);
    row.korn = kornConstant(pr.g, pr.u, pr.s);
    std::tie(row.trace_lo, row.trace_hi) = traceEquivalenceConstants(pr.s);
    report.rows.push_back(row);
  }
  return report;
}

KernelResult macroelementKernel(const FESpace& gsp, const FESpace& usp,
                                const FESpace& ssp, const MacroElement& patch,
                                bool include_skw) {
  // Local dof numbering over the patch.
  std::vector<int> sdofs, grows, urows;
  std::vector<int> smap(ssp.ndof, -1), gmap(gsp.ndof, -1), umap(usp.ndof, -1);
  auto isSkw = [&](int local) {
    switch (gsp.family.kind) {
      case FamilyKind::AugmentedAFW: return local == 6;
      case FamilyKind::AugmentedPEERS: return local >= 6;
      case FamilyKind::SVRT: return local % 3 == 2;
    }
    return false;
  };
  for (int t : patch.tris) {
    for (int d : ssp.elem_dofs[t])
      if (smap[d] < 0) {
        smap[d] = static_cast<int>(sdofs.size());
        sdofs.push_back(d);
      }
    for (int l = 0; l < gsp.localSize(t); ++l) {
      int d = gsp.elem_dofs[t][l];
      if (!include_skw && isSkw(l)) continue;
      if (gmap[d] < 0) {
        gmap[d] = static_cast<int>(grows.size());
        grows.push_back(d);
      }
    }
    for (int d : usp.elem_dofs[t])
      if (umap[d] < 0) {
        umap[d] = static_cast<int>(urows.size());
        urows.push_back(d);
      }
  }
  int nrows = static_cast<int>(grows.size() + urows.size());
  int ncols = static_cast<int>(sdofs.size());
  Eigen::MatrixXd constraints = Eigen::MatrixXd::Zero(nrows, ncols);
  for (int t : patch.tris) {
    Eigen::MatrixXd b = elemB(ssp, gsp, usp, t);
    int ngl = gsp.localSize(t);
    for (int i = 0; i < ssp.localSize(t); ++i) {
      int col = smap[ssp.elem_dofs[t][i]];
      for (int j = 0; j < ngl; ++j) {
        int row = gmap[gsp.elem_dofs[t][j]];
        if (row >= 0) constraints(row, col) += b(i, j);
      }
      for (int j = 0; j < usp.localSize(t); ++j)
        constraints(static_cast<int>(grows.size()) +
                        umap[usp.elem_dofs[t][j]],
                    col) += b(i, ngl + j);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  double cut = (sigma.size() ? sigma(0) : 0.0) * 1e-10;
  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > cut) ++rank;
  KernelResult out;
  out.dim = ncols - rank;
  if (out.dim == 1) {
    Eigen::VectorXd kern = svd.matrixV().col(ncols - 1);
    Eigen::VectorXd ifull = representConstantTensor(ssp, Mat2::identity());
    Eigen::VectorXd iv(ncols);
    for (int i = 0; i < ncols; ++i) iv[i] = ifull[sdofs[i]];
    double proj = iv.dot(kern) / iv.squaredNorm();
    out.identity_residual = (kern - proj * iv).norm() / kern.norm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

std::string toCsv(const ConvergenceReport& report) {
  std::string out = "h,err_Gsym,err_Gskw,err_u,err_S,err_divS\n";
  for (const ErrorRow& r : report.rows)
    out += fmtH(r.h) + "," + fmt(r.gsym) + "," + fmt(r.gskw) + "," + fmt(r.u) +
           "," + fmt(r.s) + "," + fmt(r.divs) + "\n";
  const ErrorRow& n = report.norms;
  out += "norm," + fmt(n.gsym) + "," + fmt(n.gskw) + "," + fmt(n.u) + "," +
         fmt(n.s) + "," + fmt(n.divs) + "\n";
  const ErrorRow& r = report.rates;
  out += "rate," + fmt(r.gsym) + "," + fmt(r.gskw) + "," + fmt(r.u) + "," +
         fmt(r.s) + "," + fmt(r.divs) + "\n";
  return out;
}

std::string toCsv(const StabilityReport& report) {
  std::string out = "h,infsup,korn,trace_lo,trace_hi\n";
  for (const StabilityRow& r : report.rows)
    out += fmtH(r.h) + "," + fmt(r.infsup) + "," + fmt(r.korn) + "," +
           fmt(r.trace_lo) + "," + fmt(r.trace_hi) + "\n";
  return out;
}

std::string toMarkdown(const ConvergenceReport& report) {
  std::string out =
      "| h | G sym | G skw | u | S | div S |\n|---|---|---|---|---|---|\n";
  for (const ErrorRow& r : report.rows)
    out += "| " + fmtH(r.h) + " | " + fmt(r.gsym) + " | " + fmt(r.gskw) +
           " | " + fmt(r.u) + " | " + fmt(r.s) + " | " + fmt(r.divs) + " |\n";
  const ErrorRow& n = report.norms;
  out += "| Norm | " + fmt(n.gsym) + " | " + fmt(n.gskw) + " | " + fmt(n.u) +
         " | " + fmt(n.s) + " | " + fmt(n.divs) + " |\n";
  const ErrorRow& r = report.rates;
  out += "| Rate | " + fmt(r.gsym) + " | " + fmt(r.gskw) + " | " + fmt(r.u) +
         " | " + fmt(r.s) + " | " + fmt(r.divs) + " |\n";
  return out;
}

std::string toMarkdown(const StabilityReport& report) {
  std::string out =
      "| h | inf-sup | Korn | trace lo | trace hi |\n|---|---|---|---|---|\n";
  for (const StabilityRow& r : report.rows)
    out += "| " + fmtH(r.h) + " | " + fmt(r.infsup) + " | " + fmt(r.korn) +
           " | " + fmt(r.trace_lo) + " | " + fmt(r.trace_hi) + " |\n";
  return out;
}

}  // namespace dualmix
