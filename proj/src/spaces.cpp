#include "dualmix/spaces.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>

#include "dualmix/quadrature.hpp"

namespace dualmix {

namespace {

const Mat2 kSym1{1.0, 0.0, 0.0, -1.0};
const Mat2 kSym2{0.0, 1.0, 1.0, 0.0};
const Mat2 kSkw{0.0, 1.0, -1.0, 0.0};

Poly affine(double c0, double cx, double cy) {
  Poly p;
  p.c[0] = c0;
  p.c[1] = cx;
  p.c[2] = cy;
  return p;
}

Poly polyMul(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < kPolyCoeffs; ++i) {
    if (a.c[i] == 0.0) continue;
    for (int j = 0; j < kPolyCoeffs; ++j) {
      if (b.c[j] == 0.0) continue;
      int px = Poly::px[i] + Poly::px[j];
      int py = Poly::py[i] + Poly::py[j];
      assert(px + py <= kPolyMaxDeg);
      r.c[Poly::index(px, py)] += a.c[i] * b.c[j];
    }
  }
  return r;
}

TensorPoly tensorTimes(const Mat2& m, const Poly& s) {
  TensorPoly t;
  for (int k = 0; k < 4; ++k) t.a[k] = s * m.a[k];
  return t;
}

struct ElemGeom {
  Vec2 center;
  double scale;
  std::array<Vec2, 3> verts;
};

ElemGeom elemGeom(const Triangulation& mesh, int t) {
  ElemGeom g;
  g.center = mesh.centroid(t);
  for (int i = 0; i < 3; ++i) g.verts[i] = mesh.vertices[mesh.triangles[t][i]];
  double h = 0.0;
  for (int i = 0; i < 3; ++i)
    h = std::max(h, (g.verts[(i + 1) % 3] - g.verts[i]).norm());
  g.scale = h;
  return g;
}

// Barycentric coordinates as affine polynomials in the scaled local frame.
std::array<Poly, 3> barycentricPolys(const ElemGeom& g) {
  Eigen::Matrix3d V;
  for (int j = 0; j < 3; ++j) {
    Vec2 xi = (g.verts[j] - g.center) / g.scale;
    V(0, j) = 1.0;
    V(1, j) = xi.x;
    V(2, j) = xi.y;
  }
  Eigen::Matrix3d C = V.inverse();  // lambda_i = C(i,0) + C(i,1) xi + C(i,2) eta
  std::array<Poly, 3> lam;
  for (int i = 0; i < 3; ++i) lam[i] = affine(C(i, 0), C(i, 1), C(i, 2));
  return lam;
}

void initCommon(FESpace& sp, Role role, ElementFamily fam,
                const Triangulation& mesh) {
  sp.role = role;
  sp.family = fam;
  sp.mesh = &mesh;
  int nt = mesh.numTriangles();
  sp.elem_dofs.resize(nt);
  sp.elem_center.resize(nt);
  sp.elem_scale.resize(nt);
  for (int t = 0; t < nt; ++t) {
    ElemGeom g = elemGeom(mesh, t);
    sp.elem_center[t] = g.center;
    sp.elem_scale[t] = g.scale;
  }
}

void requireRefined(ElementFamily fam, const Triangulation& mesh) {
  if (fam.isSVRT() && !mesh.isRefinement())
    throw std::invalid_argument(
        "SVRT spaces require a barycentric refinement (parent indices missing)");
}

FESpace buildGSpaceImpl(ElementFamily fam, const Triangulation& mesh) {
  FESpace sp;
  initCommon(sp, Role::G, fam, mesh);
  int nt = mesh.numTriangles();
  sp.tbasis.resize(nt);
  const Poly one = affine(1, 0, 0), xi = affine(0, 1, 0), eta = affine(0, 0, 1);
  const std::array<Poly, 3> modes{one, xi, eta};

  switch (fam.kind) {
    case FamilyKind::AugmentedAFW:
      sp.ndof = 7 * nt;
      for (int t = 0; t < nt; ++t) {
        for (int m = 0; m < 3; ++m) {
          sp.tbasis[t].push_back(tensorTimes(kSym1, modes[m]));
          sp.tbasis[t].push_back(tensorTimes(kSym2, modes[m]));
        }
        sp.tbasis[t].push_back(tensorTimes(kSkw, one));
        for (int k = 0; k < 7; ++k) sp.elem_dofs[t].push_back(7 * t + k);
      }
      break;
    case FamilyKind::AugmentedPEERS: {
      // 6 discontinuous symmetric trace-free dofs per triangle followed by
      // one continuous skew dof per vertex (hat functions).
      sp.ndof = 6 * nt + mesh.numVertices();
      for (int t = 0; t < nt; ++t) {
        for (int m = 0; m < 3; ++m) {
          sp.tbasis[t].push_back(tensorTimes(kSym1, modes[m]));
          sp.tbasis[t].push_back(tensorTimes(kSym2, modes[m]));
        }
        for (int k = 0; k < 6; ++k) sp.elem_dofs[t].push_back(6 * t + k);
        auto lam = barycentricPolys(elemGeom(mesh, t));
        for (int i = 0; i < 3; ++i) {
          sp.tbasis[t].push_back(tensorTimes(kSkw, lam[i]));
          sp.elem_dofs[t].push_back(6 * nt + mesh.triangles[t][i]);
        }
      }
      break;
    }
    case FamilyKind::SVRT:
      sp.ndof = 9 * nt;
      for (int t = 0; t < nt; ++t) {
        for (int m = 0; m < 3; ++m) {
          sp.tbasis[t].push_back(tensorTimes(kSym1, modes[m]));
          sp.tbasis[t].push_back(tensorTimes(kSym2, modes[m]));
          sp.tbasis[t].push_back(tensorTimes(kSkw, modes[m]));
        }
        for (int k = 0; k < 9; ++k) sp.elem_dofs[t].push_back(9 * t + k);
      }
      break;
  }
  return sp;
}

FESpace buildUSpaceImpl(ElementFamily fam, const Triangulation& mesh) {
  FESpace sp;
  initCommon(sp, Role::U, fam, mesh);
  int nt = mesh.numTriangles();
  sp.vbasis.resize(nt);
  const Poly one = affine(1, 0, 0), xi = affine(0, 1, 0), eta = affine(0, 0, 1);
  const std::array<Poly, 3> modes{one, xi, eta};
  int nmodes = fam.isSVRT() ? 3 : 1;
  sp.ndof = 2 * nmodes * nt;
  for (int t = 0; t < nt; ++t) {
    for (int m = 0; m < nmodes; ++m) {
      VecPoly vx, vy;
      vx.x = modes[m];
      vy.y = modes[m];
      sp.vbasis[t].push_back(vx);
      sp.vbasis[t].push_back(vy);
      sp.elem_dofs[t].push_back(2 * nmodes * t + 2 * m);
      sp.elem_dofs[t].push_back(2 * nmodes * t + 2 * m + 1);
    }
  }
  return sp;
}

// Edge-moment functional: (1/|e|) int_e v . n_e  P_q(s) ds, with s in [-1,1]
// running from the lower to the higher vertex index of the edge.
double edgeMoment(const Triangulation& mesh, int edge, int q, const ElemGeom& g,
                  const VecPoly& v) {
  const EdgeRule& rule = edgeRule(7);
  Vec2 pa = mesh.vertices[mesh.edges[edge].a];
  Vec2 pb = mesh.vertices[mesh.edges[edge].b];
  Vec2 n = mesh.edgeNormal(edge);
  double acc = 0.0;
  for (size_t k = 0; k < rule.points.size(); ++k) {
    double s = rule.points[k];
    Vec2 x = (pa + pb) * 0.5 + (pb - pa) * (0.5 * s);
    Vec2 xi = (x - g.center) / g.scale;
    double leg = (q == 0) ? 1.0 : s;
    acc += 0.5 * rule.weights[k] * v.eval(xi).dot(n) * leg;
  }
  return acc;
}

// (1/|K|) int_K v_c dx over the physical triangle.
double interiorMoment(const Triangulation& mesh, int t, int c, const ElemGeom& g,
                      const VecPoly& v) {
  const QuadratureRule& rule = triangleRule(4);
  Vec2 p0 = g.verts[0];
  Vec2 e1 = g.verts[1] - p0, e2 = g.verts[2] - p0;
  double acc = 0.0;
  for (size_t k = 0; k < rule.points.size(); ++k) {
    Vec2 x = p0 + e1 * rule.points[k].x + e2 * rule.points[k].y;
    Vec2 xi = (x - g.center) / g.scale;
    Vec2 val = v.eval(xi);
    acc += 2.0 * rule.weights[k] * (c == 0 ? val.x : val.y);
  }
  return acc;  // weights sum to 1/2, factor 2 makes this an average
}

Poly divergence(const VecPoly& v, double scale) {
  Poly d = v.x.dx();
  d += v.y.dy();
  return d * (1.0 / scale);
}

}  // namespace

std::string ElementFamily::name() const {
  switch (kind) {
    case FamilyKind::AugmentedPEERS: return "peers";
    case FamilyKind::AugmentedAFW: return "afw";
    case FamilyKind::SVRT: return "svrt" + std::to_string(order);
  }
  return "?";
}

ElementFamily ElementFamily::parse(const std::string& tag) {
  if (tag == "peers") return {FamilyKind::AugmentedPEERS, 1};
  if (tag == "afw") return {FamilyKind::AugmentedAFW, 1};
  if (tag == "svrt1" || tag == "svrt") return {FamilyKind::SVRT, 1};
  throw std::invalid_argument("unknown element family: " + tag);
}

FESpace buildGSpace(ElementFamily family, const Triangulation& mesh) {
  requireRefined(family, mesh);
  return buildGSpaceImpl(family, mesh);
}
FESpace buildGSpaceUnchecked(ElementFamily family, const Triangulation& mesh) {
  return buildGSpaceImpl(family, mesh);
}

FESpace buildUSpace(ElementFamily family, const Triangulation& mesh) {
  requireRefined(family, mesh);
  return buildUSpaceImpl(family, mesh);
}
FESpace buildUSpaceUnchecked(ElementFamily family, const Triangulation& mesh) {
  return buildUSpaceImpl(family, mesh);
}

FESpace buildSSpace(ElementFamily family, const Triangulation& mesh) {
  std::vector<int> traction;
  for (int e = 0; e < mesh.numEdges(); ++e)
    if (mesh.edges[e].tag == BoundaryTag::Traction) traction.push_back(e);
  return buildSSpace(family, mesh, traction);
}

FESpace buildSSpace(ElementFamily family, const Triangulation& mesh,
                    const std::vector<int>& traction_edges) {
  requireRefined(family, mesh);
  for (int e : traction_edges)
    if (e < 0 || e >= mesh.numEdges() || !mesh.isBoundaryEdge(e))
      throw std::invalid_argument("traction edge " + std::to_string(e) +
                                  " is not a boundary edge");

  FESpace sp;
  initCommon(sp, Role::S, family, mesh);
  int nt = mesh.numTriangles();
  int ne = mesh.numEdges();
  sp.tbasis.resize(nt);
  sp.divs.resize(nt);

  const bool bdm = family.kind == FamilyKind::AugmentedAFW;
  const bool rt1 = family.kind == FamilyKind::SVRT;
  const bool rt0 = family.kind == FamilyKind::AugmentedPEERS;
  const int edge_moments = rt0 ? 1 : 2;

  if (bdm) sp.ndof = 4 * ne;
  else if (rt1) sp.ndof = 4 * ne + 4 * nt;
  else sp.ndof = 2 * ne + 2 * nt;

  const Poly one = affine(1, 0, 0), xi = affine(0, 1, 0), eta = affine(0, 0, 1);

  for (int t = 0; t < nt; ++t) {
    ElemGeom g = elemGeom(mesh, t);

    // Candidate vector fields for one row of the stress.
    std::vector<VecPoly> mono;
    auto addMono = [&mono](const Poly& px, const Poly& py) {
      VecPoly v;
      v.x = px;
      v.y = py;
      mono.push_back(v);
    };
    if (rt0) {
      addMono(one, Poly{});
      addMono(Poly{}, one);
      addMono(xi, eta);
    } else {
      addMono(one, Poly{});
      addMono(xi, Poly{});
      addMono(eta, Poly{});
      addMono(Poly{}, one);
      addMono(Poly{}, xi);
      addMono(Poly{}, eta);
      if (rt1) {
        addMono(polyMul(xi, xi), polyMul(xi, eta));
        addMono(polyMul(xi, eta), polyMul(eta, eta));
      }
    }
    const int nv = static_cast<int>(mono.size());

    // DOF functionals in local order: (edge, moment) then interior averages.
    Eigen::MatrixXd D(nv, nv);
    int row = 0;
    for (int le = 0; le < 3; ++le)
      for (int q = 0; q < edge_moments; ++q, ++row)
        for (int j = 0; j < nv; ++j)
          D(row, j) = edgeMoment(mesh, mesh.tri_edges[t][le], q, g, mono[j]);
    if (rt1)
      for (int c = 0; c < 2; ++c, ++row)
        for (int j = 0; j < nv; ++j)
          D(row, j) = interiorMoment(mesh, t, c, g, mono[j]);
    Eigen::MatrixXd C = D.partialPivLu().solve(Eigen::MatrixXd::Identity(nv, nv));

    std::vector<VecPoly> nodal(nv);
    for (int k = 0; k < nv; ++k) {
      for (int j = 0; j < nv; ++j) {
        nodal[k].x += mono[j].x * C(j, k);
        nodal[k].y += mono[j].y * C(j, k);
      }
    }

    // Tensor shape functions: each row gets an independent copy.
    auto pushRowFn = [&](int r, const VecPoly& v, int gid) {
      TensorPoly tp;
      tp.a[2 * r] = v.x;
      tp.a[2 * r + 1] = v.y;
      VecPoly dv;
      Poly d = divergence(v, g.scale);
      if (r == 0) dv.x = d;
      else dv.y = d;
      sp.tbasis[t].push_back(tp);
      sp.divs[t].push_back(dv);
      sp.elem_dofs[t].push_back(gid);
    };

    for (int r = 0; r < 2; ++r) {
      int k = 0;
      for (int le = 0; le < 3; ++le) {
        int ge = mesh.tri_edges[t][le];
        for (int q = 0; q < edge_moments; ++q, ++k) {
          int gid = rt0 ? 2 * ge + r : 4 * ge + 2 * r + q;
          pushRowFn(r, nodal[k], gid);
        }
      }
      if (rt1)
        for (int c = 0; c < 2; ++c, ++k)
          pushRowFn(r, nodal[k], 4 * ne + 4 * t + 2 * r + c);
    }

    if (rt0) {
      // PEERS bubble: psi (x) (grad b)^perp with b = 27 l0 l1 l2.
      auto lam = barycentricPolys(g);
      Poly b = polyMul(polyMul(lam[0], lam[1]), lam[2]) * 27.0;
      Poly bx = b.dx() * (1.0 / g.scale);
      Poly by = b.dy() * (1.0 / g.scale);
      VecPoly curl;  // (grad b)^perp = (-b_y, b_x)
      curl.x = by * -1.0;
      curl.y = bx;
      for (int r = 0; r < 2; ++r) pushRowFn(r, curl, 2 * ne + 2 * t + r);
    }
  }

  sp.dof_on_traction.assign(sp.ndof, 0);
  for (int e : traction_edges) {
    if (rt0) {
      sp.traction_dofs.push_back(2 * e);
      sp.traction_dofs.push_back(2 * e + 1);
    } else {
      for (int k = 0; k < 4; ++k) sp.traction_dofs.push_back(4 * e + k);
    }
  }
  for (int d : sp.traction_dofs) sp.dof_on_traction[d] = 1;
  sp.mean_trace_active = traction_edges.empty();
  return sp;
}

Eigen::VectorXd representConstantTensor(const FESpace& sspace, const Mat2& m) {
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(sspace.ndof);
  const Triangulation& mesh = *sspace.mesh;
  const bool rt0 = sspace.family.kind == FamilyKind::AugmentedPEERS;
  const bool rt1 = sspace.family.kind == FamilyKind::SVRT;
  for (int e = 0; e < mesh.numEdges(); ++e) {
    Vec2 n = mesh.edgeNormal(e);
    for (int r = 0; r < 2; ++r) {
      double flux = m.row(r).dot(n);
      if (rt0) coeff[2 * e + r] = flux;
      else coeff[4 * e + 2 * r] = flux;  // first moment only; P1(s) moment is 0
    }
  }
  if (rt1)
    for (int t = 0; t < mesh.numTriangles(); ++t)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          coeff[4 * mesh.numEdges() + 4 * t + 2 * r + c] = m(r, c);
  return coeff;
}

}  // namespace dualmix
