#include "dualmix/forms.hpp"

#include <vector>

#include "dualmix/quadrature.hpp"

namespace dualmix {

namespace {

constexpr int kAssemblyDegree = 6;  // exact for all shipped shape functions

struct ElemQuad {
  std::vector<Vec2> x;       // physical points
  std::vector<double> w;     // physical weights (include the Jacobian)
};

ElemQuad elemQuad(const Triangulation& mesh, int t, int degree) {
  const QuadratureRule& rule = triangleRule(degree);
  Vec2 p0 = mesh.vertices[mesh.triangles[t][0]];
  Vec2 e1 = mesh.vertices[mesh.triangles[t][1]] - p0;
  Vec2 e2 = mesh.vertices[mesh.triangles[t][2]] - p0;
  double jac = 2.0 * mesh.area(t);
  ElemQuad q;
  q.x.reserve(rule.points.size());
  q.w.reserve(rule.points.size());
  for (size_t k = 0; k < rule.points.size(); ++k) {
    q.x.push_back(p0 + e1 * rule.points[k].x + e2 * rule.points[k].y);
    q.w.push_back(rule.weights[k] * jac);
  }
  return q;
}

Vec2 velocityAt(const FESpace& usp, int t, const Vec2& x,
                const Eigen::VectorXd& state, int offset) {
  Vec2 w;
  for (int k = 0; k < usp.localSize(t); ++k) {
    double c = state[offset + usp.elem_dofs[t][k]];
    Vec2 v = usp.evalVector(t, k, x);
    w = w + v * c;
  }
  return w;
}

Mat2 gradientAt(const FESpace& gsp, int t, const Vec2& x,
                const Eigen::VectorXd& state) {
  Mat2 g;
  for (int k = 0; k < gsp.localSize(t); ++k)
    g = g + gsp.evalTensor(t, k, x) * state[gsp.elem_dofs[t][k]];
  return g;
}

template <typename Kernel>
SpMat assembleBlocks(int rows, int cols, const Triangulation& mesh, Kernel kernel) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.numTriangles(); ++t) kernel(t, trips);
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void scatter(const Eigen::MatrixXd& local, const std::vector<int>& rows,
             const std::vector<int>& cols, std::vector<Eigen::Triplet<double>>& out) {
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      if (local(i, j) != 0.0) out.emplace_back(rows[i], cols[j], local(i, j));
}

// Combined (G,u) dof list of an element, U dofs shifted by nG.
std::vector<int> guDofs(const FESpace& gsp, const FESpace& usp, int t) {
  std::vector<int> dofs = gsp.elem_dofs[t];
  for (int d : usp.elem_dofs[t]) dofs.push_back(gsp.ndof + d);
  return dofs;
}

}  // namespace

Eigen::MatrixXd elemA(const FESpace& gsp, const ConstitutiveLaw& law, int t) {
  int n = gsp.localSize(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  ElemQuad q = elemQuad(*gsp.mesh, t, kAssemblyDegree);
  std::vector<Mat2> vals(n);
  for (size_t k = 0; k < q.x.size(); ++k) {
    for (int i = 0; i < n; ++i) vals[i] = gsp.evalTensor(t, i, q.x[k]);
    for (int j = 0; j < n; ++j) {
      Mat2 aj = law.apply(vals[j]);
      for (int i = 0; i < n; ++i) m(i, j) += q.w[k] * aj.frobInner(vals[i]);
    }
  }
  return m;
}

Eigen::MatrixXd elemB(const FESpace& ssp, const FESpace& gsp, const FESpace& usp,
                      int t) {
  int ns = ssp.localSize(t);
  int ng = gsp.localSize(t);
  int nu = usp.localSize(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ns, ng + nu);
  ElemQuad q = elemQuad(*ssp.mesh, t, kAssemblyDegree);
  for (size_t k = 0; k < q.x.size(); ++k) {
    for (int i = 0; i < ns; ++i) {
      Mat2 ti = ssp.evalTensor(t, i, q.x[k]);
      Vec2 di = ssp.evalDiv(t, i, q.x[k]);
      for (int j = 0; j < ng; ++j)
        m(i, j) += q.w[k] * ti.frobInner(gsp.evalTensor(t, j, q.x[k]));
      for (int j = 0; j < nu; ++j)
        m(i, ng + j) += q.w[k] * di.dot(usp.evalVector(t, j, q.x[k]));
    }
  }
  return m;
}

Eigen::MatrixXd elemConvection(const FESpace& gsp, const FESpace& usp, int t,
                               const Eigen::VectorXd& state) {
  int ng = gsp.localSize(t);
  int nu = usp.localSize(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ng + nu, ng + nu);
  ElemQuad q = elemQuad(*gsp.mesh, t, kAssemblyDegree);
  for (size_t k = 0; k < q.x.size(); ++k) {
    Vec2 w = velocityAt(usp, t, q.x[k], state, gsp.ndof);
    for (int j = 0; j < ng; ++j) {
      Vec2 gw = gsp.evalTensor(t, j, q.x[k]).apply(w);
      for (int i = 0; i < nu; ++i)
        m(ng + i, j) += 0.5 * q.w[k] * gw.dot(usp.evalVector(t, i, q.x[k]));
    }
    for (int i = 0; i < ng; ++i) {
      Vec2 hw = gsp.evalTensor(t, i, q.x[k]).apply(w);
      for (int j = 0; j < nu; ++j)
        m(i, ng + j) -= 0.5 * q.w[k] * hw.dot(usp.evalVector(t, j, q.x[k]));
    }
  }
  return m;
}

Eigen::MatrixXd elemConvectionFirstSlot(const FESpace& gsp, const FESpace& usp,
                                        int t, const Eigen::VectorXd& state) {
  int ng = gsp.localSize(t);
  int nu = usp.localSize(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ng + nu, ng + nu);
  ElemQuad q = elemQuad(*gsp.mesh, t, kAssemblyDegree);
  for (size_t k = 0; k < q.x.size(); ++k) {
    Vec2 uw = velocityAt(usp, t, q.x[k], state, gsp.ndof);
    Mat2 gw = gradientAt(gsp, t, q.x[k], state);
    for (int j = 0; j < nu; ++j) {
      Vec2 uj = usp.evalVector(t, j, q.x[k]);
      Vec2 gwuj = gw.apply(uj);
      for (int i = 0; i < nu; ++i)
        m(ng + i, ng + j) += 0.5 * q.w[k] * gwuj.dot(usp.evalVector(t, i, q.x[k]));
      for (int i = 0; i < ng; ++i)
        m(i, ng + j) -= 0.5 * q.w[k] * gsp.evalTensor(t, i, q.x[k]).apply(uj).dot(uw);
    }
  }
  return m;
}

Eigen::MatrixXd elemMassU(const FESpace& usp, int t) {
  int n = usp.localSize(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  ElemQuad q = elemQuad(*usp.mesh, t, kAssemblyDegree);
  for (size_t k = 0; k < q.x.size(); ++k)
    for (int i = 0; i < n; ++i) {
      Vec2 vi = usp.evalVector(t, i, q.x[k]);
      for (int j = 0; j < n; ++j)
        m(i, j) += q.w[k] * vi.dot(usp.evalVector(t, j, q.x[k]));
    }
  return m;
}

Eigen::VectorXd elemLoad(const FESpace& usp, int t, const VecFn& f, int degree) {
  int n = usp.localSize(t);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  ElemQuad q = elemQuad(*usp.mesh, t, degree);
  for (size_t k = 0; k < q.x.size(); ++k) {
    Vec2 fx = f(q.x[k]);
    for (int i = 0; i < n; ++i)
      v[i] += q.w[k] * fx.dot(usp.evalVector(t, i, q.x[k]));
  }
  return v;
}

SpMat assembleA(const FESpace& gsp, const FESpace& usp, const ConstitutiveLaw& law) {
  int n = gsp.ndof + usp.ndof;
  return assembleBlocks(n, n, *gsp.mesh, [&](int t, auto& trips) {
    scatter(elemA(gsp, law, t), gsp.elem_dofs[t], gsp.elem_dofs[t], trips);
  });
}

SpMat assembleB(const FESpace& ssp, const FESpace& gsp, const FESpace& usp) {
  return assembleBlocks(ssp.ndof, gsp.ndof + usp.ndof, *ssp.mesh,
                        [&](int t, auto& trips) {
                          scatter(elemB(ssp, gsp, usp, t), ssp.elem_dofs[t],
                                  guDofs(gsp, usp, t), trips);
                        });
}

SpMat assembleConvection(const FESpace& gsp, const FESpace& usp,
                         const Eigen::VectorXd& state) {
  int n = gsp.ndof + usp.ndof;
  return assembleBlocks(n, n, *gsp.mesh, [&](int t, auto& trips) {
    auto dofs = guDofs(gsp, usp, t);
    scatter(elemConvection(gsp, usp, t, state), dofs, dofs, trips);
  });
}

SpMat assembleConvectionFirstSlot(const FESpace& gsp, const FESpace& usp,
                                  const Eigen::VectorXd& state) {
  int n = gsp.ndof + usp.ndof;
  return assembleBlocks(n, n, *gsp.mesh, [&](int t, auto& trips) {
    auto dofs = guDofs(gsp, usp, t);
    scatter(elemConvectionFirstSlot(gsp, usp, t, state), dofs, dofs, trips);
  });
}

Eigen::VectorXd assembleLoad(const FESpace& gsp, const FESpace& usp, const VecFn& f,
                             int degree) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(gsp.ndof + usp.ndof);
  for (int t = 0; t < usp.mesh->numTriangles(); ++t) {
    Eigen::VectorXd local = elemLoad(usp, t, f, degree);
    for (int k = 0; k < usp.localSize(t); ++k)
      v[gsp.ndof + usp.elem_dofs[t][k]] += local[k];
  }
  return v;
}

Eigen::VectorXd assembleDirichletData(const FESpace& ssp, const VecFn& g,
                                      int degree) {
  const Triangulation& mesh = *ssp.mesh;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ssp.ndof);
  if (!g) return rhs;
  const EdgeRule& rule = edgeRule(degree);
  for (int e = 0; e < mesh.numEdges(); ++e) {
    if (mesh.edges[e].tag != BoundaryTag::Dirichlet) continue;
    int t = mesh.edge_tris[e][0];
    Vec2 pa = mesh.vertices[mesh.edges[e].a];
    Vec2 pb = mesh.vertices[mesh.edges[e].b];
    Vec2 n_out = mesh.outwardNormal(e);
    double half_len = 0.5 * mesh.edgeLength(e);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      Vec2 x = (pa + pb) * 0.5 + (pb - pa) * (0.5 * rule.points[k]);
      Vec2 gx = g(x);
      double w = rule.weights[k] * half_len;
      for (int i = 0; i < ssp.localSize(t); ++i) {
        Vec2 tn = ssp.evalTensor(t, i, x).apply(n_out);
        rhs[ssp.elem_dofs[t][i]] += w * gx.dot(tn);
      }
    }
  }
  return rhs;
}

Eigen::VectorXd meanTraceVector(const FESpace& ssp) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ssp.ndof);
  for (int t = 0; t < ssp.mesh->numTriangles(); ++t) {
    ElemQuad q = elemQuad(*ssp.mesh, t, kAssemblyDegree);
    for (size_t k = 0; k < q.x.size(); ++k)
      for (int i = 0; i < ssp.localSize(t); ++i)
        c[ssp.elem_dofs[t][i]] += q.w[k] * ssp.evalTensor(t, i, q.x[k]).trace();
  }
  return c;
}

Eigen::VectorXd interpolateTraction(const FESpace& ssp, const TenFn& exact_stress,
                                    int degree) {
  const Triangulation& mesh = *ssp.mesh;
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(ssp.ndof);
  if (!exact_stress || ssp.traction_dofs.empty()) return vals;
  const EdgeRule& rule = edgeRule(degree);
  const bool rt0 = ssp.family.kind == FamilyKind::AugmentedPEERS;
  const int moments = rt0 ? 1 : 2;
  for (int e = 0; e < mesh.numEdges(); ++e) {
    if (mesh.edges[e].tag != BoundaryTag::Traction) continue;
    Vec2 pa = mesh.vertices[mesh.edges[e].a];
    Vec2 pb = mesh.vertices[mesh.edges[e].b];
    Vec2 n = mesh.edgeNormal(e);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      double s = rule.points[k];
      Vec2 x = (pa + pb) * 0.5 + (pb - pa) * (0.5 * s);
      Mat2 sx = exact_stress(x);
      for (int r = 0; r < 2; ++r) {
        double flux = sx.row(r).dot(n);
        for (int q = 0; q < moments; ++q) {
          double leg = (q == 0) ? 1.0 : s;
          int dof = rt0 ? 2 * e + r : 4 * e + 2 * r + q;
          vals[dof] += 0.5 * rule.weights[k] * flux * leg;
        }
      }
    }
  }
  return vals;
}

SpMat assembleGUGram(const FESpace& gsp, const FESpace& usp) {
  int n = gsp.ndof + usp.ndof;
  return assembleBlocks(n, n, *gsp.mesh, [&](int t, auto& trips) {
    int ng = gsp.localSize(t);
    Eigen::MatrixXd mg = Eigen::MatrixXd::Zero(ng, ng);
    ElemQuad q = elemQuad(*gsp.mesh, t, kAssemblyDegree);
    for (size_t k = 0; k < q.x.size(); ++k)
      for (int i = 0; i < ng; ++i) {
        Mat2 gi = gsp.evalTensor(t, i, q.x[k]);
        for (int j = 0; j < ng; ++j)
          mg(i, j) += q.w[k] * gi.frobInner(gsp.evalTensor(t, j, q.x[k]));
      }
    scatter(mg, gsp.elem_dofs[t], gsp.elem_dofs[t], trips);
    std::vector<int> udofs;
    for (int d : usp.elem_dofs[t]) udofs.push_back(gsp.ndof + d);
    scatter(elemMassU(usp, t), udofs, udofs, trips);
  });
}

namespace {
SpMat assembleSGramImpl(const FESpace& ssp, bool trace_free_part, bool with_div,
                        bool sym_part) {
  return assembleBlocks(ssp.ndof, ssp.ndof, *ssp.mesh, [&](int t, auto& trips) {
    int n = ssp.localSize(t);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    ElemQuad q = elemQuad(*ssp.mesh, t, kAssemblyDegree);
    std::vector<Mat2> vals(n);
    std::vector<Vec2> dvals(n);
    for (size_t k = 0; k < q.x.size(); ++k) {
      for (int i = 0; i < n; ++i) {
        Mat2 v = ssp.evalTensor(t, i, q.x[k]);
        if (trace_free_part) v = v.dev();
        if (sym_part) v = v.sym();
        vals[i] = v;
        if (with_div) dvals[i] = ssp.evalDiv(t, i, q.x[k]);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double val = vals[i].frobInner(vals[j]);
          if (with_div) val += dvals[i].dot(dvals[j]);
          m(i, j) += q.w[k] * val;
        }
    }
    scatter(m, ssp.elem_dofs[t], ssp.elem_dofs[t], trips);
  });
}
}  // namespace

SpMat assembleSGram(const FESpace& ssp, bool trace_free_part) {
  return assembleSGramImpl(ssp, trace_free_part, true, false);
}

SpMat assembleSSymGram(const FESpace& ssp) {
  return assembleSGramImpl(ssp, false, false, true);
}

SpMat assembleGUSymGram(const FESpace& gsp, const FESpace& usp) {
  int n = gsp.ndof + usp.ndof;
  return assembleBlocks(n, n, *gsp.mesh, [&](int t, auto& trips) {
    int ng = gsp.localSize(t);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ng, ng);
    ElemQuad q = elemQuad(*gsp.mesh, t, kAssemblyDegree);
    for (size_t k = 0; k < q.x.size(); ++k)
      for (int i = 0; i < ng; ++i) {
        Mat2 gi = gsp.evalTensor(t, i, q.x[k]).sym();
        for (int j = 0; j < ng; ++j)
          m(i, j) += q.w[k] * gi.frobInner(gsp.evalTensor(t, j, q.x[k]).sym());
      }
    scatter(m, gsp.elem_dofs[t], gsp.elem_dofs[t], trips);
  });
}

AssembledSystem assembleSystem(const FESpace& gsp, const FESpace& usp,
                               const FESpace& ssp, const ConstitutiveLaw& law,
                               const VecFn& f, const VecFn& dirichlet_g,
                               const TenFn& exact_stress, int data_degree) {
  AssembledSystem sys;
  sys.nG = gsp.ndof;
  sys.nU = usp.ndof;
  sys.nS = ssp.ndof;
  sys.A = assembleA(gsp, usp, law);
  sys.B = assembleB(ssp, gsp, usp);
  sys.load = f ? assembleLoad(gsp, usp, f, data_degree)
               : Eigen::VectorXd::Zero(sys.nG + sys.nU);
  sys.dirichlet = assembleDirichletData(ssp, dirichlet_g, data_degree);
  sys.mean_trace = ssp.mean_trace_active;
  if (sys.mean_trace) sys.trace_c = meanTraceVector(ssp);
  sys.traction = interpolateTraction(ssp, exact_stress, data_degree);
  return sys;
}

}  // namespace dualmix
