#include <Eigen/Dense>

#include <random>

#include "doctest.h"
#include "dualmix/forms.hpp"

using namespace dualmix;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(7);
  return gen;
}

double uniform(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng());
}

Mat2 randomMat() {
  return {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
}

Eigen::VectorXd randomVec(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("constitutive law properties on 1000 random matrix pairs") {
  ConstitutiveLaw law;
  for (int trial = 0; trial < 1000; ++trial) {
    Mat2 g = randomMat(), h = randomMat();
    // symmetric-part dependence
    CHECK((law.apply(g) - law.apply(g.sym())).frobNorm() < 1e-14);
    // coercivity on the symmetric part
    double lhs = law.apply(g).frobInner(g);
    double rhs = law.nu * g.sym().frobInner(g.sym());
    CHECK(lhs >= rhs - 1e-14);
    // boundedness
    CHECK(std::abs(law.apply(g).frobInner(h)) <=
          2.0 * law.nu * g.frobNorm() * h.frobNorm() + 1e-14);
  }
}

TEST_CASE("viscous block is symmetric and matches a hand value") {
  Triangulation mesh = uniformSquareMesh(2);
  FESpace g = buildGSpace(ElementFamily::parse("afw"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("afw"), mesh);
  ConstitutiveLaw law;
  SpMat a = assembleA(g, u, law);
  Eigen::MatrixXd ad(a);
  CHECK((ad - ad.transpose()).cwiseAbs().maxCoeff() < 1e-13);
  // Constant symmetric mode with |E|_F^2 = 2: (A(E), E) over one triangle is
  // 2 nu |E|_F^2 |K| = 4 nu |K|.
  Eigen::MatrixXd ea = elemA(g, law, 0);
  CHECK(ea(0, 0) == doctest::Approx(4.0 * law.nu * mesh.area(0)).epsilon(1e-12));
  // Skew constant mode (local index 6) is viscously invisible.
  CHECK(std::abs(ea(6, 6)) < 1e-14);
}

TEST_CASE("convection operator is skew on 100 random state/test pairs") {
  Triangulation mesh = uniformSquareMesh(3);
  FESpace g = buildGSpace(ElementFamily::parse("afw"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("afw"), mesh);
  int n = g.ndof + u.ndof;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd w = randomVec(n), x = randomVec(n);
    SpMat c = assembleConvection(g, u, w);
    double q = x.dot(c * x);
    CHECK(std::abs(q) < 1e-12 * std::max(1.0, x.squaredNorm()));
  }
}

TEST_CASE("first-slot linearization matches a finite difference") {
  Triangulation mesh = uniformSquareMesh(2);
  FESpace g = buildGSpace(ElementFamily::parse("afw"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("afw"), mesh);
  int n = g.ndof + u.ndof;
  Eigen::VectorXd x = randomVec(n), d = randomVec(n);
  SpMat cx = assembleConvection(g, u, x);
  SpMat c1 = assembleConvectionFirstSlot(g, u, x);
  const double eps = 1e-7;
  Eigen::VectorXd xp = x + eps * d;
  SpMat cxp = assembleConvection(g, u, xp);
  Eigen::VectorXd fd = (cxp * xp - cx * x) / eps;
  Eigen::VectorXd lin = cx * d + c1 * d;
  CHECK((fd - lin).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("load vector reproduces a constant forcing on P0 velocities") {
  Triangulation mesh = uniformSquareMesh(2);
  FESpace g = buildGSpace(ElementFamily::parse("afw"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("afw"), mesh);
  Vec2 f{0.7, -1.3};
  Eigen::VectorXd load = assembleLoad(g, u, [&](const Vec2&) { return f; }, 4);
  CHECK(load.head(g.ndof).cwiseAbs().maxCoeff() == 0.0);
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    CHECK(load[g.ndof + u.elem_dofs[t][0]] ==
          doctest::Approx(f.x * mesh.area(t)).epsilon(1e-12));
    CHECK(load[g.ndof + u.elem_dofs[t][1]] ==
          doctest::Approx(f.y * mesh.area(t)).epsilon(1e-12));
  }
}

TEST_CASE("divergence theorem ties the b form to the boundary data term") {
  // For u linear (trace-free gradient) and its exact representation in the
  // SVRT spaces, (G,T) + (u, div T) must equal the assembled boundary term
  // int_Gamma u . (T n) for every stress basis function.
  Triangulation base = uniformSquareMesh(2);
  Triangulation mesh = barycentricRefine(base);
  FESpace g = buildGSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("svrt1"), mesh);
  FESpace s = buildSSpace(ElementFamily::parse("svrt1"), mesh);
  Mat2 grad{0.4, -1.1, 0.8, -0.4};  // trace free
  Vec2 u0{0.3, 0.9};
  auto uexact = [&](const Vec2& x) { return u0 + grad.apply(x); };

  Eigen::VectorXd state = Eigen::VectorXd::Zero(g.ndof + u.ndof);
  double e1 = (grad(0, 0) - grad(1, 1)) / 2;  // = grad(0,0) here
  double e2 = (grad(0, 1) + grad(1, 0)) / 2;
  double sk = (grad(0, 1) - grad(1, 0)) / 2;
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    state[g.elem_dofs[t][0]] = e1;
    state[g.elem_dofs[t][1]] = e2;
    state[g.elem_dofs[t][2]] = sk;
    Vec2 uc = uexact(s.elem_center[t]);
    double sc = s.elem_scale[t];
    int base_dof = g.ndof;
    state[base_dof + u.elem_dofs[t][0]] = uc.x;
    state[base_dof + u.elem_dofs[t][1]] = uc.y;
    state[base_dof + u.elem_dofs[t][2]] = sc * grad(0, 0);
    state[base_dof + u.elem_dofs[t][3]] = sc * grad(1, 0);
    state[base_dof + u.elem_dofs[t][4]] = sc * grad(0, 1);
    state[base_dof + u.elem_dofs[t][5]] = sc * grad(1, 1);
  }
  SpMat b = assembleB(s, g, u);
  Eigen::VectorXd boundary = assembleDirichletData(s, uexact, 8);
  Eigen::VectorXd residual = b * state - boundary;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("traction interpolation of a space member is exact") {
  Rect rect;
  Triangulation mesh = uniformSquareMesh(3, rect, tractionRightTag(rect));
  FESpace s = buildSSpace(ElementFamily::parse("afw"), mesh);
  Mat2 m{1.0, 0.5, -0.25, 2.0};
  Eigen::VectorXd exact = representConstantTensor(s, m);
  Eigen::VectorXd interp =
      interpolateTraction(s, [&](const Vec2&) { return m; }, 8);
  for (int d : s.traction_dofs)
    CHECK(interp[d] == doctest::Approx(exact[d]).epsilon(1e-12));
}

TEST_CASE("mean-trace vector integrates the trace of the identity") {
  Triangulation mesh = uniformSquareMesh(3);
  for (const char* fam : {"peers", "afw"}) {
    FESpace s = buildSSpace(ElementFamily::parse(fam), mesh);
    Eigen::VectorXd c = meanTraceVector(s);
    Eigen::VectorXd id = representConstantTensor(s, Mat2::identity());
    CHECK(c.dot(id) == doctest::Approx(2.0 * 4.0).epsilon(1e-12));
  }
}

TEST_CASE("assembled system with zero data has zero right-hand sides") {
  Triangulation mesh = uniformSquareMesh(2);
  FESpace g = buildGSpace(ElementFamily::parse("afw"), mesh);
  FESpace u = buildUSpace(ElementFamily::parse("afw"), mesh);
  FESpace s = buildSSpace(ElementFamily::parse("afw"), mesh);
  AssembledSystem sys = assembleSystem(g, u, s, ConstitutiveLaw{}, nullptr,
                                       nullptr, nullptr);
  CHECK(sys.load.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sys.dirichlet.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sys.mean_trace);
}
