#include "dualmix/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dualmix {

namespace {

// Golub-Welsch from the three-term recurrence coefficients of the orthogonal
// polynomials: x p_k = a_k p_{k+1} + b_k p_k + c_k p_{k-1}.
void golubWelsch(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                 double mu0, std::vector<double>& x, std::vector<double>& w) {
  int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = alpha[i];
    if (i + 1 < n) {
      double s = std::sqrt(beta[i + 1]);
      J(i, i + 1) = s;
      J(i + 1, i) = s;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    double v = es.eigenvectors()(0, i);
    w[i] = mu0 * v * v;
  }
}

// Jacobi(a,b) recurrence on [-1,1] with weight (1-x)^a (1+x)^b.
void gaussJacobi(int n, double a, double b, std::vector<double>& x,
                 std::vector<double>& w) {
  Eigen::VectorXd alpha(n), beta(n);
  double ab = a + b;
  alpha[0] = (b - a) / (ab + 2.0);
  beta[0] = 0.0;
  for (int k = 1; k < n; ++k) {
    double k2ab = 2.0 * k + ab;
    alpha[k] = (b * b - a * a) / (k2ab * (k2ab + 2.0));
    beta[k] = 4.0 * k * (k + a) * (k + b) * (k + ab) /
              ((k2ab - 1.0) * k2ab * k2ab * (k2ab + 1.0));
  }
  // mu0 = int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
  double mu0 = std::pow(2.0, ab + 1.0) * std::exp(std::lgamma(a + 1.0) +
                                                  std::lgamma(b + 1.0) -
                                                  std::lgamma(ab + 2.0));
  golubWelsch(alpha, beta, mu0, x, w);
}

}  // namespace

void gaussLegendre(int n, std::vector<double>& x, std::vector<double>& w) {
  gaussJacobi(n, 0.0, 0.0, x, w);
}

const QuadratureRule& triangleRule(int degree) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  int n = degree / 2 + 1;  // conical rule with n points per direction
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Duffy map of [0,1]^2 onto the triangle: exact for degree 2n-1 when the
  // collapsed direction uses a Jacobi(1,0) rule.
  std::vector<double> xg, wg, xj, wj;
  gaussLegendre(n, xg, wg);
  gaussJacobi(n, 1.0, 0.0, xj, wj);
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    double s = 0.5 * (xj[i] + 1.0);   // in [0,1], weight has (1-s) Jacobian
    double ws = wj[i] / 4.0;          // maps the Jacobi weight to (1-s) on [0,1]
    for (int j = 0; j < n; ++j) {
      double t = 0.5 * (xg[j] + 1.0);
      double wt = wg[j] / 2.0;
      rule.points.push_back({s, (1.0 - s) * t});
      rule.weights.push_back(ws * wt);
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

const EdgeRule& edgeRule(int degree) {
  static std::map<int, EdgeRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  int n = degree / 2 + 1;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  EdgeRule rule;
  rule.degree = 2 * n - 1;
  gaussLegendre(n, rule.points, rule.weights);
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace dualmix
