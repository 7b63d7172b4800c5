#include "dualmix/eig.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dualmix {

EigExtremes lanczosExtremes(const VecOp& op, const InnerProduct& inner,
                            const Eigen::VectorXd& start, int max_steps,
                            const VecOp& project) {
  const int dim = static_cast<int>(start.size());
  const int steps = std::min(dim, max_steps);
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;

  Eigen::VectorXd first = project ? project(start) : start;
  double nrm = std::sqrt(inner(first, first));
  if (!(nrm > 0.0)) throw std::invalid_argument("lanczos: zero start vector");
  basis.push_back(first / nrm);

  auto extremes = [&](int k) {
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        tri, Eigen::EigenvaluesOnly);
    return std::pair<double, double>(es.eigenvalues().minCoeff(),
                                     es.eigenvalues().maxCoeff());
  };

  double scale = 0.0;
  double prev_min = 0.0, prev_max = 0.0;
  int stable_checks = 0;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd w = op(basis[j]);
    double a = inner(basis[j], w);
    alpha.push_back(a);
    scale = std::max(scale, std::abs(a));
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    // Full reorthogonalization keeps the basis clean enough for the extreme
    // eigenvalues to be trusted to solver accuracy.
    for (const auto& q : basis) w -= inner(q, w) * q;
    for (const auto& q : basis) w -= inner(q, w) * q;
    if (project) w = project(w);
    double b = std::sqrt(std::max(inner(w, w), 0.0));
    // Relative breakdown test: once the Krylov space exhausts the invariant
    // subspace the residual is pure rounding noise; admitting it would inject
    // spurious Ritz values from outside the subspace.
    if (j + 1 == steps || b < 1e-10 * std::max(scale, 1e-30)) break;
    beta.push_back(b);
    scale = std::max(scale, b);
    basis.push_back(w / b);
    // Extreme Ritz values converge long before the basis fills up; once they
    // stagnate over two consecutive probes the remaining steps only cost
    // memory.  The probe itself is cheap (tridiagonal eigensolve).
    if (j >= 20 && (j + 1) % 10 == 0) {
      auto [lo, hi] = extremes(static_cast<int>(alpha.size()));
      double tol = 1e-12 * std::max(scale, 1e-30);
      if (std::abs(lo - prev_min) <= tol && std::abs(hi - prev_max) <= tol) {
        if (++stable_checks >= 2) break;
      } else {
        stable_checks = 0;
      }
      prev_min = lo;
      prev_max = hi;
    }
  }

  const int k = static_cast<int>(alpha.size());
  auto [lo, hi] = extremes(k);
  EigExtremes out;
  out.min = lo;
  out.max = hi;
  out.steps = k;
  return out;
}

}  // namespace dualmix
