// Extreme eigenvalues of self-adjoint operators given only through their
// action, via Lanczos with full reorthogonalization in a caller-supplied
// inner product (the operator must be self-adjoint with respect to it).
#pragma once

#include <Eigen/Core>
#include <functional>

namespace dualmix {

using VecOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using InnerProduct =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct EigExtremes {
  double min = 0.0;
  double max = 0.0;
  int steps = 0;
};

// Runs min(dim of start, max_steps) Lanczos steps; exact (up to roundoff)
// when the Krylov space exhausts the operator's invariant subspace.
// When the operator acts on a proper subspace, `project` must map vectors
// back onto it; without it rounding leaks out of the subspace and the basis
// picks up spurious directions once the subspace is exhausted.
EigExtremes lanczosExtremes(const VecOp& op, const InnerProduct& inner,
                            const Eigen::VectorXd& start, int max_steps,
                            const VecOp& project = nullptr);

}  // namespace dualmix
