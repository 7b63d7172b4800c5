// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1} and the
// reference interval [-1,1].  Triangle rules are conical products of
// Gauss-Legendre and Gauss-Jacobi rules, so any exactness degree is
// available; weights are positive by construction.
#pragma once

#include <vector>

#include "dualmix/geometry.hpp"

namespace dualmix {

struct QuadratureRule {
  std::vector<Vec2> points;    // reference triangle coordinates
  std::vector<double> weights; // sum to 1/2 (reference area)
  int degree = 0;              // polynomial exactness
};

struct EdgeRule {
  std::vector<double> points;  // in [-1,1]
  std::vector<double> weights; // sum to 2
  int degree = 0;
};

// Exact for polynomials of total degree <= `degree`.
const QuadratureRule& triangleRule(int degree);
const EdgeRule& edgeRule(int degree);

// Gauss-Legendre nodes/weights on [-1,1] (Golub-Welsch).
void gaussLegendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace dualmix
