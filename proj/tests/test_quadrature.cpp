#include <cmath>

#include "doctest.h"
#include "dualmix/quadrature.hpp"

using namespace dualmix;

namespace {

// \int_T x^i y^j over the reference triangle {x,y>=0, x+y<=1}.
double refMoment(int i, int j) {
  return std::tgamma(i + 1.0) * std::tgamma(j + 1.0) / std::tgamma(i + j + 3.0);
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly up to their degree") {
  for (int deg = 1; deg <= 14; ++deg) {
    const QuadratureRule& rule = triangleRule(deg);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(std::abs(wsum - 0.5) < 1e-14);
    for (int i = 0; i + 0 <= deg; ++i) {
      for (int j = 0; i + j <= deg; ++j) {
        double val = 0.0;
        for (size_t q = 0; q < rule.points.size(); ++q)
          val += rule.weights[q] * std::pow(rule.points[q].x, i) *
                 std::pow(rule.points[q].y, j);
        CHECK(std::abs(val - refMoment(i, j)) < 1e-13);
      }
    }
  }
}

TEST_CASE("edge rules integrate Legendre-degree monomials on [-1,1]") {
  for (int deg = 1; deg <= 12; ++deg) {
    const EdgeRule& rule = edgeRule(deg);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(std::abs(wsum - 2.0) < 1e-14);
    for (int p = 0; p <= deg; ++p) {
      double val = 0.0;
      for (size_t q = 0; q < rule.points.size(); ++q)
        val += rule.weights[q] * std::pow(rule.points[q], p);
      double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
      CHECK(std::abs(val - exact) < 1e-13);
    }
  }
}

TEST_CASE("doubling the degree leaves a smooth integral nearly unchanged") {
  auto f = [](double x, double y) { return std::sin(3 * x + 1) * std::cos(2 * y); };
  double a = 0.0, b = 0.0;
  const QuadratureRule& r1 = triangleRule(10);
  const QuadratureRule& r2 = triangleRule(20);
  for (size_t q = 0; q < r1.points.size(); ++q)
    a += r1.weights[q] * f(r1.points[q].x, r1.points[q].y);
  for (size_t q = 0; q < r2.points.size(); ++q)
    b += r2.weights[q] * f(r2.points[q].x, r2.points[q].y);
  CHECK(std::abs(a - b) < 1e-8);
}
