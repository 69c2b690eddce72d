#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qf/jets.hpp"

#include <cmath>

using qf::Jet2;
using qf::Real;

namespace {

// Order-2 jet of a closed-form function at x, for comparison.
Jet2 jet_of(Real v, Real d, Real dd) { return {v, d, dd}; }

bool close(const Jet2& a, const Jet2& b, Real tol) {
  return std::abs(a.v - b.v) <= tol && std::abs(a.d - b.d) <= tol &&
         std::abs(a.dd - b.dd) <= tol;
}

}  // namespace

TEST_CASE("arithmetic matches hand-computed derivatives") {
  Real x = 1.3;
  Jet2 X = Jet2::var(x);

  // f = x^2: (1.69, 2.6, 2)
  CHECK(close(X * X, jet_of(x * x, 2 * x, 2), 1e-15));

  // f = (x + 2)(3x - 1): product rule cross terms
  Jet2 f = (X + 2.0) * (3.0 * X - 1.0);
  CHECK(close(f, jet_of((x + 2) * (3 * x - 1), 6 * x + 5, 6), 1e-14));

  // f = 1/x: (1/x, -1/x^2, 2/x^3)
  Jet2 inv = 1.0 / X;
  CHECK(close(inv, jet_of(1 / x, -1 / (x * x), 2 / (x * x * x)), 1e-15));

  // f = sqrt(x): (sqrt x, 1/(2 sqrt x), -1/(4 x^{3/2}))
  Jet2 r = qf::sqrt(X);
  Real s = std::sqrt(x);
  CHECK(close(r, jet_of(s, 0.5 / s, -0.25 / (s * x)), 1e-15));

  // quotient with non-constant denominator: f = x / (x^2 + 1)
  Jet2 q = X / (X * X + 1.0);
  Real den = x * x + 1;
  CHECK(close(q,
              jet_of(x / den, (1 - x * x) / (den * den),
                     (2 * x * x * x - 6 * x) / (den * den * den)),
              1e-14));
}

TEST_CASE("constants carry zero derivatives") {
  Jet2 c = Jet2::cst(4.0);
  CHECK(c.v == 4.0);
  CHECK(c.d == 0.0);
  CHECK(c.dd == 0.0);
  Jet2 p = c * Jet2::var(2.0) - 3.0;
  CHECK(close(p, jet_of(5.0, 4.0, 0.0), 1e-15));
}

TEST_CASE("composition against finite differences") {
  auto F = [](const Jet2& x) { return qf::sqrt(x * x * x + 2.0 * x + 5.0) / (x + 1.0); };
  auto f = [](Real x) { return std::sqrt(x * x * x + 2 * x + 5) / (x + 1); };
  Real x = 0.7, h = 1e-5;
  Jet2 J = F(Jet2::var(x));
  Real d_fd = (f(x + h) - f(x - h)) / (2 * h);
  Real dd_fd = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
  CHECK(J.v == doctest::Approx(f(x)).epsilon(1e-14));
  CHECK(J.d == doctest::Approx(d_fd).epsilon(1e-8));
  CHECK(J.dd == doctest::Approx(dd_fd).epsilon(1e-5));
}
