#pragma once

#include <array>
#include <vector>

#include "qf/common.hpp"
#include "qf/jets.hpp"

namespace qf {

// Parameters of u'^4 = b + b1*u + a*u^2 + u^4.
struct FamilyParams {
  Real a = 0;
  Real b = 1;
  Real b1 = 0;
  int branch = +1;  // sign of u'
};

// Value and first four y-derivatives of u, closed under the ODE relations:
//   u1^4 = A(u),  2*u2^2 - 3*u^2 + u1*u3 = a/2.
struct UJet {
  Real u = 0, u1 = 0, u2 = 0, u3 = 0, u4 = 0;
};

Real quartic_rhs(Real u, const FamilyParams& p);
UJet jet_from_u(Real u, const FamilyParams& p);
Real closure_residual(const UJet& jet, Real a);

// Piecewise quintic Hermite storage over accepted integrator steps.
struct DenseSeries {
  std::vector<Real> x;
  std::vector<std::array<Real, 3>> jet;  // value, d/dx, d2/dx2 at nodes
  Real eval(Real xq) const;
  Real xmin() const { return x.front(); }
  Real xmax() const { return x.back(); }
};

struct USolution {
  FamilyParams params;
  Real u0 = 0;
  Real y_lo = 0, y_hi = 0;
  DenseSeries series;  // u over [y_lo, y_hi]

  Real u(Real y) const { return series.eval(y); }
  UJet jet(Real y) const;
};

USolution solve_u(const FamilyParams& p, Real u0, Real y_lo, Real y_hi, Real tol);

// Pole-smoothness functions behind the exponential representations at b=1, b1=0:
//   u'(y) = e^y nu(e^{-2y}) = e^{-y} nu(e^{2y})
//   u'^2 (u'' - u) = e^{-y} mu(e^{-2y}) = -e^y mu(e^{2y})
//   g(s) = sqrt(s) * u(-log(s)/2),  nu = g - 2 s g',  xi(t) = int_t^1 mu/nu ds.
// g solves g' = Theta(s, g) with
//   Theta = -(s + a g^2) / (2 (Q + g)(Q^2 + g^2)),  Q = (s^2 + a s g^2 + g^4)^{1/4}.
struct PoleFunctions {
  Real a = 0;
  Real s_min = 1e-8;   // ODE integrated down to here; smooth extension below
  Real s_mu = 1e-4;    // mu's 0/0 cancellation guard; extension below
  DenseSeries gser;    // g over [s_min, 1], backward integration nodes
  std::array<Real, 5> gpoly{};   // degree-4 extension of g near 0, in t = s/fit_h
  std::array<Real, 5> mupoly{};  // degree-4 extension of mu near 0
  Real fit_h = 0;                // scale of the extension fit abscissae
  std::vector<Real> grid_s, grid_g, grid_nu, grid_mu, grid_xi;  // uniform report grid
  DenseSeries xiser;   // xi over [0, 1] on the uniform grid (Hermite from xi' = -mu/nu)

  void g_derivs(Real s, Real& g, Real& g1, Real& g2, Real& g3) const;
  Real g(Real s) const;
  Jet2 g_jet(Real s) const;    // (g, g', g'')
  Jet2 nu_jet(Real s) const;   // s in [0, 1]
  Jet2 mu_jet(Real s) const;
  Jet2 xi_jet(Real s) const;
  Real nu(Real s) const { return nu_jet(s).v; }
  Real mu(Real s) const { return mu_jet(s).v; }
  Real xi(Real s) const { return xi_jet(s).v; }

  // Whole-sphere evaluation: reflection identities continue past s = 1.
  //   nu(S) = S nu(1/S),  mu(S) = -mu(1/S)/S,  xi(S) = xi(1/S).
  Jet2 nu_any(Real S) const;
  Jet2 mu_any(Real S) const;
  Jet2 xi_any(Real S) const;
};

PoleFunctions compute_pole_functions(Real a, int n_grid, Real tol);

// Adaptive Dormand-Prince 5(4) for a scalar ODE y' = f(x, y); steps are
// accepted into a DenseSeries carrying (y, y', y'') nodes. d2 supplies y''.
DenseSeries integrate_scalar_ode(const std::function<Real(Real, Real)>& f,
                                 const std::function<Real(Real, Real)>& d2, Real x0, Real x1,
                                 Real y0, Real tol, const char* what);

// Adaptive Gauss-Kronrod 7/15 on [lo, hi] to absolute tolerance.
Real integrate_gk(const std::function<Real(Real)>& f, Real lo, Real hi, Real abs_tol);

}  // namespace qf
