#pragma once

#include <array>
#include <functional>

#include "qf/family.hpp"

namespace qf {

// Natural system on the embedded sphere x^2 + y^2 + z^2 = 1: kinetic energy is
// a ratio of diagonal quadratic forms, the potential a function of the point.
//   K(x, v) = (1/2)(w1 v1^2 + w2 v2^2 + w3 v3^2)/(d1 x^2 + d2 y^2 + d3 z^2)
struct EmbeddedSystem {
  std::array<Real, 3> num_w{1, 1, 1};
  std::array<Real, 3> den_w{1, 1, 1};
  std::function<Real(Real, Real, Real)> potential;
  // scale pair carrying a conformal equivalence to a chart system:
  // metric matched as kappa * (this form), potential as kappa_tilde * (this V)
  Real kappa = 1, kappa_tilde = 1;

  Real denom(const std::array<Real, 3>& x) const {
    return den_w[0] * x[0] * x[0] + den_w[1] * x[1] * x[1] + den_w[2] * x[2] * x[2];
  }
  Real kinetic(const std::array<Real, 3>& x, const std::array<Real, 3>& v) const {
    return 0.5 * (num_w[0] * v[0] * v[0] + num_w[1] * v[1] * v[1] + num_w[2] * v[2] * v[2]) /
           denom(x);
  }
};

EmbeddedSystem kovalevskaya_reference();
EmbeddedSystem goryachev_reference(Real B1, Real B2);

// Deterministic probe values (kinetic at a fixed point/velocity pattern plus
// potentials); equal systems produce bitwise equal vectors.
std::vector<Real> embedded_samples(const EmbeddedSystem& sys, int n);

// Single-chart systems for the Kovalevskaya case. The (phi, u) chart covers a
// hemisphere minus the equator u = 0; the (phi, z) chart covers everything but
// the poles and is the one to integrate trajectories on.
ChartedSystem kov_chart_system();
ChartedSystem embedded_chart_system();

// psi(u) = sqrt(1 + u^2) - u, the chart radius: psi(psi + 2u) = 1, 0 < psi <= 1.
Real psi(Real u);
Real psi_prime(Real u);

std::array<Real, 3> chart_to_sphere(Real u, Real phi, int hemisphere);

// Max absolute entry difference between the pullback of dx^2 + dy^2 + 2 dz^2
// through chart_to_sphere and psi^2 (dphi^2 + du^2/(u sqrt(1 + u^2))), as 2x2
// quadratic forms in (dphi, du). Analytic derivatives throughout.
Real verify_metric_identity(Real u, Real phi);

struct KovMatchReport {
  Real max_metric_rel = 0;     // chart metric vs kappa * pullback of reference
  Real max_potential_rel = 0;  // chart potential vs kappa_tilde * reference
  Real kappa_fit = 0;          // least-squares scale, should recover kappa
  Real kappa_tilde_fit = 0;
};

// Pulls the reference system back through chart_to_sphere (orientation
// phi_sphere = -phi, upper hemisphere) and compares with kov_chart_system
// scaled by (kappa, kappa_tilde) = (2, -1/2).
KovMatchReport match_kovalevskaya(int n_u, int n_phi, Real u_lo, Real u_hi);

}  // namespace qf
