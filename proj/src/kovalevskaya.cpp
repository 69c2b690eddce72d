#include "qf/kovalevskaya.hpp"

#include <cmath>

namespace qf {

EmbeddedSystem goryachev_reference(Real B1, Real B2) {
  EmbeddedSystem sys;
  sys.num_w = {1, 1, 2};
  sys.den_w = {2, 2, 1};
  sys.potential = [B1, B2](Real x, Real y, Real z) {
    (void)z;
    return -2 * B1 * x * y - B2 * (x * x - y * y) - x;
  };
  sys.kappa = 2;
  sys.kappa_tilde = -0.5;
  return sys;
}

EmbeddedSystem kovalevskaya_reference() { return goryachev_reference(0, 0); }

std::vector<Real> embedded_samples(const EmbeddedSystem& sys, int n) {
  std::vector<Real> out;
  out.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    // low-discrepancy-ish deterministic angles; avoids symmetry planes
    Real th = 2.39996322972865332 * (i + 1);
    Real ph = 0.5 + 0.6180339887498949 * i;
    std::array<Real, 3> x{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                          std::cos(th)};
    std::array<Real, 3> v{std::cos(th) * std::cos(ph), std::cos(3 * th), std::sin(2 * ph)};
    out.push_back(sys.kinetic(x, v));
    out.push_back(sys.potential(x[0], x[1], x[2]));
  }
  return out;
}

ChartedSystem kov_chart_system() {
  ChartedSystem sys;
  sys.params.kind = "kovalevskaya";
  sys.params.a = 1;
  sys.params.b = 0;
  sys.params.p = 0;
  sys.charts.push_back(
      Chart{"K", ChartKind::Kov2U, +1, 0.0, std::numeric_limits<Real>::infinity(), 0.4, 2.5});
  return sys;
}

ChartedSystem embedded_chart_system() {
  ChartedSystem sys;
  sys.params.kind = "kovalevskaya-embedded";
  sys.params.a = 1;
  sys.params.b = 0;
  sys.params.p = 0;
  sys.charts.push_back(Chart{"E", ChartKind::EmbeddedZ, +1, -1.0, 1.0, -0.8, 0.8});
  return sys;
}

Real psi(Real u) {
  // cancellation-free on both sides of 0
  return u >= 0 ? 1.0 / (std::sqrt(1 + u * u) + u) : std::sqrt(1 + u * u) - u;
}

Real psi_prime(Real u) { return -psi(u) / std::sqrt(1 + u * u); }

std::array<Real, 3> chart_to_sphere(Real u, Real phi, int hemisphere) {
  Real P = psi(u);
  Real z2 = 2 * u * P;  // equals 1 - psi^2 without cancellation
  Real z = (hemisphere >= 0 ? 1 : -1) * std::sqrt(z2 > 0 ? z2 : 0);
  return {P * std::cos(phi), P * std::sin(phi), z};
}

namespace {

// Pullback of (w1 dx^2 + w2 dy^2 + w3 dz^2) through the upper-hemisphere map
// (phi, u) -> (psi cos(s*phi), psi sin(s*phi), sqrt(1 - psi^2)) with s = +-1.
// Returns {Q_phiphi, Q_uu, Q_phiu}.
std::array<Real, 3> pullback_form(Real u, Real phi, Real s, const std::array<Real, 3>& w) {
  Real P = psi(u), dP = psi_prime(u);
  Real sp = std::sin(s * phi), cp = std::cos(s * phi);
  Real z = std::sqrt(2 * u * P);
  // d(x,y,z)/dphi and d(x,y,z)/du
  std::array<Real, 3> tp{-P * sp * s, P * cp * s, 0};
  std::array<Real, 3> tu{dP * cp, dP * sp, -P * dP / z};
  auto dot = [&w](const std::array<Real, 3>& a, const std::array<Real, 3>& b) {
    return w[0] * a[0] * b[0] + w[1] * a[1] * b[1] + w[2] * a[2] * b[2];
  };
  return {dot(tp, tp), dot(tu, tu), dot(tp, tu)};
}

}  // namespace

Real verify_metric_identity(Real u, Real phi) {
  if (!(u > 0)) throw_numerical("DEGENERATE_COORDINATE", "metric identity needs u > 0");
  std::array<Real, 3> Q = pullback_form(u, phi, +1, {1, 1, 2});
  Real P = psi(u);
  Real e1 = P * P;
  Real e2 = P * P / (u * std::sqrt(1 + u * u));
  return std::max({std::abs(Q[0] - e1), std::abs(Q[1] - e2), std::abs(Q[2])});
}

KovMatchReport match_kovalevskaya(int n_u, int n_phi, Real u_lo, Real u_hi) {
  if (n_u < 2 || n_phi < 1 || !(u_lo > 0) || !(u_hi > u_lo))
    throw_validation("BAD_PARAMS", "match grid needs n_u >= 2, n_phi >= 1, 0 < u_lo < u_hi");
  ChartedSystem kov = kov_chart_system();
  EmbeddedSystem ref = kovalevskaya_reference();
  KovMatchReport rep;
  Real num_k = 0, den_k = 0, num_t = 0, den_t = 0;
  for (int i = 0; i < n_u; ++i) {
    Real u = u_lo + (u_hi - u_lo) * i / (n_u - 1);
    ChartEval ce = eval_chart(kov, 0, u);
    for (int j = 0; j < n_phi; ++j) {
      Real phi = 2 * M_PI * j / n_phi;
      std::array<Real, 3> x = chart_to_sphere(u, -phi, +1);
      std::array<Real, 3> Q = pullback_form(u, phi, -1, ref.num_w);
      Real den = ref.denom(x);
      Real mphi = Q[0] / den, mu = Q[1] / den;
      Real vref = ref.potential(x[0], x[1], x[2]);
      Real vchart = ce.C.v * std::cos(phi);

      rep.max_metric_rel = std::max(
          {rep.max_metric_rel, std::abs(ce.E1.v - ref.kappa * mphi) / std::abs(ce.E1.v),
           std::abs(ce.E2.v - ref.kappa * mu) / std::abs(ce.E2.v),
           std::abs(Q[2] / den) / std::abs(ce.E1.v)});
      Real scale = std::max(std::abs(vchart), 0.5 * psi(u));
      rep.max_potential_rel = std::max(rep.max_potential_rel,
                                       std::abs(vchart - ref.kappa_tilde * vref) / scale);

      num_k += mphi * ce.E1.v + mu * ce.E2.v;
      den_k += mphi * mphi + mu * mu;
      num_t += vref * vchart;
      den_t += vref * vref;
    }
  }
  rep.kappa_fit = num_k / den_k;
  rep.kappa_tilde_fit = num_t / den_t;
  return rep;
}

}  // namespace qf
