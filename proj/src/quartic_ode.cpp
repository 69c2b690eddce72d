#include "qf/quartic_ode.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace qf {

Real quartic_rhs(Real u, const FamilyParams& p) {
  Real u2 = u * u;
  return p.b + p.b1 * u + p.a * u2 + u2 * u2;
}

UJet jet_from_u(Real u, const FamilyParams& p) {
  Real A = quartic_rhs(u, p);
  if (!(A > 0)) throw_numerical("NON_POSITIVE_A", "A(u) <= 0 at u = " + fmt17(u));
  UJet j;
  j.u = u;
  Real q = std::sqrt(std::sqrt(A));
  j.u1 = p.branch >= 0 ? q : -q;
  Real u1sq = q * q;  // = sqrt(A), branch independent
  j.u2 = (p.b1 + 2 * p.a * u + 4 * u * u * u) / (4 * u1sq);
  j.u3 = (p.a / 2 + 3 * u * u - 2 * j.u2 * j.u2) / j.u1;
  j.u4 = (6 * u * j.u1 - 5 * j.u2 * j.u3) / j.u1;
  return j;
}

Real closure_residual(const UJet& j, Real a) {
  return 2 * j.u2 * j.u2 - 3 * j.u * j.u + j.u1 * j.u3 - a / 2;
}

// ---------------------------------------------------------------------------
// Dense series: piecewise quintic Hermite on (value, d1, d2) nodes.

Real DenseSeries::eval(Real xq) const {
  if (x.size() < 2) return jet.front()[0];
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i >= x.size() - 1) i = x.size() - 2;
  Real h = x[i + 1] - x[i];
  Real t = (xq - x[i]) / h;
  const auto& L = jet[i];
  const auto& R = jet[i + 1];
  Real t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  Real H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  Real H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  Real H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  Real K0 = 10 * t3 - 15 * t4 + 6 * t5;
  Real K1 = -4 * t3 + 7 * t4 - 3 * t5;
  Real K2 = 0.5 * t3 - t4 + 0.5 * t5;
  return L[0] * H0 + L[1] * h * H1 + L[2] * h * h * H2 + R[0] * K0 + R[1] * h * K1 +
         R[2] * h * h * K2;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4), scalar, adaptive; accepted nodes feed the dense series.

DenseSeries integrate_scalar_ode(const std::function<Real(Real, Real)>& f,
                                 const std::function<Real(Real, Real)>& d2, Real x0, Real x1,
                                 Real y0, Real tol, const char* what) {
  DenseSeries out;
  out.x.push_back(x0);
  out.jet.push_back({y0, f(x0, y0), d2(x0, y0)});
  if (x1 == x0) return out;
  Real dir = x1 > x0 ? 1.0 : -1.0;
  Real span = std::abs(x1 - x0);
  Real x = x0, y = y0;
  Real h = dir * std::min(span, std::max(1e-6, span / 100));
  Real k1 = f(x, y);
  int guard = 0;
  while (dir * (x1 - x) > 0) {
    if (++guard > 2000000 || std::abs(h) < 1e-15 * span)
      throw_numerical("INTEGRATION_FAILURE", std::string(what) + ": step size collapsed");
    if (dir * (x + h - x1) > 0) h = x1 - x;
    Real k2 = f(x + h / 5, y + h * (k1 / 5));
    Real k3 = f(x + 3 * h / 10, y + h * (3 * k1 / 40 + 9 * k2 / 40));
    Real k4 = f(x + 4 * h / 5, y + h * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9));
    Real k5 = f(x + 8 * h / 9, y + h * (19372 * k1 / 6561 - 25360 * k2 / 2187 +
                                        64448 * k3 / 6561 - 212 * k4 / 729));
    Real k6 = f(x + h, y + h * (9017 * k1 / 3168 - 355 * k2 / 33 + 46732 * k3 / 5247 +
                                49 * k4 / 176 - 5103 * k5 / 18656));
    Real y5 = y + h * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 - 2187 * k5 / 6784 +
                       11 * k6 / 84);
    Real k7 = f(x + h, y5);
    Real y4 = y + h * (5179 * k1 / 57600 + 7571 * k3 / 16695 + 393 * k4 / 640 -
                       92097 * k5 / 339200 + 187 * k6 / 2100 + k7 / 40);
    Real sc = tol + tol * std::max(std::abs(y), std::abs(y5));
    Real err = std::abs(y5 - y4) / sc;
    if (err <= 1.0) {
      x += h;
      y = y5;
      k1 = k7;
      out.x.push_back(x);
      out.jet.push_back({y, k7, d2(x, y)});
    }
    Real fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  if (dir < 0) {
    std::reverse(out.x.begin(), out.x.end());
    std::reverse(out.jet.begin(), out.jet.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15, adaptive bisection.

namespace {

const Real kGkNode[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                         0.741531185599394, 0.586087235467691, 0.405845151377397,
                         0.207784955007898, 0.0};
const Real kGkWeight[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                           0.140653259715525, 0.169004726639267, 0.190350578064785,
                           0.204432940075298, 0.209482141084728};
const Real kGWeight[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                          0.417959183673469};

void gk15(const std::function<Real(Real)>& f, Real lo, Real hi, Real& result, Real& err) {
  Real c = (lo + hi) / 2, hw = (hi - lo) / 2;
  Real fc = f(c);
  Real resk = kGkWeight[7] * fc;
  Real resg = kGWeight[3] * fc;
  for (int i = 0; i < 7; ++i) {
    Real fa = f(c - hw * kGkNode[i]);
    Real fb = f(c + hw * kGkNode[i]);
    resk += kGkWeight[i] * (fa + fb);
    if (i % 2 == 1) resg += kGWeight[i / 2] * (fa + fb);
  }
  result = resk * hw;
  err = std::abs((resk - resg) * hw);
}

Real gk_adaptive(const std::function<Real(Real)>& f, Real lo, Real hi, Real tol, int depth) {
  Real r, e;
  gk15(f, lo, hi, r, e);
  if (e <= tol || depth >= 40) return r;
  Real mid = (lo + hi) / 2;
  return gk_adaptive(f, lo, mid, tol / 2, depth + 1) +
         gk_adaptive(f, mid, hi, tol / 2, depth + 1);
}

}  // namespace

Real integrate_gk(const std::function<Real(Real)>& f, Real lo, Real hi, Real abs_tol) {
  if (lo == hi) return 0;
  return gk_adaptive(f, lo, hi, abs_tol, 0);
}

// ---------------------------------------------------------------------------
// solve_u

UJet USolution::jet(Real y) const { return jet_from_u(series.eval(y), params); }

USolution solve_u(const FamilyParams& p, Real u0, Real y_lo, Real y_hi, Real tol) {
  if (y_lo > 0 || y_hi < 0 || y_lo >= y_hi)
    throw_validation("BAD_PARAMS", "y range must contain 0 with y_lo < y_hi");
  if (!(quartic_rhs(u0, p) > 0))
    throw_numerical("SINGULAR_A", "A(u0) <= 0 at u0 = " + fmt17(u0));
  auto f = [&p](Real, Real u) {
    Real A = quartic_rhs(u, p);
    if (!(A > 0)) throw_numerical("SINGULAR_A", "A reached <= 0 at u = " + fmt17(u));
    Real q = std::sqrt(std::sqrt(A));
    return p.branch >= 0 ? q : -q;
  };
  auto d2 = [&p](Real, Real u) {
    Real A = quartic_rhs(u, p);
    return (p.b1 + 2 * p.a * u + 4 * u * u * u) / (4 * std::sqrt(A));
  };
  USolution sol;
  sol.params = p;
  sol.u0 = u0;
  sol.y_lo = y_lo;
  sol.y_hi = y_hi;
  DenseSeries fwd = integrate_scalar_ode(f, d2, 0, y_hi, u0, tol, "solve_u");
  if (y_lo < 0) {
    DenseSeries bwd = integrate_scalar_ode(f, d2, 0, y_lo, u0, tol, "solve_u");
    sol.series = bwd;
    sol.series.x.insert(sol.series.x.end(), fwd.x.begin() + 1, fwd.x.end());
    sol.series.jet.insert(sol.series.jet.end(), fwd.jet.begin() + 1, fwd.jet.end());
  } else {
    sol.series = fwd;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Pole functions.

namespace {

// g' = Theta_a(s, g); Q^4 = s^2 + a s g^2 + g^4 (each term weight 2 under the
// scaling g ~ s^{1/2} used in the pole representation).
template <typename T>
T theta(const T& s, const T& g, Real a) {
  using std::sqrt;
  T g2 = g * g;
  T Q = sqrt(sqrt(s * s + a * (s * g2) + g2 * g2));
  return -(s + a * g2) / (2.0 * ((Q + g) * (Q * Q + g2)));
}

Real theta_rr(Real s, Real g, Real a) { return theta(Jet2::cst(s), Jet2::cst(g), a).v; }

// One chain pass: higher derivatives of g along the solution from the ODE.
// Input g-jet (g, g', g'') yields output (g', g'', g''').
Jet2 theta_chain(Real s, const Jet2& gjet, Real a) { return theta(Jet2::var(s), gjet, a); }

std::array<Real, 5> fit_poly4(const Real* xs, const Real* ys, Real scale) {
  Eigen::Matrix<Real, 5, 5> V;
  Eigen::Matrix<Real, 5, 1> rhs;
  for (int i = 0; i < 5; ++i) {
    Real t = xs[i] / scale, pw = 1;
    for (int j = 0; j < 5; ++j) {
      V(i, j) = pw;
      pw *= t;
    }
    rhs(i) = ys[i];
  }
  Eigen::Matrix<Real, 5, 1> c = V.fullPivLu().solve(rhs);
  return {c(0), c(1), c(2), c(3), c(4)};
}

Jet2 eval_poly4(const std::array<Real, 5>& c, Real s, Real scale) {
  Real t = s / scale;
  Real v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
  Real d = (c[1] + t * (2 * c[2] + t * (3 * c[3] + t * 4 * c[4]))) / scale;
  Real dd = (2 * c[2] + t * (6 * c[3] + t * 12 * c[4])) / (scale * scale);
  return {v, d, dd};
}

}  // namespace

void PoleFunctions::g_derivs(Real s, Real& g, Real& g1, Real& g2, Real& g3) const {
  if (s < s_min) {
    Jet2 pj = eval_poly4(gpoly, s, fit_h);
    g = pj.v;
    g1 = pj.d;
    g2 = pj.dd;
    // third derivative from the cubic+quartic poly terms
    Real t = s / fit_h;
    g3 = (6 * gpoly[3] + 24 * gpoly[4] * t) / (fit_h * fit_h * fit_h);
    return;
  }
  g = gser.eval(s);
  g1 = theta_rr(s, g, a);
  Jet2 pass1 = theta_chain(s, {g, g1, 0}, a);
  g2 = pass1.d;
  Jet2 pass2 = theta_chain(s, {g, g1, g2}, a);
  g3 = pass2.dd;
}

Real PoleFunctions::g(Real s) const {
  Real gv, g1, g2, g3;
  g_derivs(s, gv, g1, g2, g3);
  return gv;
}

Jet2 PoleFunctions::g_jet(Real s) const {
  Real gv, g1, g2, g3;
  g_derivs(s, gv, g1, g2, g3);
  return {gv, g1, g2};
}

Jet2 PoleFunctions::nu_jet(Real s) const {
  Real gv, g1, g2, g3;
  g_derivs(s, gv, g1, g2, g3);
  // nu = g - 2 s g'
  return {gv - 2 * s * g1, -g1 - 2 * s * g2, -3 * g2 - 2 * s * g3};
}

Jet2 PoleFunctions::mu_jet(Real s) const {
  if (s < s_mu) return eval_poly4(mupoly, s, fit_h);
  Real gv, g1, g2, g3;
  g_derivs(s, gv, g1, g2, g3);
  Jet2 sj = Jet2::var(s);
  Jet2 gj{gv, g1, g2};
  Jet2 gpj{g1, g2, g3};
  // mu = (g / 2s) * (a + 8 g' (g - s g')); 0/0 at s = 0 handled by the poly.
  Jet2 m = (gj / (2.0 * sj)) * (a + 8.0 * (gpj * (gj - sj * gpj)));
  return m;
}

Jet2 PoleFunctions::xi_jet(Real s) const {
  Jet2 m = mu_jet(s), n = nu_jet(s);
  Real v = xiser.eval(s);
  Real d = -m.v / n.v;
  Real dd = -(m.d * n.v - m.v * n.d) / (n.v * n.v);
  return {v, d, dd};
}

Jet2 PoleFunctions::nu_any(Real S) const {
  if (S <= 1) return nu_jet(S);
  Jet2 Sj = Jet2::var(S);
  Jet2 inv = 1.0 / Sj;
  Jet2 inner = compose(nu_jet(inv.v), inv);
  return Sj * inner;
}

Jet2 PoleFunctions::mu_any(Real S) const {
  if (S <= 1) return mu_jet(S);
  Jet2 Sj = Jet2::var(S);
  Jet2 inv = 1.0 / Sj;
  Jet2 inner = compose(mu_jet(inv.v), inv);
  return -inner / Sj;
}

Jet2 PoleFunctions::xi_any(Real S) const {
  if (S <= 1) return xi_jet(S);
  Jet2 Sj = Jet2::var(S);
  Jet2 inv = 1.0 / Sj;
  return compose(xi_jet(inv.v), inv);
}

PoleFunctions compute_pole_functions(Real a, int n_grid, Real tol) {
  if (!(a > -2)) throw_validation("BAD_PARAMS", "pole functions need a > -2");
  if (n_grid < 16) throw_validation("BAD_PARAMS", "n_grid too small");
  PoleFunctions pf;
  pf.a = a;
  auto f = [a](Real s, Real g) { return theta_rr(s, g, a); };
  auto d2 = [a](Real s, Real g) {
    Real g1 = theta_rr(s, g, a);
    return theta_chain(s, {g, g1, 0}, a).d;
  };
  pf.gser = integrate_scalar_ode(f, d2, 1.0, pf.s_min, 0.0, tol, "pole_g");

  // Uniform report grid; the five nodes nearest s_min anchor the smooth
  // extensions to s = 0 (degree-4 polynomial, Richardson-style).
  Real h = 1.0 / (n_grid - 1);
  pf.fit_h = 5 * h;
  {
    Real xs[5], ys[5];
    for (int j = 0; j < 5; ++j) {
      xs[j] = (j + 1) * h;
      ys[j] = pf.gser.eval(xs[j]);
    }
    pf.gpoly = fit_poly4(xs, ys, pf.fit_h);
  }
  {
    Real xs[5], ys[5];
    int k0 = static_cast<int>(std::ceil(pf.s_mu / h));
    if (k0 < 1) k0 = 1;
    for (int j = 0; j < 5; ++j) {
      Real s = (k0 + j) * h;
      Real gv, g1, g2, g3;
      pf.g_derivs(s, gv, g1, g2, g3);
      xs[j] = s;
      ys[j] = (gv / (2 * s)) * (a + 8 * g1 * (gv - s * g1));
    }
    pf.mupoly = fit_poly4(xs, ys, pf.fit_h);
  }

  pf.grid_s.resize(n_grid);
  pf.grid_g.resize(n_grid);
  pf.grid_nu.resize(n_grid);
  pf.grid_mu.resize(n_grid);
  pf.grid_xi.resize(n_grid);
  for (int k = 0; k < n_grid; ++k) {
    Real s = k * h;
    pf.grid_s[k] = s;
    pf.grid_g[k] = pf.g(s);
    pf.grid_nu[k] = pf.nu_jet(s).v;
    pf.grid_mu[k] = pf.mu_jet(s).v;
  }
  // xi by cumulative quadrature from s = 1 downward.
  auto integrand = [&pf](Real s) { return pf.mu_jet(s).v / pf.nu_jet(s).v; };
  pf.grid_xi[n_grid - 1] = 0;
  for (int k = n_grid - 2; k >= 0; --k) {
    Real seg = integrate_gk(integrand, pf.grid_s[k], pf.grid_s[k + 1],
                            std::max(1e-15, 1e-12 * h));
    pf.grid_xi[k] = pf.grid_xi[k + 1] + seg;
  }
  pf.xiser.x = pf.grid_s;
  pf.xiser.jet.resize(n_grid);
  for (int k = 0; k < n_grid; ++k) {
    Jet2 m = pf.mu_jet(pf.grid_s[k]), n = pf.nu_jet(pf.grid_s[k]);
    Real d = -m.v / n.v;
    Real dd = -(m.d * n.v - m.v * n.d) / (n.v * n.v);
    pf.xiser.jet[k] = {pf.grid_xi[k], d, dd};
  }
  return pf;
}

}  // namespace qf
