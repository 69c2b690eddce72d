#include "qf/family.hpp"

#include <cmath>

namespace qf {

int ChartedSystem::chart_index(const std::string& name) const {
  for (std::size_t i = 0; i < charts.size(); ++i)
    if (charts[i].name == name) return static_cast<int>(i);
  throw_validation("BAD_PARAMS", "no chart named '" + name + "'");
}

namespace {

// A(u) and its square root as jets in u (b1 = 0 throughout the families).
struct BaseJets {
  Jet2 A, sA, C;
};

BaseJets base_jets(Real u, Real a, Real b) {
  Jet2 U = Jet2::var(u);
  Jet2 A = b + sq(U) * (a + sq(U));
  if (!(A.v > 0)) throw_numerical("OUT_OF_CHART", "metric degenerate: A(u) <= 0 at u = " + fmt17(u));
  Jet2 sA = sqrt(A);
  // potential amplitude u sqrt(A) - A'(u)/4 = -(u/2)((a + 2u^2) - 2 sqrt(A))
  Jet2 C = U * sA - ((a / 2) * U + U * sq(U));
  return {A, sA, C};
}

ChartEval eval_base_u(Real u, Real a, Real b) {
  BaseJets bj = base_jets(u, a, b);
  return {1.0 / bj.sA, 1.0 / bj.A, bj.C};
}

ChartEval eval_shifted_u(Real u, Real a, Real b, Real p, int sign) {
  BaseJets bj = base_jets(u, a, b);
  Jet2 U = Jet2::var(u);
  Jet2 lam = (bj.sA - sq(U) + p) * static_cast<Real>(sign);
  if (!(lam.v > 0))
    throw_numerical("OUT_OF_CHART", "conformal factor nonpositive at u = " + fmt17(u));
  return {lam / bj.sA, lam / bj.A, bj.C / lam};
}

ChartEval eval_general_y(const ChartedSystem& sys, Real y) {
  const USolution& us = *sys.usol;
  if (y < us.y_lo || y > us.y_hi)
    throw_numerical("OUT_OF_CHART", "y outside the solved range: " + fmt17(y));
  UJet j = us.jet(y);
  Jet2 U{j.u, j.u1, j.u2}, U1{j.u1, j.u2, j.u3}, U2{j.u2, j.u3, j.u4};
  Jet2 w = sq(U1);  // u'^2
  Jet2 Cfull = -(U2 - U) * w;
  if (sys.params.d == 0) {
    Jet2 E = 1.0 / w;
    return {E, E, Cfull};
  }
  Jet2 F = w - sq(U) + sys.params.p;
  if (!(F.v > 0))
    throw_numerical("OUT_OF_CHART", "conformal factor nonpositive at y = " + fmt17(y));
  return {F / w, F / w, Cfull / F};
}

ChartEval eval_polar(const ChartedSystem& sys, Real r, int sigma, bool shifted) {
  if (!(r > 0)) throw_numerical("OUT_OF_CHART", "polar radius must be positive");
  const PoleFunctions& pf = *sys.poles;
  Jet2 R = Jet2::var(r);
  Jet2 s{r * r, 2 * r, 2};
  Jet2 nu = compose(pf.nu_any(s.v), s);
  Jet2 inv2 = 1.0 / sq(nu);
  Jet2 mu = compose(pf.mu_any(s.v), s);
  Jet2 C = (mu * R) * static_cast<Real>(sigma);
  Jet2 E1 = sq(R) * inv2, E2 = inv2;
  if (!shifted) return {E1, E2, C};
  Jet2 Xi = (compose(pf.xi_any(s.v), s) + (sys.params.p + 1)) *
            static_cast<Real>(sys.params.sign);
  if (!(Xi.v > 0))
    throw_numerical("OUT_OF_CHART", "conformal factor nonpositive at r = " + fmt17(r));
  return {Xi * E1, Xi * E2, C / Xi};
}

ChartEval eval_kov2(Real u) {
  if (!(u > 0))
    throw_numerical("DEGENERATE_COORDINATE", "chart requires u > 0, got " + fmt17(u));
  Jet2 U = Jet2::var(u);
  Jet2 S1 = sqrt(1.0 + sq(U));
  Jet2 Psi = S1 - U;
  return {Psi / S1, Psi / (U * (1.0 + sq(U))), 0.5 * Psi};
}

ChartEval eval_embedded(Real z) {
  if (!(std::abs(z) < 1))
    throw_numerical("OUT_OF_CHART", "chart requires |z| < 1, got " + fmt17(z));
  Jet2 Z = Jet2::var(z);
  Jet2 one_z2 = 1.0 - sq(Z);
  return {one_z2 / (2.0 - sq(Z)), 1.0 / one_z2, -sqrt(one_z2)};
}

ChartEval mirror_pullback(ChartEval ce) {
  // (q1, q2) -> (-q1, -q2): jets in q2 flip odd orders; cos(q1) is even so the
  // amplitude transforms like the metric coefficients.
  ce.E1.d = -ce.E1.d;
  ce.E2.d = -ce.E2.d;
  ce.C.d = -ce.C.d;
  return ce;
}

}  // namespace

ChartEval eval_chart(const ChartedSystem& sys, int chart, Real q2) {
  const Chart& ch = sys.charts.at(chart);
  const SystemParams& P = sys.params;
  switch (ch.kind) {
    case ChartKind::BaseU: {
      ChartEval ce = eval_base_u(ch.mirror < 0 ? -q2 : q2, P.a, P.b);
      return ch.mirror < 0 ? mirror_pullback(ce) : ce;
    }
    case ChartKind::ShiftedU: {
      ChartEval ce = eval_shifted_u(ch.mirror < 0 ? -q2 : q2, P.a, P.b, P.p, P.sign);
      return ch.mirror < 0 ? mirror_pullback(ce) : ce;
    }
    case ChartKind::PolarBase:
      return eval_polar(sys, q2, ch.mirror, false);
    case ChartKind::PolarShifted:
      return eval_polar(sys, q2, ch.mirror, true);
    case ChartKind::GeneralY:
      return eval_general_y(sys, q2);
    case ChartKind::Kov2U:
      return eval_kov2(q2);
    case ChartKind::EmbeddedZ:
      return eval_embedded(q2);
  }
  throw_validation("BAD_PARAMS", "unknown chart kind");
}

Real curvature_of(const ChartEval& ce) {
  Real e = ce.E1.v, e1 = ce.E1.d, e2 = ce.E1.dd;
  Real g = ce.E2.v, g1 = ce.E2.d;
  Real P = std::sqrt(e * g);
  Real Pd = (e1 * g + e * g1) / (2 * P);
  Real Fd = e2 / P - e1 * Pd / (P * P);
  return -Fd / (2 * P);
}

Real gaussian_curvature(const ChartedSystem& sys, int chart, Real q2) {
  return curvature_of(eval_chart(sys, chart, q2));
}

PRange admissible_p(Real a) {
  if (!(a > -2)) throw_validation("BAD_PARAMS", "admissible shifts need a > -2");
  if (a == 2) throw_validation("BAD_PARAMS", "a = 2 excluded: no admissible-shift statement");
  Real inf = std::numeric_limits<Real>::infinity();
  PRange r;
  r.a = a;
  if (a > 2)
    r.components = {{-inf, -a / 2, -1}, {-1, inf, +1}};
  else
    r.components = {{-inf, -1, -1}, {-a / 2, inf, +1}};
  return r;
}

int p_sign(const PRange& r, Real p) {
  for (const auto& c : r.components)
    if (p > c.lo && p < c.hi) return c.sign;
  return 0;
}

std::string p_range_text(const PRange& r) {
  auto num = [](Real x) {
    if (x == -std::numeric_limits<Real>::infinity()) return std::string("-inf");
    if (x == std::numeric_limits<Real>::infinity()) return std::string("+inf");
    return fmt17(x);
  };
  std::string s;
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    if (i) s += " U ";
    s += "(" + num(r.components[i].lo) + ", " + num(r.components[i].hi) + ")";
  }
  return s;
}

Real f_shift(Real z, Real a) {
  Real q = 1 + a * z + z * z;
  if (q < 0) throw_validation("BAD_PARAMS", "1 + a z + z^2 < 0 at z = " + fmt17(z));
  if (z > 1e3) return -(1 + a * z) / (z + std::sqrt(q));
  return z - std::sqrt(q);
}

Real f_shift_at_infinity(Real a) {
  // two-point extrapolation kills the O(1/z) tail
  Real z = 1e6;
  return 2 * f_shift(2 * z, a) - f_shift(z, a);
}

namespace {

ChartedSystem u_chart_system(std::string kind, ChartKind ck, Real a, Real b) {
  ChartedSystem sys;
  sys.params.kind = std::move(kind);
  sys.params.a = a;
  sys.params.b = b;
  Real inf = std::numeric_limits<Real>::infinity();
  sys.charts = {{"N", ck, +1, -inf, inf, -2, 2}, {"S", ck, -1, -inf, inf, -2, 2}};
  return sys;
}

void attach_switch_threshold(ChartedSystem& sys, Real tol) {
  FamilyParams fp{sys.params.a, sys.params.b, 0.0, +1};
  auto us = std::make_shared<USolution>(solve_u(fp, 0.0, -1.0, 1.0, tol));
  sys.u_switch = us->u(std::log(2.0));
  sys.usol = std::move(us);
}

}  // namespace

ChartedSystem build_base(Real a, Real b, bool require_global) {
  bool global = (b == 1 && a > -2);
  if (require_global && !global)
    throw_validation("BAD_PARAMS", "whole-sphere construction needs b = 1 and a > -2");
  if (!(b > 0)) throw_validation("BAD_PARAMS", "b must be positive");
  ChartedSystem sys = u_chart_system("base", ChartKind::BaseU, a, b);
  sys.params.local = !global;
  if (global) attach_switch_threshold(sys, 1e-12);
  return sys;
}

ChartedSystem build_shifted(Real a, Real b, Real p) {
  if (b != 1) throw_validation("BAD_PARAMS", "shifted construction needs b = 1");
  PRange r = admissible_p(a);
  int sign = p_sign(r, p);
  if (sign == 0)
    throw_validation("INADMISSIBLE_P",
                     "p = " + fmt17(p) + " must lie in " + p_range_text(r));
  ChartedSystem sys = u_chart_system("shifted", ChartKind::ShiftedU, a, b);
  sys.params.p = p;
  sys.params.sign = sign;
  sys.params.local = false;
  attach_switch_threshold(sys, 1e-12);
  return sys;
}

ChartedSystem build_general(std::shared_ptr<const USolution> usol, Real d, Real c, Real d1,
                            Real p) {
  if (!usol) throw_validation("BAD_PARAMS", "general construction needs a solved u");
  ChartedSystem sys;
  sys.params.kind = "general";
  sys.params.a = usol->params.a;
  sys.params.b = usol->params.b;
  sys.params.d = d;
  sys.params.c = c;
  sys.params.d1 = d1;
  sys.params.p = p;
  sys.params.local = true;
  sys.usol = std::move(usol);
  Real lo = sys.usol->y_lo, hi = sys.usol->y_hi;
  Real pad = 0.05 * (hi - lo);
  sys.charts = {{"L", ChartKind::GeneralY, +1, lo, hi, lo + pad, hi - pad}};
  return sys;
}

ChartedSystem polar_presentation(Real a, std::shared_ptr<const PoleFunctions> pf,
                                 std::optional<Real> p) {
  if (!pf) throw_validation("BAD_PARAMS", "polar presentation needs pole functions");
  if (pf->a != a) throw_validation("BAD_PARAMS", "pole functions built for a different a");
  ChartedSystem sys;
  sys.params.a = a;
  sys.params.b = 1;
  sys.poles = std::move(pf);
  ChartKind ck = ChartKind::PolarBase;
  if (p) {
    PRange r = admissible_p(a);
    int sign = p_sign(r, *p);
    if (sign == 0)
      throw_validation("INADMISSIBLE_P",
                       "p = " + fmt17(*p) + " must lie in " + p_range_text(r));
    sys.params.kind = "polar-shifted";
    sys.params.p = *p;
    sys.params.sign = sign;
    ck = ChartKind::PolarShifted;
  } else {
    sys.params.kind = "polar-base";
  }
  Real inf = std::numeric_limits<Real>::infinity();
  sys.charts = {{"polarN", ck, +1, 0, inf, 0.5, 2.0}, {"polarS", ck, -1, 0, inf, 0.5, 2.0}};
  return sys;
}

Jet2 xi2_jet(const UJet& j, Real d, Real c, Real d1, Real p, Real perturb_first) {
  Jet2 U{j.u, j.u1, j.u2}, U1{j.u1, j.u2, j.u3};
  Jet2 w = sq(U1);
  auto closure = [&](Real dd, Real cc, Real dd1, Real pp) {
    Jet2 num = dd1 * U + cc;
    if (dd != 0) num = num + 2 * dd * (w - sq(U) + pp);
    return num / w;
  };
  Jet2 base = closure(d, c, d1, p);
  if (perturb_first == 1.0) return base;
  // scale the defining constants inside the value slot only; derivative slots
  // keep the unperturbed closure
  Jet2 pert = closure(d * perturb_first, c * perturb_first, d1 * perturb_first,
                      p * perturb_first);
  return {pert.v, base.d, base.dd};
}

}  // namespace qf
