#include "qf/criterion.hpp"

#include <cmath>

namespace qf {

WirtingerJet wirtinger_from_partials(const RealPartials& P) {
  const Complex I(0, 1);
  WirtingerJet w;
  w.f_zz = 0.25 * Complex(P.fpp - P.fyy, -2 * P.fpy);
  w.f_zzb = 0.25 * Complex(P.fpp + P.fyy, 0);
  w.f_zzz = 0.125 * Complex(P.fppp - 3 * P.fpyy, -(3 * P.fppy - P.fyyy));
  w.f_zzzb = 0.125 * Complex(P.fppp + P.fpyy, -(P.fppy + P.fyyy));
  w.f_zzzz = (1.0 / 16) * Complex(P.fpppp - 6 * P.fppyy + P.fyyyy,
                                  -(4 * P.fpppy - 4 * P.fpyyy));
  w.f_zzzzb = (1.0 / 16) * Complex(P.fpppp - P.fyyyy, -2 * (P.fpppy + P.fpyyy));
  return w;
}

RealPartials ansatz_partials(const FAnsatz& an, Real phi, Real y) {
  if (an.raw) return an.raw(phi, y);
  if (an.xi_mode == XiMode::d_zero && an.d != 0)
    throw_validation("BAD_PARAMS", "d must be 0 in this closure mode");
  if (an.xi_mode == XiMode::d_nonzero && an.d == 0)
    throw_validation("BAD_PARAMS", "d must be nonzero in this closure mode");
  UJet j = an.u_jet(y);
  Jet2 xi = xi2_jet(j, an.d, an.c, an.d1, an.p, an.closure_perturb);
  Real xi2 = xi.v + an.xi2_offset, xi3 = xi.d, xi4 = xi.dd;
  Real cp = std::cos(phi), sp = std::sin(phi);
  RealPartials P;
  P.f = j.u * cp + an.d * (phi * phi - y * y);
  P.fp = -j.u * sp + 2 * an.d * phi;
  P.fy = j.u1 * cp - 2 * an.d * y;
  P.fpp = -j.u * cp + 2 * an.d;
  P.fpy = -j.u1 * sp;
  P.fyy = j.u2 * cp + xi2 - 2 * an.d;
  P.fppp = j.u * sp;
  P.fppy = -j.u1 * cp;
  P.fpyy = -j.u2 * sp;
  P.fyyy = j.u3 * cp + xi3;
  P.fpppp = j.u * cp;
  P.fpppy = j.u1 * sp;
  P.fppyy = -j.u2 * cp;
  P.fpyyy = -j.u3 * sp;
  P.fyyyy = j.u4 * cp + xi4;
  return P;
}

WirtingerJet f_jet(const FAnsatz& an, Real phi, Real y) {
  return wirtinger_from_partials(ansatz_partials(an, phi, y));
}

Real lambda_ansatz(const FAnsatz& an, Real phi, Real y) {
  UJet j = an.u_jet(y);
  Jet2 xi = xi2_jet(j, an.d, an.c, an.d1, an.p, an.closure_perturb);
  return 0.25 * ((j.u2 - j.u) * std::cos(phi) + xi.v + an.xi2_offset);
}

Real criterion_residual(const WirtingerJet& w) {
  Complex s = w.f_zzzz * w.f_zzb + 3.0 * w.f_zzz * w.f_zzzb + 2.0 * w.f_zz * w.f_zzzzb;
  return s.imag();
}

Real criterion_scale(const WirtingerJet& w) {
  return std::max({std::abs(w.f_zzzz * w.f_zzb), std::abs(3.0 * w.f_zzz * w.f_zzzb),
                   std::abs(2.0 * w.f_zz * w.f_zzzzb)});
}

namespace {

// order-4 centered stencils on a 7x7 value grid; index 0 is offset -3
struct Stencil {
  Real c[7];
};

const Stencil kD0{{0, 0, 0, 1, 0, 0, 0}};
const Stencil kD1{{0, 1.0 / 12, -2.0 / 3, 0, 2.0 / 3, -1.0 / 12, 0}};
const Stencil kD2{{0, -1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12, 0}};
const Stencil kD3{{1.0 / 8, -1, 13.0 / 8, 0, -13.0 / 8, 1, -1.0 / 8}};
const Stencil kD4{{-1.0 / 6, 2, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2, -1.0 / 6}};

Real tensor_apply(const Real v[7][7], const Stencil& sp, const Stencil& sy, Real h,
                  int order) {
  Real acc = 0;
  for (int i = 0; i < 7; ++i) {
    if (sp.c[i] == 0) continue;
    Real row = 0;
    for (int j = 0; j < 7; ++j)
      if (sy.c[j] != 0) row += sy.c[j] * v[i][j];
    acc += sp.c[i] * row;
  }
  return acc / std::pow(h, order);
}

WirtingerJet fd_once(const std::function<Real(Real, Real)>& f, Real phi, Real y, Real h) {
  Real v[7][7];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) v[i][j] = f(phi + (i - 3) * h, y + (j - 3) * h);
  RealPartials P;
  P.f = v[3][3];
  P.fp = tensor_apply(v, kD1, kD0, h, 1);
  P.fy = tensor_apply(v, kD0, kD1, h, 1);
  P.fpp = tensor_apply(v, kD2, kD0, h, 2);
  P.fpy = tensor_apply(v, kD1, kD1, h, 2);
  P.fyy = tensor_apply(v, kD0, kD2, h, 2);
  P.fppp = tensor_apply(v, kD3, kD0, h, 3);
  P.fppy = tensor_apply(v, kD2, kD1, h, 3);
  P.fpyy = tensor_apply(v, kD1, kD2, h, 3);
  P.fyyy = tensor_apply(v, kD0, kD3, h, 3);
  P.fpppp = tensor_apply(v, kD4, kD0, h, 4);
  P.fpppy = tensor_apply(v, kD3, kD1, h, 4);
  P.fppyy = tensor_apply(v, kD2, kD2, h, 4);
  P.fpyyy = tensor_apply(v, kD1, kD3, h, 4);
  P.fyyyy = tensor_apply(v, kD0, kD4, h, 4);
  return wirtinger_from_partials(P);
}

}  // namespace

WirtingerJet fd_oracle(const std::function<Real(Real, Real)>& f, Real phi, Real y, Real h) {
  // Stencils are order 4; one Richardson step against the doubled step
  // cancels the leading term.  Halving h instead would push the fourth
  // derivatives into rounding noise (eps/h^4).
  WirtingerJet a = fd_once(f, phi, y, 2 * h);
  WirtingerJet b = fd_once(f, phi, y, h);
  auto rich = [](Complex coarse, Complex fine) { return (16.0 * fine - coarse) / 15.0; };
  WirtingerJet w;
  w.f_zz = rich(a.f_zz, b.f_zz);
  w.f_zzb = rich(a.f_zzb, b.f_zzb);
  w.f_zzz = rich(a.f_zzz, b.f_zzz);
  w.f_zzzb = rich(a.f_zzzb, b.f_zzzb);
  w.f_zzzz = rich(a.f_zzzz, b.f_zzzz);
  w.f_zzzzb = rich(a.f_zzzzb, b.f_zzzzb);
  return w;
}

CriterionReport criterion_scan(const FAnsatz& an, int n_phi, int n_y, Real phi_lo,
                               Real phi_hi, Real y_lo, Real y_hi) {
  if (n_phi < 2 || n_y < 2) throw_validation("BAD_PARAMS", "grid needs at least 2x2");
  CriterionReport rep;
  Real sum = 0;
  for (int i = 0; i < n_phi; ++i) {
    Real phi = phi_lo + (phi_hi - phi_lo) * i / (n_phi - 1);
    for (int j = 0; j < n_y; ++j) {
      Real y = y_lo + (y_hi - y_lo) * j / (n_y - 1);
      if (!an.raw) {
        UJet uj = an.u_jet(y);
        if (std::abs(uj.u1) < 1e-6) {
          ++rep.skipped;
          continue;
        }
      }
      WirtingerJet w = f_jet(an, phi, y);
      Real sc = criterion_scale(w);
      Real rel = sc > 0 ? std::abs(criterion_residual(w)) / sc : 0.0;
      rep.max_rel = std::max(rep.max_rel, rel);
      sum += rel;
      ++rep.total;
    }
  }
  rep.mean_rel = rep.total ? sum / rep.total : 0;
  return rep;
}

}  // namespace qf
