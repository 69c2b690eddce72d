#pragma once

#include <complex>
#include <functional>

#include "qf/family.hpp"

namespace qf {

using Complex = std::complex<Real>;

// Real partial derivatives of f(phi, y) through total order 4.
struct RealPartials {
  Real f = 0;
  Real fp = 0, fy = 0;
  Real fpp = 0, fpy = 0, fyy = 0;
  Real fppp = 0, fppy = 0, fpyy = 0, fyyy = 0;
  Real fpppp = 0, fpppy = 0, fppyy = 0, fpyyy = 0, fyyyy = 0;
};

// Complex derivatives for z = phi + i y. The "b" suffix marks one bar slot:
// f_zzb = d^2 f / dz dzbar, f_zzzb = d^3 f / dz^2 dzbar, and so on.
struct WirtingerJet {
  Complex f_zz, f_zzb, f_zzz, f_zzzb, f_zzzz, f_zzzzb;
};

enum class XiMode { d_zero, d_nonzero };

// f = u(y) cos(phi) + xi(y) + d (phi^2 - y^2), with xi'' closed through the
// constants. raw, when set, replaces the family form entirely.
struct FAnsatz {
  std::function<UJet(Real)> u_jet;
  XiMode xi_mode = XiMode::d_zero;
  Real d = 0, c = 0, d1 = 0, p = 0;
  Real xi2_offset = 0;         // additive probe on xi'' (detectable violation)
  Real closure_perturb = 1.0;  // constants scaled inside xi'' only
  std::function<RealPartials(Real, Real)> raw;
};

WirtingerJet wirtinger_from_partials(const RealPartials& P);
RealPartials ansatz_partials(const FAnsatz& an, Real phi, Real y);
WirtingerJet f_jet(const FAnsatz& an, Real phi, Real y);

// conformal factor of the ansatz metric; equals Re f_zzb identically
Real lambda_ansatz(const FAnsatz& an, Real phi, Real y);

Real criterion_residual(const WirtingerJet& w);
// largest magnitude among the three summand products (normalization scale)
Real criterion_scale(const WirtingerJet& w);

// order-4 centered finite differences of a raw value evaluator
WirtingerJet fd_oracle(const std::function<Real(Real, Real)>& f, Real phi, Real y, Real h);

struct CriterionReport {
  Real max_rel = 0;
  Real mean_rel = 0;
  int skipped = 0;
  int total = 0;
};

CriterionReport criterion_scan(const FAnsatz& an, int n_phi, int n_y, Real phi_lo,
                               Real phi_hi, Real y_lo, Real y_hi);

}  // namespace qf
