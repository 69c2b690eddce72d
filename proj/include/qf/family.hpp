#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qf/quartic_ode.hpp"

namespace qf {

// Every chart in this library has the same phase-space shape:
//   H = (1/2)(p1^2 / E1(q2) + p2^2 / E2(q2)) + C(q2) cos(q1)
// with q1 the angle and q2 the transverse coordinate. Metric coefficients and
// the potential amplitude depend on q2 only.
enum class ChartKind {
  BaseU,      // (phi, u): E1 = A^{-1/2}, E2 = A^{-1}
  ShiftedU,   // (phi, u): BaseU scaled by sign*(A^{1/2} - u^2 + p)
  PolarBase,  // (phi, r): conformal nu^{-2}(r^2)(r^2 dphi^2 + dr^2)
  PolarShifted,
  GeneralY,   // (phi, y): conformal 1/u'(y)^2, both closures
  Kov2U,      // (phi, u), u > 0
  EmbeddedZ,  // (phi, z), |z| < 1: restriction of the ambient quadratic form
};

struct Chart {
  std::string name;
  ChartKind kind;
  int mirror = +1;  // -1: evaluate through the (q1, q2) -> (-q1, -q2) involution
  Real q2_lo = -std::numeric_limits<Real>::infinity();
  Real q2_hi = std::numeric_limits<Real>::infinity();
  Real win_lo = -2, win_hi = 2;  // suggested collocation window
};

struct SystemParams {
  std::string kind;  // "base", "shifted", "general", "polar-base", ...
  Real a = 0, b = 1, p = 0;
  Real d = 0, c = 0, d1 = 0;  // closure constants of the general families
  int sign = +1;              // -1: the negated Hamiltonian is stored
  bool local = false;         // no whole-sphere claim
};

struct ChartedSystem {
  SystemParams params;
  std::vector<Chart> charts;
  std::shared_ptr<const USolution> usol;
  std::shared_ptr<const PoleFunctions> poles;
  // |u| (or polar-radius equivalent) beyond which the mirror chart takes over;
  // infinity when the system has a single chart.
  Real u_switch = std::numeric_limits<Real>::infinity();

  int chart_index(const std::string& name) const;
};

// Metric coefficients and potential amplitude at one q2, with d/dq2 jets.
struct ChartEval {
  Jet2 E1, E2, C;
};

ChartEval eval_chart(const ChartedSystem& sys, int chart, Real q2);
inline Real eval_V(const ChartedSystem& sys, int chart, Real q1, Real q2) {
  return eval_chart(sys, chart, q2).C.v * std::cos(q1);
}

// Gaussian curvature of ds^2 = E1(q2) dq1^2 + E2(q2) dq2^2.
Real curvature_of(const ChartEval& ce);
Real gaussian_curvature(const ChartedSystem& sys, int chart, Real q2);

struct PRange {
  Real a = 0;
  struct Component {
    Real lo, hi;
    int sign;
  };
  std::vector<Component> components;
};

PRange admissible_p(Real a);
// sign of the component containing p, or 0 when p is inadmissible
int p_sign(const PRange& r, Real p);
std::string p_range_text(const PRange& r);

// f(z) = z - sqrt(1 + a z + z^2), the function whose range determines the
// admissible shifts. Cancellation-free for large z.
Real f_shift(Real z, Real a);
Real f_shift_at_infinity(Real a);  // extrapolated limit, abs error < 1e-9

ChartedSystem build_base(Real a, Real b, bool require_global = false);
ChartedSystem build_shifted(Real a, Real b, Real p);
ChartedSystem build_general(std::shared_ptr<const USolution> usol, Real d, Real c, Real d1,
                            Real p = 0);
ChartedSystem polar_presentation(Real a, std::shared_ptr<const PoleFunctions> pf,
                                 std::optional<Real> p = std::nullopt);

// (xi'', xi''', xi'''') at y from the closure constants and the u-jet there.
// d = 0 closes with (d1 u + c)/u'^2; d != 0 with 2d(u'^2 - u^2 + p)/u'^2 plus
// the d1 u term. perturb_first scales the constants inside the xi'' value only,
// leaving the higher derivatives at the unperturbed closure (consistency probe).
Jet2 xi2_jet(const UJet& j, Real d, Real c, Real d1, Real p, Real perturb_first = 1.0);

}  // namespace qf
