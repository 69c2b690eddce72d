#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qf/family.hpp"

#include <cmath>
#include <random>

using namespace qf;

namespace {

Real eval_H(const ChartedSystem& sys, int chart, Real q1, Real q2, Real p1, Real p2) {
  ChartEval ce = eval_chart(sys, chart, q2);
  return 0.5 * (p1 * p1 / ce.E1.v + p2 * p2 / ce.E2.v) + ce.C.v * std::cos(q1);
}

}  // namespace

TEST_CASE("base chart values at simple points") {
  ChartedSystem s0 = build_base(0.0, 1.0);
  // u = 0: metric (1,1), V = 0 for every a
  for (Real a : {-1.0, 0.0, 1.0, 3.0}) {
    ChartedSystem s = build_base(a, 1.0);
    ChartEval ce = eval_chart(s, 0, 0.0);
    CHECK(ce.E1.v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ce.E2.v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ce.C.v == 0.0);
  }
  // potential value sqrt(2) - 1 at (phi=0, u=1) for a=0, b=1
  CHECK(eval_V(s0, 0, 0.0, 1.0) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
}

TEST_CASE("a=2 degeneration: potential vanishes, curvature constant") {
  ChartedSystem s = build_base(2.0, 1.0);
  Real vmax = 0, kmin = 1e300, kmax = -1e300;
  for (Real u = -3.0; u <= 3.0; u += 0.1) {
    vmax = std::max(vmax, std::abs(eval_chart(s, 0, u).C.v));
    Real k = gaussian_curvature(s, 0, u);
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
  }
  CHECK(vmax < 1e-12);
  CHECK(kmax - kmin < 1e-8);
  CHECK(kmax == doctest::Approx(1.0).epsilon(1e-10));  // unit-sphere metric
  // non-degenerate member for contrast
  ChartedSystem s0 = build_base(0.0, 1.0);
  Real k0 = gaussian_curvature(s0, 0, 0.0), k1 = gaussian_curvature(s0, 0, 1.5);
  CHECK(std::abs(k0 - k1) > 1e-2);
}

TEST_CASE("flat fixture has zero curvature") {
  ChartEval flat{Jet2::cst(1), Jet2::cst(1), Jet2::cst(0)};
  CHECK(curvature_of(flat) == 0.0);
}

TEST_CASE("metric positivity on grids") {
  for (const ChartedSystem& s :
       {build_base(0.0, 1.0), build_base(1.0, 1.0), build_shifted(1.0, 1.0, 1.0),
        build_shifted(1.0, 1.0, -2.0), build_shifted(3.0, 1.0, -2.0)}) {
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i <= 100; ++i) {
        Real u = -4.0 + 8.0 * i / 100;
        ChartEval ce = eval_chart(s, c, u);
        CHECK(ce.E1.v > 0);
        CHECK(ce.E2.v > 0);
      }
  }
}

TEST_CASE("mirror chart agrees with the involution") {
  for (const ChartedSystem& s : {build_base(1.0, 1.0), build_shifted(1.0, 1.0, 1.0)}) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<Real> du(-1.5, 1.5), dp(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      Real phi = 3 * dp(rng), u = du(rng), p1 = dp(rng), p2 = dp(rng);
      Real hn = eval_H(s, 0, phi, u, p1, p2);
      Real hs = eval_H(s, 1, -phi, -u, -p1, -p2);
      CHECK(std::abs(hn - hs) < 1e-10 * std::max(1.0, std::abs(hn)));
    }
  }
}

TEST_CASE("shifted factor identity and switch threshold") {
  ChartedSystem s = build_shifted(1.0, 1.0, 1.0);
  for (Real u = -2.0; u <= 2.0; u += 0.13) {
    ChartEval sh = eval_chart(s, 0, u);
    ChartEval ba = eval_chart(build_base(1.0, 1.0), 0, u);
    Real A = 1 + u * u + u * u * u * u;
    Real lam = sh.E1.v / ba.E1.v;
    CHECK(std::abs(lam - (std::sqrt(A) - u * u + 1)) < 1e-14 * lam);
  }
  // r = 2 corresponds to u(log 2); a=2 closed form sinh(log 2) = 3/4
  ChartedSystem s2 = build_base(2.0, 1.0);
  CHECK(s2.u_switch == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("admissible p intervals and signs") {
  PRange r1 = admissible_p(1.0);
  CHECK(r1.components.size() == 2);
  CHECK(r1.components[0].hi == -1.0);
  CHECK(r1.components[0].sign == -1);
  CHECK(r1.components[1].lo == -0.5);
  CHECK(r1.components[1].sign == +1);
  CHECK(p_sign(r1, -0.75) == 0);
  CHECK(p_sign(r1, 1.0) == +1);
  CHECK(p_sign(r1, -2.0) == -1);
  PRange r3 = admissible_p(3.0);
  CHECK(r3.components[0].hi == -1.5);
  CHECK(r3.components[1].lo == -1.0);
  CHECK_THROWS_AS(admissible_p(2.0), Error);
  CHECK_THROWS_AS(admissible_p(-2.0), Error);
  CHECK_THROWS_WITH_AS(build_shifted(1.0, 1.0, -0.75), doctest::Contains("INADMISSIBLE_P"),
                       Error);
}

TEST_CASE("shift function endpoints") {
  for (Real a : {-1.0, 0.0, 1.0, 3.0, 5.0}) {
    CHECK(f_shift(0.0, a) == -1.0);
    CHECK(std::abs(f_shift_at_infinity(a) - (-a / 2)) < 1e-9);
  }
  // monotone growth from the minimum on z >= 0
  CHECK(f_shift(1.0, 1.0) > f_shift(0.0, 1.0));
}

TEST_CASE("conformal factor sign behavior near the p boundary") {
  Real a = 1.0;
  auto lam = [a](Real u, Real p) {
    Real A = 1 + a * u * u + u * u * u * u;
    return std::sqrt(A) - u * u + p;
  };
  auto scan = [&](Real p, int sign) {
    Real mn = 1e300, mx = -1e300;
    for (Real u = 0.0; u <= 1000.0; u += 0.5) {
      Real v = sign * lam(u, p);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    return std::pair<Real, Real>{mn, mx};
  };
  // inside the upper component by 1e-3: positive throughout
  CHECK(scan(-0.5 + 1e-3, +1).first > 0);
  // outside by 1e-3: changes sign on the range
  auto [omn, omx] = scan(-0.5 - 1e-3, +1);
  CHECK(omn < 0);
  CHECK(omx > 0);
  // inside the lower component by 1e-3 (negated Hamiltonian branch)
  CHECK(scan(-1.0 - 1e-3, -1).first > 0);
}

TEST_CASE("general chart pulls back to the base chart") {
  auto us = std::make_shared<USolution>(
      solve_u(FamilyParams{0.0, 1.0, 0.0, +1}, 0.0, -2.0, 2.0, 1e-12));
  ChartedSystem gen = build_general(us, 0.0, 1.0, 0.0);
  ChartedSystem base = build_base(0.0, 1.0);
  for (Real y = -1.5; y <= 1.5; y += 0.1) {
    UJet j = us->jet(y);
    Real phi = 0.7, p_phi = 0.3, p_y = -0.4;
    Real hl = eval_H(gen, 0, phi, y, p_phi, p_y);
    Real hb = eval_H(base, 0, phi, j.u, p_phi, p_y / j.u1);
    CHECK(std::abs(hl - hb) < 1e-9 * std::max(1.0, std::abs(hb)));
  }
  // a=2 general system has vanishing potential
  auto us2 = std::make_shared<USolution>(
      solve_u(FamilyParams{2.0, 1.0, 0.0, +1}, 0.0, -2.0, 2.0, 1e-12));
  ChartedSystem gen2 = build_general(us2, 0.0, 1.0, 0.0);
  for (Real y = -1.5; y <= 1.5; y += 0.1)
    CHECK(std::abs(eval_chart(gen2, 0, y).C.v) < 1e-10);
}

TEST_CASE("polar presentation matches the u-chart across the change of variables") {
  Real a = 1.0;
  auto pf = std::make_shared<PoleFunctions>(compute_pole_functions(a, 2001, 1e-12));
  auto us = std::make_shared<USolution>(
      solve_u(FamilyParams{a, 1.0, 0.0, +1}, 0.0, -1.5, 1.5, 1e-12));
  ChartedSystem pol = polar_presentation(a, pf);
  ChartedSystem base = build_base(a, 1.0);

  // r=1 corresponds to u=0: chart values coincide there
  ChartEval pe = eval_chart(pol, 0, 1.0);
  CHECK(pe.E1.v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pe.E2.v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(pe.C.v) < 1e-9);
  CHECK(std::abs(eval_V(pol, 0, 0.3, 1.0)) < 1e-9);

  // potential vanishes at the chart origin
  CHECK(std::abs(eval_chart(pol, 0, 1e-12).C.v) < 1e-10);

  for (Real r = 0.6; r <= 1.9; r += 0.1) {
    Real y = std::log(r);
    UJet j = us->jet(y);
    Real phi = 0.4, p_phi = 0.8, p_r = -0.5;
    Real p_y = r * p_r;
    Real hp = eval_H(pol, 0, phi, r, p_phi, p_r);
    Real hu = eval_H(base, 0, phi, j.u, p_phi, p_y / j.u1);
    CHECK(std::abs(hp - hu) < 1e-9 * std::max(1.0, std::abs(hu)));
  }
}

TEST_CASE("polar chart overlap under inversion") {
  Real a = 1.0;
  auto pf = std::make_shared<PoleFunctions>(compute_pole_functions(a, 2001, 1e-12));
  for (std::optional<Real> p : {std::optional<Real>{}, std::optional<Real>{1.0}}) {
    ChartedSystem pol = polar_presentation(a, pf, p);
    for (Real r = 0.5; r <= 2.0; r += 0.1) {
      Real phi = 1.1, p_phi = 0.7, p_r = 0.4;
      Real hn = eval_H(pol, 0, phi, r, p_phi, p_r);
      Real hs = eval_H(pol, 1, -phi, 1 / r, -p_phi, -r * r * p_r);
      CHECK(std::abs(hn - hs) < 1e-10 * std::max(1.0, std::abs(hn)));
    }
  }
}

TEST_CASE("xi closure jets differentiate consistently") {
  auto us = std::make_shared<USolution>(
      solve_u(FamilyParams{1.0, 1.0, 0.0, +1}, 0.0, -2.0, 2.0, 1e-12));
  struct Case {
    Real d, c, d1, p;
  };
  for (const Case& cs : {Case{0.0, 1.0, 0.0, 0.0}, Case{0.0, 1.0, 2.0, 0.0},
                         Case{0.5, 0.0, 0.0, 1.0}}) {
    Real y = 0.6, h = 1e-3;
    auto xi2 = [&](Real yy) {
      return xi2_jet(us->jet(yy), cs.d, cs.c, cs.d1, cs.p).v;
    };
    Jet2 J = xi2_jet(us->jet(y), cs.d, cs.c, cs.d1, cs.p);
    Real d3 = (xi2(y + h) - xi2(y - h)) / (2 * h);
    Real d4 = (xi2(y + h) - 2 * xi2(y) + xi2(y - h)) / (h * h);
    CHECK(J.d == doctest::Approx(d3).epsilon(1e-6));
    CHECK(J.dd == doctest::Approx(d4).epsilon(1e-4));
  }
  // the consistency probe moves only the value slot
  UJet j = us->jet(0.6);
  Jet2 base = xi2_jet(j, 0.0, 1.0, 0.0, 0.0);
  Jet2 pert = xi2_jet(j, 0.0, 1.0, 0.0, 0.0, 1.01);
  CHECK(pert.v != base.v);
  CHECK(pert.d == base.d);
  CHECK(pert.dd == base.dd);
}
