#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qf/dynamics.hpp"
#include "qf/family.hpp"
#include "qf/integral_finder.hpp"
#include "qf/kovalevskaya.hpp"

using namespace qf;

namespace {

int mono_index(const QuarticAnsatz& az, int j, int k) {
  auto ms = az.monomials();
  for (size_t i = 0; i < ms.size(); ++i)
    if (ms[i].first == j && ms[i].second == k) return int(i);
  return -1;
}

int harm_index(const QuarticAnsatz& az, bool is_sin, int h) {
  auto hs = az.harmonics();
  for (size_t i = 0; i < hs.size(); ++i)
    if (hs[i].is_sin == is_sin && hs[i].h == h) return int(i);
  return -1;
}

}  // namespace

TEST_CASE("basis bookkeeping") {
  QuarticAnsatz az;
  az.m = 4;
  az.M = 6;
  az.N = 48;
  CHECK(az.monomials().size() == 15);
  CHECK(az.harmonics().size() == 13);
  CHECK(az.basis_size() == 15 * 13 * 48);

  // column() enumerates the basis without collisions
  std::vector<char> seen(az.basis_size(), 0);
  for (int mi = 0; mi < 15; ++mi)
    for (int t = 0; t < 13; ++t)
      for (int n = 0; n < az.N; ++n) {
        int c = az.column(mi, t, n);
        REQUIRE(c >= 0);
        REQUIRE(c < az.basis_size());
        CHECK(!seen[c]);
        seen[c] = 1;
      }

  Eigen::VectorXd y = az.nodes();
  REQUIRE(y.size() == az.N);
  CHECK(y[0] == doctest::Approx(az.y_hi).epsilon(1e-15));
  CHECK(y[az.N - 1] == doctest::Approx(az.y_lo).epsilon(1e-15));
  for (int i = 1; i < az.N; ++i) CHECK(y[i] < y[i - 1]);
}

TEST_CASE("ansatz evaluation matches a hand-built term") {
  QuarticAnsatz az;
  az.N = 8;
  az.M = 3;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(az.basis_size());
  int mi = mono_index(az, 1, 1);
  int hi = harm_index(az, false, 2);
  REQUIRE(mi >= 0);
  REQUIRE(hi >= 0);
  c[az.column(mi, hi, 3)] = 0.7;  // 0.7 p1 p2 cos(2 q1) T_3(x)

  PhaseState s{0, 0.4, 0.9, 1.3, -0.6};
  double x = (2 * s.q2 - (az.y_lo + az.y_hi)) / (az.y_hi - az.y_lo);
  double t3 = 4 * x * x * x - 3 * x;
  double want = 0.7 * s.p1 * s.p2 * std::cos(2 * s.q1) * t3;
  CHECK(eval_ansatz(az, c, s) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("trivial vectors reproduce the energy") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  auto triv = trivial_vectors(sys, az);
  REQUIRE(triv.size() == 3);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uq(-1.5, 1.5), up(-1, 1);
  for (int i = 0; i < 40; ++i) {
    PhaseState s{0, uq(rng) * 2, uq(rng), up(rng), up(rng)};
    double h = eval_H(sys, s);
    CHECK(eval_ansatz(az, triv[0], s) == doctest::Approx(1.0).epsilon(1e-12));
    // profile interpolation of the metric coefficients is good to ~1e-11
    CHECK(eval_ansatz(az, triv[1], s) == doctest::Approx(h).epsilon(1e-10));
    CHECK(eval_ansatz(az, triv[2], s) == doctest::Approx(h * h).epsilon(1e-9));
  }
}

TEST_CASE("a constant has an exactly zero bracket") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  az.m = 2;
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  Eigen::VectorXd img = op.apply(triv[0]);
  CHECK(img.isZero(0.0));
}

TEST_CASE("the energy lies in the numerical kernel") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  az.m = 2;
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  Eigen::VectorXd img = op.apply(triv[1]);
  CHECK(img.lpNorm<Eigen::Infinity>() < 1e-6 * triv[1].lpNorm<Eigen::Infinity>());
}

TEST_CASE("angular momentum survives when the potential vanishes") {
  ChartedSystem sys = build_base(2, 1);
  QuarticAnsatz az;
  az.m = 1;
  BracketOperator op(sys, az);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(az.basis_size());
  c[az.column(mono_index(az, 1, 0), harm_index(az, false, 0), 0)] = 1.0;  // p1
  Eigen::VectorXd img = op.apply(c);
  CHECK(img.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("a degree-zero ansatz only contains the constant") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  az.m = 0;
  az.M = 4;
  az.N = 24;
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  REQUIRE(triv.size() == 1);
  NullspaceReport rep = find_integrals(op, triv);
  CHECK(rep.raw_dim == 1);
  CHECK(rep.deflated_dim == 0);
  CHECK(rep.sector_raw[0] == 1);
}

TEST_CASE("the degree-two kernel is spanned by the energy pencil") {
  for (double a : {1.0, 0.0}) {
    CAPTURE(a);
    ChartedSystem sys = build_base(a, 1);
    QuarticAnsatz az;
    az.m = 2;
    BracketOperator op(sys, az);
    auto triv = trivial_vectors(sys, az);
    NullspaceReport rep = find_integrals(op, triv);
    CHECK(rep.raw_dim == 2);   // the constant and the energy
    CHECK(rep.deflated_dim == 0);
    CHECK(rep.gap > 1e4);  // measured 4.2e8 (a=1) and 1.8e7 (a=0)
    CHECK(rep.threshold_used == doctest::Approx(1e-8 * rep.sigma_max));
    REQUIRE(rep.kernel.size() == size_t(rep.raw_dim));
    for (size_t i = 0; i < rep.kernel.size(); ++i) {
      CHECK(rep.kernel[i].norm() == doctest::Approx(1.0).epsilon(1e-10));
      for (size_t l = 0; l < i; ++l)
        CHECK(std::abs(rep.kernel[i].dot(rep.kernel[l])) < 1e-8);
    }
    // ascending spectrum, raw count consistent with the cut
    int below = 0;
    for (size_t i = 0; i < rep.singular_values.size(); ++i) {
      if (i) CHECK(rep.singular_values[i] >= rep.singular_values[i - 1]);
      if (rep.singular_values[i] < rep.threshold_used) ++below;
    }
    CHECK(below == rep.raw_dim);
    CHECK(rep.sector_raw[0] + rep.sector_raw[1] + rep.sector_raw[2] + rep.sector_raw[3] ==
          rep.raw_dim);
  }
}

TEST_CASE("the round system carries three linear integrals") {
  ChartedSystem sys = build_base(2, 1);
  QuarticAnsatz az;
  az.m = 1;
  az.M = 4;
  az.N = 24;
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  NullspaceReport rep = find_integrals(op, triv);
  CHECK(rep.raw_dim == 4);  // constant plus a full rotation algebra
  CHECK(rep.deflated_dim == 3);
  for (auto& f : rep.new_integrals) {
    CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(f.dot(triv[0]) / triv[0].norm()) < 1e-8);
  }
}

TEST_CASE("degree four discovers the hidden quartic invariant") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;  // m=4, M=6, N=48
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  NullspaceReport rep = find_integrals(op, triv);
  CHECK(rep.raw_dim == 4);
  REQUIRE(rep.deflated_dim == 1);

  const Eigen::VectorXd& f = rep.new_integrals[0];
  CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-10));
  for (auto& t : triv) CHECK(std::abs(f.dot(t) / t.norm()) < 1e-8);

  // small oscillation around the potential well stays inside the window
  Trajectory tr = integrate(sys, {0, 0, -1.05, 0.1, 0.1}, 100, {});
  REQUIRE(tr.failure.empty());
  CHECK(tr.switches.empty());

  CHECK(certify(az, f, tr) < 1e-7);        // measured 4.1e-10
  CHECK(certify(az, triv[1], tr) < 1e-7);  // measured 1.8e-10

  // a random combination is visibly not conserved
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  Eigen::VectorXd junk(az.basis_size());
  for (int i = 0; i < junk.size(); ++i) junk[i] = g(rng);
  junk.normalize();
  CHECK(certify(az, junk, tr) > 1e-3);
}

TEST_CASE("the iterative path agrees with the direct factorization") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  az.m = 2;
  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  NullspaceReport direct = find_integrals(op, triv, 1e-8, NullspaceMethod::svd);
  NullspaceReport iter = find_integrals(op, triv, 1e-8, NullspaceMethod::normal);
  CHECK(iter.raw_dim == direct.raw_dim);
  CHECK(iter.deflated_dim == direct.deflated_dim);
  // the iterative path estimates the top of the spectrum by power iteration
  CHECK(iter.sigma_max == doctest::Approx(direct.sigma_max).epsilon(1e-2));
  CHECK(iter.gap / direct.gap > 0.5);
  CHECK(iter.gap / direct.gap < 2.0);
}

TEST_CASE("certification rejects trajectories that leave the window") {
  ChartedSystem sys = build_base(1, 1);
  QuarticAnsatz az;
  az.m = 2;
  auto triv = trivial_vectors(sys, az);

  // this start slides down the polar channel and passes q2 = -2
  Trajectory tr = integrate(sys, {0, 0.3, 0.1, 0.2, 0.1}, 5, {});
  REQUIRE(tr.failure.empty());
  try {
    certify(az, triv[1], tr);
    FAIL("expected a window exit");
  } catch (const Error& e) {
    CHECK(e.code() == "WINDOW_EXIT");
    CHECK(e.kind() == ErrorKind::Numerical);
  }
}

TEST_CASE("certification rejects trajectories that change chart") {
  ChartedSystem sys = build_base(0, 1);
  QuarticAnsatz az;
  az.m = 2;
  auto triv = trivial_vectors(sys, az);

  Trajectory tr = integrate(sys, {0, M_PI, 0.55, 0, 0.35}, 20, {});
  REQUIRE(tr.failure.empty());
  REQUIRE(!tr.switches.empty());
  try {
    certify(az, triv[1], tr);
    FAIL("expected a chart change rejection");
  } catch (const Error& e) {
    CHECK(e.code() == "WINDOW_EXIT");
  }

  Trajectory empty;
  CHECK_THROWS_AS(certify(az, triv[1], empty), Error);
}

TEST_CASE("the ansatz window must sit inside the chart") {
  ChartedSystem sys = kov_chart_system();
  QuarticAnsatz az;
  az.y_lo = -1;  // the chart needs q2 > 0
  az.y_hi = 2;
  try {
    BracketOperator op(sys, az);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == "WINDOW_OUTSIDE_CHART");
    CHECK(e.kind() == ErrorKind::Validation);
  }
}
