#pragma once

#include <Eigen/Dense>

#include "qf/family.hpp"

namespace qf {

struct PhaseState {
  int chart = 0;
  Real q1 = 0, q2 = 0;
  Real p1 = 0, p2 = 0;
};

enum class Scheme { implicit_midpoint };

struct IntegratorConfig {
  Real dt = 1e-3;
  Scheme scheme = Scheme::implicit_midpoint;
  Real newton_tol = 1e-12;
  int max_newton_iters = 25;
  // Hysteresis band in polar radius: a switch fires only past the high edge
  // and lands near the reciprocal low edge, so consecutive switches need a
  // full traversal of the band.
  Real r_low = 0.5, r_high = 2.0;
};

struct TrajSample {
  Real t;
  PhaseState s;
  Real H;
};

struct SwitchEvent {
  Real t;
  int from = 0, to = 0;
  Real H_before = 0, H_after = 0;
};

struct Trajectory {
  std::vector<TrajSample> samples;
  std::vector<SwitchEvent> switches;
  IntegratorConfig config;
  std::string failure;  // empty on a clean run; otherwise the truncation cause
};

// Gradient and Hessian of H in x = (q1, q2, p1, p2). The midpoint solver only
// sees this interface, so test fixtures can stand in for chart systems.
struct HamiltonianModel {
  virtual ~HamiltonianModel() = default;
  virtual Real value(const Eigen::Vector4d& x) const = 0;
  virtual void derivatives(const Eigen::Vector4d& x, Eigen::Vector4d& grad,
                           Eigen::Matrix4d& hess) const = 0;
};

// H = (1/2)(p1^2/E1(q2) + p2^2/E2(q2)) + C(q2) cos(q1) on a fixed chart.
class ChartHamiltonian : public HamiltonianModel {
public:
  ChartHamiltonian(const ChartedSystem& sys, int chart) : sys_(sys), chart_(chart) {}
  Real value(const Eigen::Vector4d& x) const override;
  void derivatives(const Eigen::Vector4d& x, Eigen::Vector4d& grad,
                   Eigen::Matrix4d& hess) const override;

private:
  const ChartedSystem& sys_;
  int chart_;
};

Real eval_H(const ChartedSystem& sys, const PhaseState& s);

// One implicit-midpoint step; Newton iteration with the analytic Jacobian
// I - (dt/2) J hess. Throws NEWTON_DIVERGENCE if the residual does not reach
// tol within max_iters.
Eigen::Vector4d midpoint_step(const HamiltonianModel& model, const Eigen::Vector4d& x0, Real dt,
                              Real tol, int max_iters);

PhaseState step(const ChartedSystem& sys, const PhaseState& s, const IntegratorConfig& cfg);

Trajectory integrate(const ChartedSystem& sys, const PhaseState& s0, Real T,
                     const IntegratorConfig& cfg);

struct Section {
  int coord = 0;  // 0: the angle q1 (compared modulo 2 pi), 1: q2
  Real value = 0;
  int direction = +1;  // +1 increasing, -1 decreasing, 0 both
};

// Crossings of a coordinate section: linear interpolation between samples,
// then one Newton correction along the flow. Sample pairs spanning a chart
// switch are skipped.
std::vector<TrajSample> poincare(const ChartedSystem& sys, const Trajectory& traj,
                                 const Section& sec);

}  // namespace qf
