#include "qf/dynamics.hpp"

#include <cmath>

namespace qf {

namespace {

struct ChartJets {
  Jet2 W1, W2, C;  // inverse metric coefficients and potential amplitude
};

ChartJets chart_jets(const ChartedSystem& sys, int chart, Real q2) {
  ChartEval ce = eval_chart(sys, chart, q2);
  return {1.0 / ce.E1, 1.0 / ce.E2, ce.C};
}

Eigen::Vector4d hamiltonian_field(const Eigen::Vector4d& grad) {
  return {grad[2], grad[3], -grad[0], -grad[1]};
}

}  // namespace

Real ChartHamiltonian::value(const Eigen::Vector4d& x) const {
  ChartJets j = chart_jets(sys_, chart_, x[1]);
  return 0.5 * (j.W1.v * x[2] * x[2] + j.W2.v * x[3] * x[3]) + j.C.v * std::cos(x[0]);
}

void ChartHamiltonian::derivatives(const Eigen::Vector4d& x, Eigen::Vector4d& grad,
                                   Eigen::Matrix4d& hess) const {
  ChartJets j = chart_jets(sys_, chart_, x[1]);
  Real cs = std::cos(x[0]), sn = std::sin(x[0]);
  Real p1 = x[2], p2 = x[3];
  grad[0] = -j.C.v * sn;
  grad[1] = 0.5 * (j.W1.d * p1 * p1 + j.W2.d * p2 * p2) + j.C.d * cs;
  grad[2] = j.W1.v * p1;
  grad[3] = j.W2.v * p2;
  hess.setZero();
  hess(0, 0) = -j.C.v * cs;
  hess(0, 1) = hess(1, 0) = -j.C.d * sn;
  hess(1, 1) = 0.5 * (j.W1.dd * p1 * p1 + j.W2.dd * p2 * p2) + j.C.dd * cs;
  hess(1, 2) = hess(2, 1) = j.W1.d * p1;
  hess(1, 3) = hess(3, 1) = j.W2.d * p2;
  hess(2, 2) = j.W1.v;
  hess(3, 3) = j.W2.v;
}

Real eval_H(const ChartedSystem& sys, const PhaseState& s) {
  return ChartHamiltonian(sys, s.chart).value({s.q1, s.q2, s.p1, s.p2});
}

Eigen::Vector4d midpoint_step(const HamiltonianModel& model, const Eigen::Vector4d& x0, Real dt,
                              Real tol, int max_iters) {
  Eigen::Vector4d grad;
  Eigen::Matrix4d hess;
  model.derivatives(x0, grad, hess);
  Eigen::Vector4d x1 = x0 + dt * hamiltonian_field(grad);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::Vector4d mid = 0.5 * (x0 + x1);
    model.derivatives(mid, grad, hess);
    Eigen::Vector4d G = x1 - x0 - dt * hamiltonian_field(grad);
    if (!G.allFinite())
      throw_numerical("NEWTON_DIVERGENCE", "midpoint residual not finite");
    if (G.lpNorm<Eigen::Infinity>() <= tol) return x1;
    Eigen::Matrix4d JH;  // rows of J * hess
    JH.row(0) = hess.row(2);
    JH.row(1) = hess.row(3);
    JH.row(2) = -hess.row(0);
    JH.row(3) = -hess.row(1);
    Eigen::Matrix4d A = Eigen::Matrix4d::Identity() - 0.5 * dt * JH;
    x1 -= A.partialPivLu().solve(G);
  }
  throw_numerical("NEWTON_DIVERGENCE",
                  "no convergence to " + fmt17(tol) + " in " + std::to_string(max_iters) +
                      " iterations");
}

PhaseState step(const ChartedSystem& sys, const PhaseState& s, const IntegratorConfig& cfg) {
  ChartHamiltonian model(sys, s.chart);
  Eigen::Vector4d x =
      midpoint_step(model, {s.q1, s.q2, s.p1, s.p2}, cfg.dt, cfg.newton_tol, cfg.max_newton_iters);
  return {s.chart, x[0], x[1], x[2], x[3]};
}

namespace {

enum class SwitchMode { none, u_chart, polar };

SwitchMode switch_mode(const ChartedSystem& sys) {
  if (sys.charts.size() < 2) return SwitchMode::none;
  switch (sys.charts[0].kind) {
    case ChartKind::BaseU:
    case ChartKind::ShiftedU:
      return SwitchMode::u_chart;
    case ChartKind::PolarBase:
    case ChartKind::PolarShifted:
      return SwitchMode::polar;
    default:
      return SwitchMode::none;
  }
}

}  // namespace

Trajectory integrate(const ChartedSystem& sys, const PhaseState& s0, Real T,
                     const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0) || !(T > 0))
    throw_validation("BAD_PARAMS", "integration needs dt > 0 and T > 0");
  if (!(cfg.newton_tol > 0) || cfg.max_newton_iters < 1)
    throw_validation("BAD_PARAMS", "newton_tol > 0 and max_newton_iters >= 1 required");
  if (!(0 < cfg.r_low && cfg.r_low < 1 && 1 < cfg.r_high))
    throw_validation("BAD_PARAMS", "switch band must satisfy 0 < r_low < 1 < r_high");

  SwitchMode mode = switch_mode(sys);
  Real u_trig = std::numeric_limits<Real>::infinity();
  if (mode == SwitchMode::u_chart) {
    u_trig = sys.u_switch;
    if (cfg.r_high != 2.0 && sys.usol) {
      Real y = std::min(std::log(cfg.r_high), sys.usol->y_hi);
      u_trig = sys.usol->u(y);
    }
  }

  long n_full = static_cast<long>(std::floor(T / cfg.dt + 1e-12));
  Real rem = T - n_full * cfg.dt;
  if (rem < 1e-12 * T) rem = 0;

  Trajectory traj;
  traj.config = cfg;
  traj.samples.reserve(n_full + 2);
  PhaseState s = s0;
  traj.samples.push_back({0.0, s, eval_H(sys, s)});
  Real t = 0;
  for (long k = 0; k < n_full + (rem > 0 ? 1 : 0); ++k) {
    Real dt = k < n_full ? cfg.dt : rem;
    try {
      ChartHamiltonian model(sys, s.chart);
      Eigen::Vector4d x = midpoint_step(model, {s.q1, s.q2, s.p1, s.p2}, dt, cfg.newton_tol,
                                        cfg.max_newton_iters);
      s = {s.chart, x[0], x[1], x[2], x[3]};
      t += dt;
      bool fire = (mode == SwitchMode::u_chart && s.q2 > u_trig) ||
                  (mode == SwitchMode::polar && s.q2 > cfg.r_high);
      if (fire) {
        SwitchEvent ev;
        ev.t = t;
        ev.from = s.chart;
        ev.to = 1 - s.chart;
        ev.H_before = eval_H(sys, s);
        if (mode == SwitchMode::u_chart) {
          s = {ev.to, -s.q1, -s.q2, -s.p1, -s.p2};
        } else {
          s = {ev.to, -s.q1, 1 / s.q2, -s.p1, -s.q2 * s.q2 * s.p2};
        }
        ev.H_after = eval_H(sys, s);
        traj.switches.push_back(ev);
      }
      traj.samples.push_back({t, s, eval_H(sys, s)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      traj.failure = e.what();
      break;
    }
  }
  return traj;
}

std::vector<TrajSample> poincare(const ChartedSystem& sys, const Trajectory& traj,
                                 const Section& sec) {
  std::vector<TrajSample> out;
  if (traj.samples.size() < 2) return out;
  auto coord_err = [&sec](const PhaseState& s) {
    Real c = (sec.coord == 0 ? s.q1 : s.q2) - sec.value;
    return sec.coord == 0 ? std::remainder(c, 2 * M_PI) : c;
  };
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    const TrajSample& a = traj.samples[i - 1];
    const TrajSample& b = traj.samples[i];
    if (a.s.chart != b.s.chart) continue;
    Real ca = coord_err(a.s), cb = coord_err(b.s);
    if (sec.coord == 0 && std::abs(ca - cb) > M_PI) continue;  // wrap seam
    bool hit = sec.direction > 0   ? (ca < 0 && cb >= 0)
               : sec.direction < 0 ? (ca > 0 && cb <= 0)
                                   : (ca < 0 && cb >= 0) || (ca > 0 && cb <= 0);
    if (!hit || ca == cb) continue;
    Real alpha = ca / (ca - cb);
    Eigen::Vector4d x{a.s.q1 + alpha * (b.s.q1 - a.s.q1), a.s.q2 + alpha * (b.s.q2 - a.s.q2),
                      a.s.p1 + alpha * (b.s.p1 - a.s.p1), a.s.p2 + alpha * (b.s.p2 - a.s.p2)};
    Real t = a.t + alpha * (b.t - a.t);
    ChartHamiltonian model(sys, a.s.chart);
    Eigen::Vector4d grad;
    Eigen::Matrix4d hess;
    model.derivatives(x, grad, hess);
    PhaseState cur{a.s.chart, x[0], x[1], x[2], x[3]};
    Real cdot = grad[2 + sec.coord];
    if (cdot != 0) {
      Real dtau = -coord_err(cur) / cdot;
      x += dtau * hamiltonian_field(grad);
      t += dtau;
      cur = {a.s.chart, x[0], x[1], x[2], x[3]};
    }
    out.push_back({t, cur, model.value(x)});
  }
  return out;
}

}  // namespace qf
