#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "qf/dynamics.hpp"
#include "qf/family.hpp"

namespace qf {

// Polynomial-in-momenta ansatz on one chart:
//   F = sum c_{jk,h,n} p1^j p2^k trig_h(q1) T_n(scaled q2),  j + k <= m.
// trig_h runs over cos(0..M), sin(1..M); T_n are Chebyshev polynomials on
// [y_lo, y_hi] collocated at the N extrema nodes.
struct Harmonic {
  bool is_sin = false;
  int h = 0;
};

struct QuarticAnsatz {
  int m = 4;   // max momentum degree
  int M = 6;   // Fourier order in the angle
  int N = 48;  // radial collocation size
  Real y_lo = -2, y_hi = 2;
  int chart = 0;
  Eigen::VectorXd coeffs;  // empty until a candidate is attached

  std::vector<std::pair<int, int>> monomials() const;  // (j,k), j+k <= m
  std::vector<Harmonic> harmonics() const;             // 2M+1 entries
  int basis_size() const { return int(monomials().size()) * (2 * M + 1) * N; }
  int column(int mono, int harm, int n) const { return (mono * (2 * M + 1) + harm) * N + n; }
  Eigen::VectorXd nodes() const;  // descending from y_hi to y_lo
};

Real eval_ansatz(const QuarticAnsatz& ansatz, const Eigen::VectorXd& coeffs,
                 const PhaseState& s);

// {F,H} discretized: rows are Chebyshev nodes x momentum monomials of degree
// <= m+1 x harmonics up to M+1. The operator splits into four blocks under
// momentum parity and the (q1,p1) -> (-q1,-p1) reflection, both symmetries of
// H; blocks are assembled on demand to bound memory.
class BracketOperator {
 public:
  BracketOperator(const ChartedSystem& sys, const QuarticAnsatz& ansatz);

  const QuarticAnsatz& ansatz() const { return ansatz_; }
  int cols() const { return ansatz_.basis_size(); }
  // (monomial, harmonic) pair ids per sector; block columns are pair-major x N
  const std::vector<int>& sector_columns(int s) const { return col_sector_[s]; }
  int sector_rows(int s) const { return int(row_sector_[s].size()) * ansatz_.N; }

  // dense block for one sector; columns follow sector_columns order
  Eigen::MatrixXd assemble(int sector) const;
  // same block restricted to a contiguous node range [node_lo, node_hi)
  Eigen::MatrixXd assemble_nodes(int sector, int node_lo, int node_hi) const;
  // matrix-free image of a full coefficient vector, all sectors concatenated
  Eigen::VectorXd apply(const Eigen::VectorXd& coeffs) const;

 private:
  QuarticAnsatz ansatz_;
  std::vector<std::pair<int, int>> monos_, out_monos_;
  std::vector<Harmonic> harms_, out_harms_;
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd tval_, tder_;            // T_n and T_n' at the nodes
  Eigen::VectorXd w1_, dw1_, w2_, dw2_, c_, dc_;  // W = 1/E and the potential
  std::array<std::vector<int>, 4> col_sector_;    // (mono,harm) pair ids
  std::array<std::vector<int>, 4> row_sector_;

  template <class Sink>
  void scatter_column(int mono, int harm, Sink&& add) const;
};

// node-sampled conserved combinations: 1, H (m >= 2), H^2 (m >= 4)
std::vector<Eigen::VectorXd> trivial_vectors(const ChartedSystem& sys,
                                             const QuarticAnsatz& ansatz);

enum class NullspaceMethod {
  svd,     // per-sector dense SVD, exact spectrum
  normal,  // QR triangle + inverse subspace iteration, for large grids
};

struct NullspaceReport {
  std::vector<Real> singular_values;  // ascending; the probed subset for normal
  Real sigma_max = 0;
  Real threshold_used = 0;
  int raw_dim = 0;
  int deflated_dim = 0;
  Real gap = 0;  // first kept sigma / last cut sigma; inf when nothing is cut
  std::array<int, 4> sector_raw{};
  std::vector<Eigen::VectorXd> kernel;         // ascending sigma, orthonormal
  std::vector<Eigen::VectorXd> new_integrals;  // kernel directions outside the
                                               // trivial span, orthonormal
  NullspaceMethod method = NullspaceMethod::svd;
};

NullspaceReport find_integrals(const BracketOperator& op,
                               const std::vector<Eigen::VectorXd>& trivials,
                               Real threshold = 1e-8,
                               NullspaceMethod method = NullspaceMethod::svd);

// max_t |F(t) - F(0)| / scale along a trajectory confined to the ansatz chart
// and window; scale = max(|F(0)|, spread of F over seeded random states).
Real certify(const QuarticAnsatz& ansatz, const Eigen::VectorXd& coeffs,
             const Trajectory& traj, std::uint64_t seed = 12345);

}  // namespace qf
