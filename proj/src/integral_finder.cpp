#include "qf/integral_finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qf/common.hpp"

namespace qf {

namespace {

// momentum parity and (q1,p1)-reflection parity pin the sector
int sector_of(int j, int k, const Harmonic& h) {
  int s1 = (j + (h.is_sin ? 1 : 0)) % 2;
  int s2 = (j + k) % 2;
  return 2 * s1 + s2;
}

std::vector<std::pair<int, int>> monomials_upto(int m) {
  std::vector<std::pair<int, int>> out;
  for (int d = 0; d <= m; ++d)
    for (int j = d; j >= 0; --j) out.push_back({j, d - j});
  return out;
}

std::vector<Harmonic> harmonics_upto(int M) {
  std::vector<Harmonic> out;
  for (int h = 0; h <= M; ++h) out.push_back({false, h});
  for (int h = 1; h <= M; ++h) out.push_back({true, h});
  return out;
}

Eigen::VectorXd extrema_nodes(int N, Real lo, Real hi) {
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) {
    Real x = std::cos(M_PI * i / (N - 1));
    y[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
  }
  return y;
}

// T_n and dT_n/dy at the nodes; dT_n = n U_{n-1} dx/dy
void chebyshev_tables(int N, Real lo, Real hi, Eigen::MatrixXd& tval, Eigen::MatrixXd& tder) {
  tval.resize(N, N);
  tder.resize(N, N);
  Real sx = 2.0 / (hi - lo);
  for (int i = 0; i < N; ++i) {
    Real x = std::cos(M_PI * i / (N - 1));
    Real t0 = 1, t1 = x, u0 = 1, u1 = 2 * x;
    for (int n = 0; n < N; ++n) {
      Real t = n == 0 ? 1 : (n == 1 ? x : 2 * x * t1 - t0);
      if (n >= 2) {
        t0 = t1;
        t1 = t;
      }
      Real un1;  // U_{n-1}
      if (n == 0) {
        un1 = 0;
      } else if (n == 1) {
        un1 = 1;
      } else {
        un1 = n == 2 ? u1 : 2 * x * u1 - u0;
        if (n >= 3) {
          u0 = u1;
          u1 = un1;
        }
      }
      tval(i, n) = t;
      tder(i, n) = sx * n * un1;
    }
  }
}

struct Term {
  int out_pair;
  const Eigen::VectorXd* factors;
  Real weight;
  bool use_der;
};

}  // namespace

std::vector<std::pair<int, int>> QuarticAnsatz::monomials() const { return monomials_upto(m); }
std::vector<Harmonic> QuarticAnsatz::harmonics() const { return harmonics_upto(M); }
Eigen::VectorXd QuarticAnsatz::nodes() const { return extrema_nodes(N, y_lo, y_hi); }

Real eval_ansatz(const QuarticAnsatz& ansatz, const Eigen::VectorXd& coeffs,
                 const PhaseState& s) {
  if (coeffs.size() != ansatz.basis_size())
    throw_validation("BAD_ANSATZ", "coefficient vector does not match the basis size");
  auto monos = ansatz.monomials();
  auto harms = ansatz.harmonics();
  int N = ansatz.N;
  Real x = (2 * s.q2 - (ansatz.y_lo + ansatz.y_hi)) / (ansatz.y_hi - ansatz.y_lo);

  std::vector<Real> trig(harms.size());
  for (size_t t = 0; t < harms.size(); ++t)
    trig[t] = harms[t].is_sin ? std::sin(harms[t].h * s.q1) : std::cos(harms[t].h * s.q1);
  std::vector<Real> pw1(ansatz.m + 1, 1), pw2(ansatz.m + 1, 1);
  for (int j = 1; j <= ansatz.m; ++j) {
    pw1[j] = pw1[j - 1] * s.p1;
    pw2[j] = pw2[j - 1] * s.p2;
  }

  Real F = 0;
  for (size_t mi = 0; mi < monos.size(); ++mi) {
    Real pmono = pw1[monos[mi].first] * pw2[monos[mi].second];
    for (size_t t = 0; t < harms.size(); ++t) {
      const Real* a = coeffs.data() + (mi * harms.size() + t) * N;
      Real b1 = 0, b2 = 0;  // Clenshaw
      for (int n = N - 1; n >= 1; --n) {
        Real b = a[n] + 2 * x * b1 - b2;
        b2 = b1;
        b1 = b;
      }
      F += pmono * trig[t] * (a[0] + x * b1 - b2);
    }
  }
  return F;
}

BracketOperator::BracketOperator(const ChartedSystem& sys, const QuarticAnsatz& ansatz)
    : ansatz_(ansatz) {
  if (ansatz.m < 0 || ansatz.m > 4)
    throw_validation("BAD_ANSATZ", "momentum degree must lie in [0, 4]");
  if (ansatz.M < 0 || ansatz.N < 4 || !(ansatz.y_lo < ansatz.y_hi))
    throw_validation("BAD_ANSATZ", "need M >= 0, N >= 4 and a nonempty window");
  if (ansatz.chart < 0 || ansatz.chart >= int(sys.charts.size()))
    throw_validation("BAD_ANSATZ", "chart index out of range");
  const Chart& ch = sys.charts[ansatz.chart];
  if (!(ch.q2_lo < ansatz.y_lo) || !(ansatz.y_hi < ch.q2_hi))
    throw_validation("WINDOW_OUTSIDE_CHART",
                     "collocation window [" + fmt17(ansatz.y_lo) + ", " + fmt17(ansatz.y_hi) +
                         "] is not interior to chart '" + ch.name + "'");

  monos_ = monomials_upto(ansatz.m);
  out_monos_ = monomials_upto(ansatz.m + 1);
  harms_ = harmonics_upto(ansatz.M);
  out_harms_ = harmonics_upto(ansatz.M + 1);
  nodes_ = extrema_nodes(ansatz.N, ansatz.y_lo, ansatz.y_hi);
  chebyshev_tables(ansatz.N, ansatz.y_lo, ansatz.y_hi, tval_, tder_);

  int N = ansatz.N;
  w1_.resize(N);
  dw1_.resize(N);
  w2_.resize(N);
  dw2_.resize(N);
  c_.resize(N);
  dc_.resize(N);
  for (int i = 0; i < N; ++i) {
    ChartEval ce = eval_chart(sys, ansatz.chart, nodes_[i]);
    Jet2 W1 = 1.0 / ce.E1, W2 = 1.0 / ce.E2;
    w1_[i] = W1.v;
    dw1_[i] = W1.d;
    w2_[i] = W2.v;
    dw2_[i] = W2.d;
    c_[i] = ce.C.v;
    dc_[i] = ce.C.d;
  }

  for (size_t mi = 0; mi < monos_.size(); ++mi)
    for (size_t t = 0; t < harms_.size(); ++t) {
      int s = sector_of(monos_[mi].first, monos_[mi].second, harms_[t]);
      col_sector_[s].push_back(int(mi * harms_.size() + t));
    }
  // the bracket with H flips momentum parity (p -> -p is anti-symplectic), so
  // rows reachable from column sector (s1, s2) carry sector (s1, 1-s2)
  for (size_t mi = 0; mi < out_monos_.size(); ++mi)
    for (size_t t = 0; t < out_harms_.size(); ++t) {
      int s = sector_of(out_monos_[mi].first, out_monos_[mi].second, out_harms_[t]);
      row_sector_[s ^ 1].push_back(int(mi * out_harms_.size() + t));
    }

  // every bracket term must stay inside its column's symmetry sector
  for (int s = 0; s < 4; ++s) {
    std::vector<char> in_sector(out_monos_.size() * out_harms_.size(), 0);
    for (int rp : row_sector_[s]) in_sector[rp] = 1;
    for (int pair : col_sector_[s]) {
      scatter_column(pair / int(harms_.size()), pair % int(harms_.size()), [&](const Term& t) {
        if (t.out_pair >= 0 && !in_sector[t.out_pair])
          throw_numerical("SECTOR_MIX", "bracket term escaped its symmetry sector");
      });
    }
  }
}

template <class Sink>
void BracketOperator::scatter_column(int mono, int harm, Sink&& add) const {
  int j = monos_[mono].first, k = monos_[mono].second;
  Harmonic hh = harms_[harm];
  int H = int(out_harms_.size());
  int nharm = ansatz_.M + 2;  // cos count among out harmonics

  auto out_pair = [&](int oj, int ok, bool is_sin, int h) -> int {
    if (is_sin && h == 0) return -1;
    int hid = is_sin ? nharm + (h - 1) : h;
    int mid = -1;
    for (size_t q = 0; q < out_monos_.size(); ++q)
      if (out_monos_[q].first == oj && out_monos_[q].second == ok) {
        mid = int(q);
        break;
      }
    return mid * H + hid;
  };

  // dF/dq1 * W1 p1 : the angle derivative shifts cos<->sin
  if (hh.is_sin)
    add(Term{out_pair(j + 1, k, false, hh.h), &w1_, Real(hh.h), false});
  else if (hh.h > 0)
    add(Term{out_pair(j + 1, k, true, hh.h), &w1_, Real(-hh.h), false});
  // dF/dq2 * W2 p2 and the -(k/2) W2' part of -dH/dq2 * dF/dp2
  add(Term{out_pair(j, k + 1, hh.is_sin, hh.h), &w2_, 1, true});
  if (k > 0) add(Term{out_pair(j, k + 1, hh.is_sin, hh.h), &dw2_, -0.5 * k, false});
  // +j C sin(q1) Phi p1^{j-1}: the -dF/dp1 * dH/dq1 term
  if (j > 0) {
    if (!hh.is_sin) {
      if (hh.h == 0) {
        add(Term{out_pair(j - 1, k, true, 1), &c_, Real(j), false});
      } else {
        add(Term{out_pair(j - 1, k, true, hh.h + 1), &c_, 0.5 * j, false});
        if (hh.h >= 2) add(Term{out_pair(j - 1, k, true, hh.h - 1), &c_, -0.5 * j, false});
      }
    } else {
      add(Term{out_pair(j - 1, k, false, hh.h - 1), &c_, 0.5 * j, false});
      add(Term{out_pair(j - 1, k, false, hh.h + 1), &c_, -0.5 * j, false});
    }
  }
  // -(k/2) W1' p1^{j+2} p2^{k-1}
  if (k > 0) add(Term{out_pair(j + 2, k - 1, hh.is_sin, hh.h), &dw1_, -0.5 * k, false});
  // -k C' cos(q1) Phi p2^{k-1}
  if (k > 0) {
    if (!hh.is_sin) {
      if (hh.h == 0) {
        add(Term{out_pair(j, k - 1, false, 1), &dc_, Real(-k), false});
      } else {
        add(Term{out_pair(j, k - 1, false, hh.h + 1), &dc_, -0.5 * k, false});
        add(Term{out_pair(j, k - 1, false, hh.h - 1), &dc_, -0.5 * k, false});
      }
    } else {
      add(Term{out_pair(j, k - 1, true, hh.h + 1), &dc_, -0.5 * k, false});
      if (hh.h >= 2) add(Term{out_pair(j, k - 1, true, hh.h - 1), &dc_, -0.5 * k, false});
    }
  }
}

Eigen::MatrixXd BracketOperator::assemble(int sector) const {
  return assemble_nodes(sector, 0, ansatz_.N);
}

Eigen::MatrixXd BracketOperator::assemble_nodes(int sector, int node_lo, int node_hi) const {
  int N = ansatz_.N, nn = node_hi - node_lo;
  const std::vector<int>& cols = col_sector_[sector];
  const std::vector<int>& rows = row_sector_[sector];
  std::vector<int> row_pos(out_monos_.size() * out_harms_.size(), -1);
  for (size_t r = 0; r < rows.size(); ++r) row_pos[rows[r]] = int(r);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(int(rows.size()) * nn, int(cols.size()) * N);
  parallel_for(cols.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t cp = b; cp < e; ++cp) {
      int pair = cols[cp];
      int mono = pair / int(harms_.size()), harm = pair % int(harms_.size());
      std::vector<Term> terms;
      scatter_column(mono, harm, [&](const Term& t) {
        if (t.out_pair >= 0) terms.push_back(t);
      });
      for (const Term& t : terms) {
        int rp = row_pos[t.out_pair];  // membership was checked at construction
        const Eigen::MatrixXd& tab = t.use_der ? tder_ : tval_;
        for (int n = 0; n < N; ++n)
          for (int i = node_lo; i < node_hi; ++i)
            A(rp * nn + (i - node_lo), int(cp) * N + n) +=
                t.weight * (*t.factors)[i] * tab(i, n);
      }
    }
  });
  return A;
}

Eigen::VectorXd BracketOperator::apply(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != ansatz_.basis_size())
    throw_validation("BAD_ANSATZ", "coefficient vector does not match the basis size");
  int N = ansatz_.N;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(int(out_monos_.size() * out_harms_.size()) * N);
  for (size_t mi = 0; mi < monos_.size(); ++mi)
    for (size_t t = 0; t < harms_.size(); ++t) {
      int pair = int(mi * harms_.size() + t);
      Eigen::VectorXd a = coeffs.segment(pair * N, N);
      if (a.isZero(0)) continue;
      Eigen::VectorXd rval = tval_ * a, rder = tder_ * a;
      scatter_column(int(mi), int(t), [&](const Term& term) {
        if (term.out_pair < 0) return;
        out.segment(term.out_pair * N, N) +=
            term.weight * term.factors->cwiseProduct(term.use_der ? rder : rval);
      });
    }
  return out;
}

std::vector<Eigen::VectorXd> trivial_vectors(const ChartedSystem& sys,
                                             const QuarticAnsatz& ansatz) {
  auto monos = monomials_upto(ansatz.m);
  auto harms = harmonics_upto(ansatz.M);
  int N = ansatz.N;
  Eigen::VectorXd y = extrema_nodes(N, ansatz.y_lo, ansatz.y_hi);
  Eigen::MatrixXd tval, tder;
  chebyshev_tables(N, ansatz.y_lo, ansatz.y_hi, tval, tder);
  Eigen::PartialPivLU<Eigen::MatrixXd> interp(tval);

  Eigen::VectorXd w1(N), w2(N), c(N);
  for (int i = 0; i < N; ++i) {
    ChartEval ce = eval_chart(sys, ansatz.chart, y[i]);
    w1[i] = 1.0 / ce.E1.v;
    w2[i] = 1.0 / ce.E2.v;
    c[i] = ce.C.v;
  }

  auto mono_id = [&](int j, int k) {
    for (size_t q = 0; q < monos.size(); ++q)
      if (monos[q].first == j && monos[q].second == k) return int(q);
    throw_validation("BAD_ANSATZ", "monomial outside the ansatz degree");
  };
  auto put = [&](Eigen::VectorXd& v, int j, int k, int cos_h, const Eigen::VectorXd& profile) {
    v.segment((mono_id(j, k) * int(harms.size()) + cos_h) * N, N) += interp.solve(profile);
  };

  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd ones = Eigen::VectorXd::Zero(ansatz.basis_size());
  ones[0] = 1;  // T_0 on the constant monomial: exact, image is exactly zero
  out.push_back(ones);

  if (ansatz.m >= 2) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(ansatz.basis_size());
    put(h, 2, 0, 0, 0.5 * w1);
    put(h, 0, 2, 0, 0.5 * w2);
    put(h, 0, 0, 1, c);
    out.push_back(h);
  }
  if (ansatz.m >= 4) {
    Eigen::VectorXd h2 = Eigen::VectorXd::Zero(ansatz.basis_size());
    put(h2, 4, 0, 0, 0.25 * w1.cwiseProduct(w1));
    put(h2, 2, 2, 0, 0.5 * w1.cwiseProduct(w2));
    put(h2, 0, 4, 0, 0.25 * w2.cwiseProduct(w2));
    put(h2, 2, 0, 1, w1.cwiseProduct(c));
    put(h2, 0, 2, 1, w2.cwiseProduct(c));
    put(h2, 0, 0, 0, 0.5 * c.cwiseProduct(c));
    put(h2, 0, 0, 2, 0.5 * c.cwiseProduct(c));
    out.push_back(h2);
  }
  return out;
}

namespace {

// embed a sector-block vector into full coefficient indexing
Eigen::VectorXd embed(const BracketOperator& op, int sector, const Eigen::VectorXd& v) {
  int N = op.ansatz().N;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(op.ansatz().basis_size());
  const std::vector<int>& pairs = op.sector_columns(sector);
  for (size_t p = 0; p < pairs.size(); ++p)
    full.segment(pairs[p] * N, N) = v.segment(int(p) * N, N);
  return full;
}

struct SectorSpectrum {
  std::vector<Real> sigma;               // ascending; the probed subset for normal
  std::vector<Eigen::VectorXd> vectors;  // right singular directions, same order
  Real sigma_max = 0;                    // largest of the whole sector spectrum
};

// exact dense spectrum of one sector; a tall block is first reduced to its
// triangular factor in place, which keeps singular values and right vectors
// while capping the factorization workspace at the column count
SectorSpectrum sector_svd(const BracketOperator& op, int sector) {
  SectorSpectrum out;
  Eigen::MatrixXd A = op.assemble(sector);
  if (A.cols() == 0) return out;
  if (double(A.rows()) * A.cols() > 6e7 && A.rows() > A.cols()) {
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(A);
    Eigen::MatrixXd R = qr.matrixQR()
                            .topRows(A.cols())
                            .triangularView<Eigen::Upper>();
    A = std::move(R);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  out.sigma_max = sv.size() ? sv[0] : 0;
  for (int i = sv.size() - 1; i >= 0; --i) {
    out.sigma.push_back(sv[i]);
    out.vectors.push_back(svd.matrixV().col(i));
  }
  return out;
}

// Triangular route for grids whose dense SVD would not fit: reduce the block
// to its QR triangle (same singular values and right vectors, no Gram
// squaring), invert-iterate through the triangle, then take Ritz values
// against the true operator.
SectorSpectrum sector_normal(const BracketOperator& op, int sector, Real threshold) {
  SectorSpectrum out;
  int N = op.ansatz().N;
  int cols = int(op.sector_columns(sector).size()) * N;
  if (cols == 0) return out;
  int rows_per_node = op.sector_rows(sector) / N;

  Eigen::MatrixXd R;
  if (double(rows_per_node) * N * cols <= 1.6e8) {
    Eigen::MatrixXd A = op.assemble(sector);
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(A);
    R = qr.matrixQR()
            .topRows(std::min<Eigen::Index>(A.rows(), cols))
            .triangularView<Eigen::Upper>();
  } else {
    // stack the running triangle over fresh node chunks and refactor
    int chunk = std::max<int>(1, int(6e7 / (std::max(1, rows_per_node) * double(cols))));
    for (int lo = 0; lo < N; lo += chunk) {
      int hi = std::min(N, lo + chunk);
      Eigen::MatrixXd A = op.assemble_nodes(sector, lo, hi);
      Eigen::MatrixXd S(R.rows() + A.rows(), cols);
      if (R.rows()) S.topRows(R.rows()) = R;
      S.bottomRows(A.rows()) = A;
      A.resize(0, 0);
      Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(S);
      R = qr.matrixQR()
              .topRows(std::min<Eigen::Index>(S.rows(), cols))
              .triangularView<Eigen::Upper>();
    }
  }

  std::mt19937_64 rng(777 + sector);
  std::normal_distribution<Real> gauss;
  Eigen::VectorXd v(cols);
  for (int i = 0; i < cols; ++i) v[i] = gauss(rng);
  v.normalize();
  Real smax = 0;
  for (int it = 0; it < 40; ++it) {
    v = R.transpose() * (R * v);
    Real n2 = v.norm();
    if (n2 == 0) break;
    smax = std::sqrt(n2);
    v /= n2;
  }
  if (smax == 0) return out;
  out.sigma_max = smax;

  // floor the diagonal at roundoff level so the solves stay finite; sigmas
  // resolvable above roundoff are unperturbed and the Ritz step reports them
  // against the true operator
  Real clamp = 1e-16 * smax;
  for (int i = 0; i < cols; ++i) {
    Real d = R(i, i);
    if (std::abs(d) < clamp) R(i, i) = d < 0 ? -clamp : clamp;
  }

  int block = std::min(cols, 16);
  for (;;) {
    Eigen::MatrixXd X(cols, block);
    std::mt19937_64 rng2(1234 + sector);
    for (int i = 0; i < cols; ++i)
      for (int b = 0; b < block; ++b) X(i, b) = gauss(rng2);
    for (int it = 0; it < 6; ++it) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
      X = qr.householderQ() * Eigen::MatrixXd::Identity(cols, block);
      R.transpose().triangularView<Eigen::Lower>().solveInPlace(X);
      R.triangularView<Eigen::Upper>().solveInPlace(X);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(cols, block);

    // Ritz step against the unsquared operator
    Eigen::VectorXd w0 = op.apply(embed(op, sector, X.col(0)));
    Eigen::MatrixXd W(w0.size(), block);
    W.col(0) = w0;
    for (int b = 1; b < block; ++b) W.col(b) = op.apply(embed(op, sector, X.col(b)));
    Eigen::BDCSVD<Eigen::MatrixXd> ritz(W, Eigen::ComputeThinV);
    Eigen::VectorXd sv = ritz.singularValues();
    Eigen::MatrixXd XR = X * ritz.matrixV();

    int below = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] < threshold * out.sigma_max) ++below;
    if (below == block && block < std::min(cols, 64)) {
      block = std::min(cols, block * 2);  // probe block saturated; widen it
      continue;
    }
    for (int i = sv.size() - 1; i >= 0; --i) {
      out.sigma.push_back(sv[i]);
      out.vectors.push_back(XR.col(i));
    }
    return out;
  }
}

}  // namespace

NullspaceReport find_integrals(const BracketOperator& op,
                               const std::vector<Eigen::VectorXd>& trivials, Real threshold,
                               NullspaceMethod method) {
  if (!(threshold > 0) || threshold >= 1)
    throw_validation("BAD_THRESHOLD", "relative cut must lie in (0, 1)");
  NullspaceReport rep;
  rep.method = method;

  struct Entry {
    Real sigma;
    int sector;
    int idx;
  };
  std::vector<Entry> entries;
  std::array<SectorSpectrum, 4> spec;
  for (int s = 0; s < 4; ++s) {
    spec[s] = method == NullspaceMethod::svd ? sector_svd(op, s)
                                             : sector_normal(op, s, threshold);
    rep.sigma_max = std::max(rep.sigma_max, spec[s].sigma_max);
    for (size_t i = 0; i < spec[s].sigma.size(); ++i)
      entries.push_back({spec[s].sigma[i], s, int(i)});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.sigma < b.sigma; });
  rep.threshold_used = threshold * rep.sigma_max;

  for (const Entry& e : entries) {
    rep.singular_values.push_back(e.sigma);
    if (e.sigma < rep.threshold_used) {
      ++rep.raw_dim;
      ++rep.sector_raw[e.sector];
      rep.kernel.push_back(embed(op, e.sector, spec[e.sector].vectors[e.idx]));
    }
  }
  if (rep.raw_dim == 0)
    rep.gap = std::numeric_limits<Real>::infinity();
  else if (rep.raw_dim >= int(entries.size()))
    rep.gap = 0;
  else
    rep.gap = entries[rep.raw_dim].sigma / entries[rep.raw_dim - 1].sigma;

  if (rep.raw_dim == 0) return rep;

  int full = op.ansatz().basis_size();
  Eigen::MatrixXd K(full, rep.raw_dim);
  for (int i = 0; i < rep.raw_dim; ++i) K.col(i) = rep.kernel[i];

  if (trivials.empty()) {
    for (int i = 0; i < rep.raw_dim; ++i) rep.new_integrals.push_back(K.col(i));
    rep.deflated_dim = rep.raw_dim;
    return rep;
  }

  Eigen::MatrixXd T(full, int(trivials.size()));
  for (size_t i = 0; i < trivials.size(); ++i) {
    if (trivials[i].size() != full)
      throw_validation("BAD_ANSATZ", "trivial vector does not match the basis size");
    T.col(int(i)) = trivials[i].normalized();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(T);
  Eigen::MatrixXd That = qr.householderQ() * Eigen::MatrixXd::Identity(full, T.cols());

  Eigen::MatrixXd D = K - That * (That.transpose() * K);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 0.5) {
      ++rep.deflated_dim;
      rep.new_integrals.push_back(svd.matrixU().col(i));
    }
  return rep;
}

Real certify(const QuarticAnsatz& ansatz, const Eigen::VectorXd& coeffs, const Trajectory& traj,
             std::uint64_t seed) {
  if (traj.samples.empty())
    throw_validation("BAD_TRAJECTORY", "certification needs a nonempty trajectory");
  Real p_max = 1;
  for (const TrajSample& smp : traj.samples) {
    if (smp.s.chart != ansatz.chart)
      throw_numerical("WINDOW_EXIT", "trajectory changed chart at t = " + fmt17(smp.t));
    if (smp.s.q2 < ansatz.y_lo || smp.s.q2 > ansatz.y_hi)
      throw_numerical("WINDOW_EXIT", "trajectory left the window at t = " + fmt17(smp.t));
    p_max = std::max({p_max, std::abs(smp.s.p1), std::abs(smp.s.p2)});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> uq1(0, 2 * M_PI), uy(ansatz.y_lo, ansatz.y_hi),
      up(-p_max, p_max);
  Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
  for (int i = 0; i < 64; ++i) {
    PhaseState s{ansatz.chart, uq1(rng), uy(rng), up(rng), up(rng)};
    Real F = eval_ansatz(ansatz, coeffs, s);
    lo = std::min(lo, F);
    hi = std::max(hi, F);
  }
  Real F0 = eval_ansatz(ansatz, coeffs, traj.samples.front().s);
  Real scale = std::max(std::abs(F0), hi - lo);
  if (scale == 0) return 0;

  Real drift = 0;
  for (const TrajSample& smp : traj.samples)
    drift = std::max(drift, std::abs(eval_ansatz(ansatz, coeffs, smp.s) - F0));
  return drift / scale;
}

}  // namespace qf
