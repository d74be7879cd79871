// Copyright 2026 The Divisio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "divisio/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace divisio::sdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

void SdpProblem::validate() const {
  auto check_block_ref = [&](int k, const HermitianOperator& h) {
    if (k < 0 || k >= static_cast<int>(block_dims.size()))
      throw DimensionMismatch("SdpProblem: block index out of range");
    if (h.dim() != block_dims[k])
      throw DimensionMismatch("SdpProblem: coefficient dimension mismatch on block " +
                              std::to_string(k));
  };
  auto check_scalar_ref = [&](int j) {
    if (j < 0 || j >= free_scalar_count)
      throw DimensionMismatch("SdpProblem: scalar index out of range");
  };
  for (int d : block_dims)
    if (d <= 0) throw DimensionMismatch("SdpProblem: nonpositive block dimension");
  for (const auto& [k, h] : objective_blocks) check_block_ref(k, h);
  for (const auto& [j, v] : objective_scalars) check_scalar_ref(j);
  for (const auto& con : constraints) {
    for (const auto& [k, h] : con.block_coeffs) check_block_ref(k, h);
    for (const auto& [j, v] : con.scalar_coeffs) check_scalar_ref(j);
    if (!std::isfinite(con.rhs)) throw Error("SdpProblem: non-finite rhs");
  }
}

RealMatrix embed_complex(const HermitianOperator& h) {
  const int n = h.dim();
  RealMatrix out(2 * n, 2 * n);
  const RealMatrix a = h.matrix().real();
  const RealMatrix b = h.matrix().imag();
  out.topLeftCorner(n, n) = a;
  out.bottomRightCorner(n, n) = a;
  out.topRightCorner(n, n) = -b;
  out.bottomLeftCorner(n, n) = b;
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Internal canonical form. Everything below works on real symmetric blocks:
//
//   minimize   sum_k <C_k, X_k> + c_f . f
//   s.t.       sum_k <A_{i,k}, X_k> + F_i . f = b_i,   X_k >= 0, f free,
//
// and runs the homogeneous self-dual model
//
//   A x + F f - b tau             = 0
//   -A^T y + c tau - s            = 0
//   -F^T y + c_f tau              = 0
//   b^T y - c^T x - c_f^T f - kappa = 0
//   x, s in PSD cone, tau, kappa >= 0,
//
// whose strict solutions either give an optimal pair (tau > 0) or an
// infeasibility certificate (kappa > 0).
// ---------------------------------------------------------------------------

struct Entry {
  int r, c;   // r <= c
  double v;   // symmetric matrix holds v at (r,c) and (c,r)
};

struct RowCoeff {
  int row;
  std::vector<Entry> entries;
};

struct InternalBlock {
  int n = 0;            // real symmetric dimension used by the solver
  int nc = 0;           // complex dimension in the public problem (0: real 1x1 slack)
  bool embedded = false;
  MatrixXd C;           // dense symmetric objective coefficient
  std::vector<RowCoeff> rows;  // constraint coefficients touching this block
};

double sparse_dot(const std::vector<Entry>& a, const MatrixXd& x) {
  double acc = 0.0;
  for (const auto& e : a)
    acc += (e.r == e.c) ? e.v * x(e.r, e.r) : 2.0 * e.v * x(e.r, e.c);
  return acc;
}

void add_scaled(MatrixXd& m, const std::vector<Entry>& a, double w) {
  for (const auto& e : a) {
    m(e.r, e.c) += w * e.v;
    if (e.r != e.c) m(e.c, e.r) += w * e.v;
  }
}

// Collects the nonzero entries of a real symmetric coefficient (upper part).
void collect_entries(const MatrixXd& m, std::vector<Entry>& out) {
  const int n = static_cast<int>(m.rows());
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c)
      if (m(r, c) != 0.0) out.push_back(Entry{r, c, m(r, c)});
}

struct InternalProblem {
  std::vector<InternalBlock> blocks;
  int n_public_blocks = 0;
  int p = 0;            // free scalar count
  MatrixXd F;           // m x p
  VectorXd c_f;         // p
  VectorXd b;           // m
  int m = 0;
  double obj_sign = 1.0;  // user value = obj_sign * internal value
  double barrier_nu = 0.0;
};

InternalProblem lower_problem(const SdpProblem& p) {
  p.validate();
  InternalProblem ip;
  ip.n_public_blocks = static_cast<int>(p.block_dims.size());
  ip.obj_sign = (p.sense == Sense::maximize) ? -1.0 : 1.0;
  const int n_ineq = static_cast<int>(
      std::count_if(p.constraints.begin(), p.constraints.end(),
                    [](const Constraint& c) { return c.relation == Relation::greater_equal; }));
  ip.m = static_cast<int>(p.constraints.size());
  ip.p = p.free_scalar_count;
  ip.b = VectorXd::Zero(ip.m);
  ip.F = MatrixXd::Zero(ip.m, ip.p);
  ip.c_f = VectorXd::Zero(ip.p);
  for (const auto& [j, v] : p.objective_scalars) ip.c_f(j) = ip.obj_sign * v;

  // A public block becomes a real block when every coefficient touching it is
  // real; otherwise it is embedded, H = A + iB |-> [[A,-B],[B,A]] / 2 so that
  // <coeff, X_embedded> = <H, X_complex> on embedded points.
  std::vector<bool> is_real(p.block_dims.size(), true);
  auto scan = [&](int k, const HermitianOperator& h) {
    if (h.matrix().imag().cwiseAbs().maxCoeff() > 0.0) is_real[k] = false;
  };
  for (const auto& [k, h] : p.objective_blocks) scan(k, h);
  for (const auto& con : p.constraints)
    for (const auto& [k, h] : con.block_coeffs) scan(k, h);

  ip.blocks.resize(p.block_dims.size() + n_ineq);
  for (size_t k = 0; k < p.block_dims.size(); ++k) {
    InternalBlock& blk = ip.blocks[k];
    blk.nc = p.block_dims[k];
    blk.embedded = !is_real[k];
    blk.n = blk.embedded ? 2 * blk.nc : blk.nc;
    blk.C = MatrixXd::Zero(blk.n, blk.n);
  }

  auto lowered_coeff = [&](int k, const HermitianOperator& h) -> MatrixXd {
    if (ip.blocks[k].embedded) return 0.5 * embed_complex(h);
    return h.matrix().real();
  };

  for (const auto& [k, h] : p.objective_blocks)
    ip.blocks[k].C = ip.obj_sign * lowered_coeff(k, h);

  int slack = static_cast<int>(p.block_dims.size());
  for (int i = 0; i < ip.m; ++i) {
    const Constraint& con = p.constraints[i];
    ip.b(i) = con.rhs;
    for (const auto& [j, v] : con.scalar_coeffs) ip.F(i, j) = v;
    for (const auto& [k, h] : con.block_coeffs) {
      RowCoeff rc;
      rc.row = i;
      collect_entries(lowered_coeff(k, h), rc.entries);
      if (!rc.entries.empty()) ip.blocks[k].rows.push_back(std::move(rc));
    }
    if (con.relation == Relation::greater_equal) {
      // expr - s = b with a fresh 1x1 slack.
      InternalBlock& blk = ip.blocks[slack];
      blk.n = 1;
      blk.nc = 0;
      blk.embedded = false;
      blk.C = MatrixXd::Zero(1, 1);
      blk.rows.push_back(RowCoeff{i, {Entry{0, 0, -1.0}}});
      ++slack;
    }
  }
  for (const auto& blk : ip.blocks) ip.barrier_nu += blk.n;
  return ip;
}

// Per-block Nesterov-Todd scaling: R with R^T s R = R^{-1} x R^{-T} = diag(lam).
struct NtScaling {
  MatrixXd R, Rinv, W;
  VectorXd lam;
};

bool compute_nt(const MatrixXd& x, const MatrixXd& s, NtScaling& nt) {
  Eigen::LLT<MatrixXd> lx(x);
  Eigen::LLT<MatrixXd> ls(s);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  const MatrixXd Lx = lx.matrixL();
  const MatrixXd Ls = ls.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  nt.lam = svd.singularValues();
  if (nt.lam.minCoeff() <= 0.0) return false;
  const VectorXd li = nt.lam.cwiseSqrt().cwiseInverse();
  nt.R = Lx * svd.matrixV() * li.asDiagonal();
  nt.Rinv = li.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
  nt.W = nt.R * nt.R.transpose();
  return true;
}

// Largest step alpha with x + alpha dx staying PSD; +inf when unconstrained.
double max_psd_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> lx(x);
  if (lx.info() != Eigen::Success) return 0.0;
  const MatrixXd L = lx.matrixL();
  MatrixXd t = L.triangularView<Eigen::Lower>().solve(dx);
  t = L.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (t + t.transpose()),
                                             Eigen::EigenvaluesOnly);
  const double mineig = es.eigenvalues()(0);
  if (mineig >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / mineig;
}

struct IterateState {
  std::vector<MatrixXd> x, s;
  VectorXd y, f;
  double tau = 1.0, kappa = 1.0;
};

class HsdSolver {
public:
  HsdSolver(const InternalProblem& ip, const SolveOptions& opts)
      : ip_(ip), opts_(opts), trace_(std::getenv("DIVISIO_SDP_TRACE") != nullptr) {}

  SolveStatus run();

  const IterateState& state() const { return st_; }
  double primal_internal() const { return pobj_; }
  double dual_internal() const { return dobj_; }
  double gap_rel() const { return gap_; }
  int iterations() const { return iter_; }

private:
  struct Direction {
    std::vector<MatrixXd> dx, ds;
    VectorXd dy, df;
    double dtau = 0.0, dkappa = 0.0;
  };

  // Right-hand sides of the six Newton equations:
  //   A dx + F df - b dtau                  = tp
  //   -A^T dy + C dtau - ds                 = td
  //   -F^T dy + c_f dtau                    = tf
  //   b^T dy - c^T dx - c_f^T df - dkappa   = tg
  //   lam o d_x + lam o d_s                 = tc   (NT-scaled space)
  //   tau dkappa + kappa dtau               = tt
  struct StepTargets {
    VectorXd tp, tf;
    std::vector<MatrixXd> td, tc;
    double tg = 0.0, tt = 0.0;
  };

  void compute_residuals();
  bool assemble_schur();
  bool solve_k0(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& df);
  bool newton_step(const StepTargets& t, Direction& dir);
  StepTargets path_targets(double sigma, const Direction* affine) const;
  bool refine_direction(const StepTargets& t, Direction& dir);
  double max_step(const Direction& dir) const;
  double score() const;
  double score_scaled() const;
  bool certificate_check(SolveStatus& status_out);

  const InternalProblem& ip_;
  SolveOptions opts_;
  bool trace_;
  IterateState st_;
  int nb_ = 0;
  int iter_ = 0;

  // residuals
  VectorXd r_P, r_F;
  std::vector<MatrixXd> r_D;
  double r_G = 0.0;
  double mu_ = 0.0;

  // per-iteration scaling and Schur data
  std::vector<NtScaling> nt_;
  std::vector<std::vector<MatrixXd>> sandwiches_;  // per block, per row: W A W
  std::vector<MatrixXd> wcw_;                      // per block: W C W
  MatrixXd m_, sf_;
  Eigen::LDLT<MatrixXd> schur_;
  MatrixXd t_f_;     // M^{-1} F
  Eigen::LDLT<MatrixXd> schur_f_;  // F^T M^{-1} F
  VectorXd h_;       // A W(C) + b
  VectorXd g_;       // b - A W(C)
  double cww_ = 0.0;
  VectorXd v2y_, v2f_;

  double pobj_ = 0.0, dobj_ = 0.0, gap_ = 1.0;
  double pres_ = 1.0, dres_ = 1.0;
  double bscale_ = 1.0, cscale_ = 1.0;
};

void HsdSolver::compute_residuals() {
  // r_P = A x + F f - b tau
  r_P = -st_.tau * ip_.b;
  if (ip_.p > 0) r_P += ip_.F * st_.f;
  for (int k = 0; k < nb_; ++k)
    for (const auto& rc : ip_.blocks[k].rows)
      r_P(rc.row) += sparse_dot(rc.entries, st_.x[k]);

  // r_D = C tau - A^T y - s  (per block)
  for (int k = 0; k < nb_; ++k) {
    r_D[k] = st_.tau * ip_.blocks[k].C - st_.s[k];
    for (const auto& rc : ip_.blocks[k].rows)
      add_scaled(r_D[k], rc.entries, -st_.y(rc.row));
  }

  // r_F = c_f tau - F^T y
  if (ip_.p > 0) r_F = st_.tau * ip_.c_f - ip_.F.transpose() * st_.y;

  // r_G = b^T y - c^T x - c_f^T f - kappa
  double cx = 0.0;
  for (int k = 0; k < nb_; ++k)
    cx += (ip_.blocks[k].C.array() * st_.x[k].array()).sum();
  if (ip_.p > 0) cx += ip_.c_f.dot(st_.f);
  r_G = ip_.b.dot(st_.y) - cx - st_.kappa;

  double xs = st_.tau * st_.kappa;
  for (int k = 0; k < nb_; ++k)
    xs += (st_.x[k].array() * st_.s[k].array()).sum();
  mu_ = xs / (ip_.barrier_nu + 1.0);

  pobj_ = cx / st_.tau;
  dobj_ = ip_.b.dot(st_.y) / st_.tau;
  gap_ = std::abs(pobj_ - dobj_) / (1.0 + std::abs(pobj_));
  pres_ = r_P.cwiseAbs().maxCoeff() / st_.tau;
  dres_ = 0.0;
  for (int k = 0; k < nb_; ++k)
    dres_ = std::max(dres_, r_D[k].cwiseAbs().maxCoeff());
  if (ip_.p > 0) dres_ = std::max(dres_, r_F.cwiseAbs().maxCoeff());
  dres_ /= st_.tau;
}

bool HsdSolver::assemble_schur() {
  const int m = ip_.m;
  MatrixXd M = MatrixXd::Zero(m, m);
  cww_ = 0.0;
  VectorXd awc = VectorXd::Zero(m);

  for (int k = 0; k < nb_; ++k) {
    const InternalBlock& blk = ip_.blocks[k];
    const MatrixXd& W = nt_[k].W;
    wcw_[k].noalias() = W * blk.C * W;
    cww_ += (blk.C.array() * wcw_[k].array()).sum();
    auto& sw = sandwiches_[k];
    sw.resize(blk.rows.size());
    for (size_t a = 0; a < blk.rows.size(); ++a) {
      // W A W with A sparse: A W has few nonzero rows, then one slim GEMM.
      const auto& entries = blk.rows[a].entries;
      MatrixXd aw = MatrixXd::Zero(blk.n, blk.n);
      for (const auto& e : entries) {
        aw.row(e.r) += e.v * W.row(e.c);
        if (e.r != e.c) aw.row(e.c) += e.v * W.row(e.r);
      }
      sw[a].noalias() = W * aw;
      awc(blk.rows[a].row) += (blk.C.array() * sw[a].array()).sum();
      for (size_t bi = 0; bi < blk.rows.size(); ++bi) {
        const int i = blk.rows[a].row;
        const int j = blk.rows[bi].row;
        if (j < i) continue;
        double v = 0.0;
        for (const auto& e : blk.rows[bi].entries)
          v += (e.r == e.c) ? e.v * sw[a](e.r, e.r) : 2.0 * e.v * sw[a](e.r, e.c);
        M(i, j) += v;
        if (i != j) M(j, i) += v;
      }
    }
  }

  h_ = awc + ip_.b;
  g_ = ip_.b - awc;

  // Relative jitter only; an absolute shift would swamp the system once the
  // scaling matrices grow large near convergence.
  M.diagonal() *= 1.0 + 1e-14;
  m_ = M;
  schur_.compute(M);
  if (schur_.info() != Eigen::Success) {
    M.diagonal() *= 1.0 + 1e-10;
    m_ = M;
    schur_.compute(M);
    if (schur_.info() != Eigen::Success) return false;
  }

  if (ip_.p > 0) {
    t_f_ = schur_.solve(ip_.F);
    MatrixXd sf = ip_.F.transpose() * t_f_;
    sf.diagonal() *= 1.0 + 1e-14;
    sf_ = sf;
    schur_f_.compute(sf);
    if (schur_f_.info() != Eigen::Success) return false;
  }

  // v2 = K0^{-1} [h; c_f], reused by every Newton solve this iteration.
  if (!solve_k0(h_, ip_.c_f, v2y_, v2f_)) return false;
  return true;
}

bool HsdSolver::solve_k0(const VectorXd& r1, const VectorXd& r2, VectorXd& dy,
                         VectorXd& df) {
  auto raw = [&](const VectorXd& a, const VectorXd& b, VectorXd& oy, VectorXd& of) {
    if (ip_.p == 0) {
      oy = schur_.solve(a);
      of.resize(0);
      return;
    }
    const VectorXd a0 = schur_.solve(a);
    of = schur_f_.solve(ip_.F.transpose() * a0 - b);
    oy = a0 - t_f_ * of;
  };
  raw(r1, r2, dy, df);
  // Two rounds of iterative refinement recover the digits the ill-conditioned
  // Schur factorization loses near the central-path endgame.
  for (int pass = 0; pass < 2; ++pass) {
    VectorXd res1 = r1 - m_ * dy;
    VectorXd res2;
    if (ip_.p > 0) {
      res1 -= ip_.F * df;
      res2 = r2 - ip_.F.transpose() * dy;
    }
    VectorXd cy, cf;
    raw(res1, res2, cy, cf);
    dy += cy;
    if (ip_.p > 0) df += cf;
  }
  return dy.allFinite() && (ip_.p == 0 || df.allFinite());
}

HsdSolver::StepTargets HsdSolver::path_targets(double sigma,
                                               const Direction* affine) const {
  // Mehrotra targets: shrink the linear residuals by (1 - sigma) and aim the
  // complementarity at sigma mu e minus the affine second-order correction.
  StepTargets t;
  const double oms = 1.0 - sigma;
  t.tp = -oms * r_P;
  if (ip_.p > 0) t.tf = -oms * r_F;
  t.tg = -oms * r_G;
  t.td.resize(nb_);
  t.tc.resize(nb_);
  for (int k = 0; k < nb_; ++k) {
    const NtScaling& nt = nt_[k];
    const int n = ip_.blocks[k].n;
    t.td[k] = -oms * r_D[k];
    MatrixXd e = MatrixXd::Zero(n, n);
    e.diagonal() = sigma * mu_ * VectorXd::Ones(n) -
                   nt.lam.array().square().matrix();
    if (affine != nullptr) {
      const MatrixXd dxa = nt.Rinv * affine->dx[k] * nt.Rinv.transpose();
      const MatrixXd dsa = nt.R.transpose() * affine->ds[k] * nt.R;
      e.noalias() -= 0.5 * (dxa * dsa + dsa * dxa);
    }
    t.tc[k] = 0.5 * (e + e.transpose()).eval();
  }
  const double corr_tau =
      (affine != nullptr) ? affine->dtau * affine->dkappa : 0.0;
  t.tt = sigma * mu_ - st_.tau * st_.kappa - corr_tau;
  return t;
}

bool HsdSolver::newton_step(const StepTargets& t, Direction& dir) {
  // Eliminate ds and dx: with Ehat = R^{-T} Lam^{-1}(tc) R^{-1},
  //   ds = Ehat - W^{-1} dx W^{-1},  dx = W (A^T dy - C dtau + q) W,
  // where q = Ehat + td, leaving the (dy, df, dtau) system on the Schur
  // complement M = A W(.) W A^T.
  std::vector<MatrixXd> q(nb_);
  VectorXd awq = VectorXd::Zero(ip_.m);
  double cwq = 0.0;
  for (int k = 0; k < nb_; ++k) {
    const NtScaling& nt = nt_[k];
    const int n = ip_.blocks[k].n;
    MatrixXd e = t.tc[k];
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) e(r, c) *= 2.0 / (nt.lam(r) + nt.lam(c));
    MatrixXd ehat = nt.Rinv.transpose() * e * nt.Rinv;
    q[k] = ehat + t.td[k];
    q[k] = 0.5 * (q[k] + q[k].transpose()).eval();
    for (size_t a = 0; a < ip_.blocks[k].rows.size(); ++a)
      awq(ip_.blocks[k].rows[a].row) +=
          (sandwiches_[k][a].array() * q[k].array()).sum();
    cwq += (wcw_[k].array() * q[k].array()).sum();
  }

  VectorXd r1 = t.tp - awq;
  VectorXd r2 = (ip_.p > 0) ? VectorXd(-t.tf) : VectorXd();
  VectorXd v1y, v1f;
  if (!solve_k0(r1, r2, v1y, v1f)) return false;

  const double rhs3 = t.tg + t.tt / st_.tau + cwq;
  double denom = g_.dot(v2y_) + cww_ + st_.kappa / st_.tau;
  double num = rhs3 - g_.dot(v1y);
  if (ip_.p > 0) {
    denom -= ip_.c_f.dot(v2f_);
    num += ip_.c_f.dot(v1f);
  }
  if (!(std::abs(denom) > 1e-300)) return false;
  dir.dtau = num / denom;
  dir.dy = v1y + dir.dtau * v2y_;
  if (ip_.p > 0) dir.df = v1f + dir.dtau * v2f_;
  else dir.df.resize(0);

  dir.dx.resize(nb_);
  dir.ds.resize(nb_);
  for (int k = 0; k < nb_; ++k) {
    MatrixXd aty = MatrixXd::Zero(ip_.blocks[k].n, ip_.blocks[k].n);
    for (const auto& rc : ip_.blocks[k].rows)
      add_scaled(aty, rc.entries, dir.dy(rc.row));
    const MatrixXd g = aty - dir.dtau * ip_.blocks[k].C + q[k];
    dir.dx[k].noalias() = nt_[k].W * g * nt_[k].W;
    dir.dx[k] = 0.5 * (dir.dx[k] + dir.dx[k].transpose()).eval();
    dir.ds[k] = dir.dtau * ip_.blocks[k].C - aty - t.td[k];
  }
  dir.dkappa = (t.tt - st_.kappa * dir.dtau) / st_.tau;
  return true;
}

bool HsdSolver::refine_direction(const StepTargets& t, Direction& dir) {
  // One pass of iterative refinement on the full Newton system; the reduced
  // solve loses accuracy through W once the iterates approach the boundary.
  StepTargets r;
  // tp residual: tp - (A dx + F df - b dtau).
  r.tp = t.tp + ip_.b * dir.dtau;
  if (ip_.p > 0) r.tp -= ip_.F * dir.df;
  for (int k = 0; k < nb_; ++k)
    for (const auto& rc : ip_.blocks[k].rows)
      r.tp(rc.row) -= sparse_dot(rc.entries, dir.dx[k]);

  if (ip_.p > 0)
    r.tf = t.tf - (-ip_.F.transpose() * dir.dy + ip_.c_f * dir.dtau);

  double cdx = 0.0;
  for (int k = 0; k < nb_; ++k)
    cdx += (ip_.blocks[k].C.array() * dir.dx[k].array()).sum();
  if (ip_.p > 0) cdx += ip_.c_f.dot(dir.df);
  r.tg = t.tg -
         (ip_.b.dot(dir.dy) - cdx - dir.dkappa);

  r.td.resize(nb_);
  r.tc.resize(nb_);
  for (int k = 0; k < nb_; ++k) {
    const NtScaling& nt = nt_[k];
    MatrixXd aty = MatrixXd::Zero(ip_.blocks[k].n, ip_.blocks[k].n);
    for (const auto& rc : ip_.blocks[k].rows)
      add_scaled(aty, rc.entries, dir.dy(rc.row));
    r.td[k] = t.td[k] - (-aty + dir.dtau * ip_.blocks[k].C - dir.ds[k]);
    const MatrixXd dxs = nt.Rinv * dir.dx[k] * nt.Rinv.transpose();
    const MatrixXd dss = nt.R.transpose() * dir.ds[k] * nt.R;
    MatrixXd lhs = 0.5 * (nt.lam.asDiagonal() * (dxs + dss) +
                          (dxs + dss) * nt.lam.asDiagonal());
    r.tc[k] = t.tc[k] - 0.5 * (lhs + lhs.transpose());
  }
  r.tt = t.tt - (st_.tau * dir.dkappa + st_.kappa * dir.dtau);

  Direction corr;
  if (!newton_step(r, corr)) return false;
  for (int k = 0; k < nb_; ++k) {
    dir.dx[k] += corr.dx[k];
    dir.ds[k] += corr.ds[k];
  }
  dir.dy += corr.dy;
  if (ip_.p > 0) dir.df += corr.df;
  dir.dtau += corr.dtau;
  dir.dkappa += corr.dkappa;
  return true;
}

double HsdSolver::max_step(const Direction& dir) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nb_; ++k) {
    alpha = std::min(alpha, max_psd_step(st_.x[k], dir.dx[k]));
    alpha = std::min(alpha, max_psd_step(st_.s[k], dir.ds[k]));
  }
  if (dir.dtau < 0.0) alpha = std::min(alpha, -st_.tau / dir.dtau);
  if (dir.dkappa < 0.0) alpha = std::min(alpha, -st_.kappa / dir.dkappa);
  return alpha;
}

double HsdSolver::score() const {
  const double ftol = opts_.feasibility_tolerance;
  return std::max({pres_ / ftol, dres_ / ftol, gap_ / opts_.gap_tolerance});
}

// Relaxed variant for badly scaled data: residuals relative to the data norm.
double HsdSolver::score_scaled() const {
  const double ftol = opts_.feasibility_tolerance;
  return std::max({pres_ / (ftol * bscale_), dres_ / (ftol * cscale_),
                   gap_ / opts_.gap_tolerance});
}

bool HsdSolver::certificate_check(SolveStatus& status_out) {
  // Primal infeasibility: y with b.y > 0 and -A^T y (PSD) certified by the
  // iterate's s; residual of A^T y + s measured against b.y.
  const double by = ip_.b.dot(st_.y);
  if (by > 1e-12 * bscale_) {
    double res = 0.0;
    for (int k = 0; k < nb_; ++k) {
      MatrixXd aty = MatrixXd::Zero(ip_.blocks[k].n, ip_.blocks[k].n);
      for (const auto& rc : ip_.blocks[k].rows)
        add_scaled(aty, rc.entries, st_.y(rc.row));
      res = std::max(res, (aty + st_.s[k]).cwiseAbs().maxCoeff());
    }
    if (ip_.p > 0)
      res = std::max(res, (ip_.F.transpose() * st_.y).cwiseAbs().maxCoeff());
    if (res <= 1e-7 * by) {
      status_out = SolveStatus::PrimalInfeasible;
      return true;
    }
  }
  // Dual infeasibility: improving primal ray, c.x < 0 with A x + F f ~ 0.
  double cx = 0.0;
  for (int k = 0; k < nb_; ++k)
    cx += (ip_.blocks[k].C.array() * st_.x[k].array()).sum();
  if (ip_.p > 0) cx += ip_.c_f.dot(st_.f);
  if (cx < -1e-12 * cscale_) {
    VectorXd ax = VectorXd::Zero(ip_.m);
    if (ip_.p > 0) ax += ip_.F * st_.f;
    for (int k = 0; k < nb_; ++k)
      for (const auto& rc : ip_.blocks[k].rows)
        ax(rc.row) += sparse_dot(rc.entries, st_.x[k]);
    if (ax.cwiseAbs().maxCoeff() <= 1e-7 * (-cx)) {
      status_out = SolveStatus::DualInfeasible;
      return true;
    }
  }
  return false;
}

SolveStatus HsdSolver::run() {
  nb_ = static_cast<int>(ip_.blocks.size());
  st_.x.resize(nb_);
  st_.s.resize(nb_);
  for (int k = 0; k < nb_; ++k) {
    st_.x[k] = MatrixXd::Identity(ip_.blocks[k].n, ip_.blocks[k].n);
    st_.s[k] = MatrixXd::Identity(ip_.blocks[k].n, ip_.blocks[k].n);
  }
  st_.y = VectorXd::Zero(ip_.m);
  st_.f = VectorXd::Zero(ip_.p);
  st_.tau = 1.0;
  st_.kappa = 1.0;
  r_D.resize(nb_);
  nt_.resize(nb_);
  sandwiches_.resize(nb_);
  wcw_.assign(nb_, MatrixXd());

  bscale_ = 1.0 + ip_.b.cwiseAbs().maxCoeff();
  cscale_ = 1.0;
  for (const auto& blk : ip_.blocks)
    if (blk.n > 0 && blk.C.size() > 0)
      cscale_ = std::max(cscale_, blk.C.cwiseAbs().maxCoeff());
  if (ip_.p > 0 && ip_.c_f.size() > 0)
    cscale_ = std::max(cscale_, ip_.c_f.cwiseAbs().maxCoeff());
  cscale_ += 1.0;

  SolveStatus cert = SolveStatus::NumericalFailure;
  IterateState best = st_;
  double best_score = std::numeric_limits<double>::infinity();
  double mu_prev = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (iter_ = 0; iter_ < opts_.max_iterations; ++iter_) {
    compute_residuals();
    if (trace_) {
      std::fprintf(stderr,
                   "[sdp] it=%3d mu=%9.2e gap=%9.2e pres=%9.2e dres=%9.2e "
                   "tau=%8.2e kappa=%8.2e\n",
                   iter_, mu_, gap_, pres_, dres_, st_.tau, st_.kappa);
    }
    if (score() < best_score) {
      best_score = score();
      best = st_;
    }
    if (score() <= 1.0) return SolveStatus::Optimal;
    if (certificate_check(cert)) return cert;
    // The endgame of the iteration cannot improve once the Schur system is
    // exhausted in double precision; stop rather than bounce around.
    stalls = (mu_ > 0.9 * mu_prev) ? stalls + 1 : 0;
    mu_prev = mu_;
    if (stalls >= 6) break;

    bool ok = true;
    for (int k = 0; k < nb_; ++k)
      if (!compute_nt(st_.x[k], st_.s[k], nt_[k])) ok = false;
    if (!ok || !assemble_schur()) break;

    Direction aff;
    if (!newton_step(path_targets(0.0, nullptr), aff)) break;
    const double alpha_aff = std::min(1.0, max_step(aff));

    // Mehrotra centering from the affine trial point.
    double xs_aff = (st_.tau + alpha_aff * aff.dtau) *
                    (st_.kappa + alpha_aff * aff.dkappa);
    for (int k = 0; k < nb_; ++k)
      xs_aff += ((st_.x[k] + alpha_aff * aff.dx[k]).array() *
                 (st_.s[k] + alpha_aff * aff.ds[k]).array())
                    .sum();
    const double mu_aff = xs_aff / (ip_.barrier_nu + 1.0);
    double sigma = std::pow(std::max(0.0, mu_aff / mu_), 3);
    sigma = std::min(std::max(sigma, 1e-8), 1.0 - 1e-8);

    Direction dir;
    const StepTargets targets = path_targets(sigma, &aff);
    if (!newton_step(targets, dir)) break;
    refine_direction(targets, dir);
    double alpha = std::min(1.0, 0.98 * max_step(dir));
    if (alpha < 1e-12) break;

    for (int k = 0; k < nb_; ++k) {
      st_.x[k] += alpha * dir.dx[k];
      st_.s[k] += alpha * dir.ds[k];
    }
    st_.y += alpha * dir.dy;
    if (ip_.p > 0) st_.f += alpha * dir.df;
    st_.tau += alpha * dir.dtau;
    st_.kappa += alpha * dir.dkappa;
  }
  st_ = best;
  compute_residuals();
  if (score() <= 1.0) return SolveStatus::Optimal;
  if (certificate_check(cert)) return cert;
  return SolveStatus::NumericalFailure;
}

// Projects an embedded real solution block back to a complex Hermitian one.
HermitianOperator extract_complex(const MatrixXd& xe, int nc, bool embedded) {
  if (!embedded) {
    const MatrixXd sym = 0.5 * (xe + xe.transpose());
    return HermitianOperator(sym.cast<std::complex<double>>(), 1e-6);
  }
  // Average with J X J^T (J = [[0,-I],[I,0]]) to land exactly on the
  // embedded subspace, then read off real and imaginary parts.
  const int n = nc;
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = MatrixXd::Identity(n, n);
  const MatrixXd p = 0.25 * (xe + xe.transpose() + j * (xe + xe.transpose()) * j.transpose());
  ComplexMatrix out =
      p.topLeftCorner(n, n).cast<std::complex<double>>() +
      std::complex<double>(0, 1) * p.bottomLeftCorner(n, n).cast<std::complex<double>>();
  return HermitianOperator(out, 1e-6);
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolveOptions& opts) {
  const InternalProblem ip = lower_problem(p);
  HsdSolver solver(ip, opts);
  SdpSolution sol;
  sol.status = solver.run();
  sol.iterations = solver.iterations();
  const IterateState& st = solver.state();

  if (sol.status == SolveStatus::Optimal) {
    for (int k = 0; k < ip.n_public_blocks; ++k)
      sol.primal_blocks.push_back(extract_complex(
          st.x[k] / st.tau, ip.blocks[k].nc, ip.blocks[k].embedded));
    sol.scalar_values.assign(st.f.data(), st.f.data() + st.f.size());
    for (auto& v : sol.scalar_values) v /= st.tau;
    sol.dual_multipliers.resize(ip.m);
    for (int i = 0; i < ip.m; ++i)
      sol.dual_multipliers[i] = ip.obj_sign * st.y(i) / st.tau;
    sol.primal_value = ip.obj_sign * solver.primal_internal();
    sol.dual_value = ip.obj_sign * solver.dual_internal();
    sol.gap = solver.gap_rel();
  } else if (sol.status == SolveStatus::PrimalInfeasible) {
    const double by = ip.b.dot(st.y);
    sol.dual_multipliers.resize(ip.m);
    for (int i = 0; i < ip.m; ++i) sol.dual_multipliers[i] = st.y(i) / by;
  } else if (sol.status == SolveStatus::DualInfeasible) {
    double cx = 0.0;
    for (int k = 0; k < static_cast<int>(ip.blocks.size()); ++k)
      cx += (ip.blocks[k].C.array() * st.x[k].array()).sum();
    if (ip.p > 0) cx += ip.c_f.dot(st.f);
    const double scale = -cx;
    for (int k = 0; k < ip.n_public_blocks; ++k)
      sol.primal_blocks.push_back(extract_complex(
          st.x[k] / scale, ip.blocks[k].nc, ip.blocks[k].embedded));
    sol.scalar_values.assign(st.f.data(), st.f.data() + st.f.size());
    for (auto& v : sol.scalar_values) v /= scale;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// JSON debug dump / load
// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const HermitianOperator& h) {
  nlohmann::json rows = nlohmann::json::array();
  const ComplexMatrix& m = h.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

HermitianOperator matrix_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  ComplexMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m(r, c) = std::complex<double>(j[r][c][0].get<double>(),
                                     j[r][c][1].get<double>());
  return HermitianOperator(m, 1e-6);
}

}  // namespace

void dump_problem(const SdpProblem& p, const std::string& path) {
  nlohmann::json j;
  j["blocks"] = p.block_dims;
  j["free_scalars"] = p.free_scalar_count;
  j["sense"] = (p.sense == Sense::maximize) ? "maximize" : "minimize";
  nlohmann::json obj;
  for (const auto& [k, h] : p.objective_blocks)
    obj["block_" + std::to_string(k)] = matrix_to_json(h);
  for (const auto& [k, v] : p.objective_scalars)
    obj["scalar_" + std::to_string(k)] = v;
  j["objective"] = std::move(obj);
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : p.constraints) {
    nlohmann::json jc;
    for (const auto& [k, h] : c.block_coeffs)
      jc["blocks"]["block_" + std::to_string(k)] = matrix_to_json(h);
    for (const auto& [k, v] : c.scalar_coeffs)
      jc["scalars"]["scalar_" + std::to_string(k)] = v;
    jc["rhs"] = c.rhs;
    jc["relation"] = (c.relation == Relation::equality) ? "eq" : "ge";
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  std::ofstream out(path);
  if (!out) throw Error("dump_problem: cannot open " + path);
  out << j.dump(1) << "\n";
}

SdpProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_problem: cannot open " + path);
  nlohmann::json j;
  in >> j;
  SdpProblem p;
  p.block_dims = j["blocks"].get<std::vector<int>>();
  p.free_scalar_count = j["free_scalars"].get<int>();
  p.sense = (j["sense"].get<std::string>() == "maximize") ? Sense::maximize
                                                          : Sense::minimize;
  for (auto& [key, val] : j["objective"].items()) {
    if (key.rfind("block_", 0) == 0)
      p.objective_blocks.emplace(std::stoi(key.substr(6)), matrix_from_json(val));
    else
      p.objective_scalars[std::stoi(key.substr(7))] = val.get<double>();
  }
  for (const auto& jc : j["constraints"]) {
    Constraint c;
    if (jc.contains("blocks"))
      for (auto& [key, val] : jc["blocks"].items())
        c.block_coeffs.emplace(std::stoi(key.substr(6)), matrix_from_json(val));
    if (jc.contains("scalars"))
      for (auto& [key, val] : jc["scalars"].items())
        c.scalar_coeffs[std::stoi(key.substr(7))] = val.get<double>();
    c.rhs = jc["rhs"].get<double>();
    c.relation = (jc["relation"].get<std::string>() == "eq")
                     ? Relation::equality
                     : Relation::greater_equal;
    p.constraints.push_back(std::move(c));
  }
  return p;
}

}  // namespace divisio::sdp
