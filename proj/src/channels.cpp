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

#include "divisio/channels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace divisio::channels {

namespace {

constexpr double kKrausCompletenessTol = 1e-6;
constexpr double kInvertSingularValueTol = 1e-10;

int checked_choi_dim(int din, int dout, const HermitianOperator& c) {
  if (din <= 0 || dout <= 0)
    throw DimensionMismatch("Channel: nonpositive dimension");
  if (c.dim() != din * dout)
    throw DimensionMismatch("Channel: choi dimension " + std::to_string(c.dim()) +
                            " != dim_in * dim_out");
  return c.dim();
}

ComplexMatrix pauli_x() {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

ComplexMatrix pauli_y() {
  ComplexMatrix y(2, 2);
  y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return y;
}

ComplexMatrix pauli_z() {
  ComplexMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

}  // namespace

Channel::Channel(int din, int dout, HermitianOperator c)
    : dim_in(din), dim_out(dout), choi(std::move(c)) {
  checked_choi_dim(dim_in, dim_out, choi);
}

double KrausSet::completeness_error() const {
  ComplexMatrix acc = ComplexMatrix::Zero(dim_in, dim_in);
  for (const auto& k : operators) {
    if (k.rows() != dim_out || k.cols() != dim_in)
      throw DimensionMismatch("KrausSet: operator shape mismatch");
    acc += k.adjoint() * k;
  }
  return (acc - ComplexMatrix::Identity(dim_in, dim_in)).cwiseAbs().maxCoeff();
}

Channel choi_from_kraus(const KrausSet& k) {
  const double err = k.completeness_error();
  if (err > kKrausCompletenessTol)
    throw IncompleteKraus("choi_from_kraus: completeness violated by " +
                          std::to_string(err));
  const int d = k.dim_in * k.dim_out;
  ComplexMatrix choi = ComplexMatrix::Zero(d, d);
  // choi = sum_a v_a v_a^dag with v_a[(i,b)] = K_a[b,i].
  for (const auto& op : k.operators) {
    matlin::ComplexVector v(d);
    for (int i = 0; i < k.dim_in; ++i)
      for (int b = 0; b < k.dim_out; ++b) v(i * k.dim_out + b) = op(b, i);
    choi += v * v.adjoint();
  }
  return Channel(k.dim_in, k.dim_out, HermitianOperator(choi));
}

ComplexMatrix apply(const Channel& c, const ComplexMatrix& op) {
  if (op.rows() != c.dim_in || op.cols() != c.dim_in)
    throw DimensionMismatch("apply: state dimension mismatch");
  const ComplexMatrix& choi = c.choi.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(c.dim_out, c.dim_out);
  for (int i = 0; i < c.dim_in; ++i)
    for (int k = 0; k < c.dim_in; ++k) {
      const Complex w = op(i, k);
      if (w == Complex(0, 0)) continue;
      out += w * choi.block(i * c.dim_out, k * c.dim_out, c.dim_out, c.dim_out);
    }
  return out;
}

HermitianOperator apply(const Channel& c, const HermitianOperator& state) {
  return HermitianOperator(apply(c, state.matrix()), 1e-7);
}

Channel compose(const Channel& later, const Channel& earlier) {
  if (earlier.dim_out != later.dim_in)
    throw DimensionMismatch("compose: chained dimensions do not match");
  const int d0 = earlier.dim_in;
  const int d1 = earlier.dim_out;
  const int d2 = later.dim_out;
  const ComplexMatrix& a = earlier.choi.matrix();  // on H0 (x) H1
  const ComplexMatrix& b = later.choi.matrix();    // on H1 (x) H2
  // Contraction form of Tr_1[(1 (x) b)^{T_1} (a (x) 1)]:
  //   out[(p,q),(p',q')] = sum_{k,l} a[(p,k),(p',l)] b[(k,q),(l,q')].
  ComplexMatrix out = ComplexMatrix::Zero(d0 * d2, d0 * d2);
  for (int p = 0; p < d0; ++p)
    for (int pp = 0; pp < d0; ++pp)
      for (int k = 0; k < d1; ++k)
        for (int l = 0; l < d1; ++l) {
          const Complex w = a(p * d1 + k, pp * d1 + l);
          if (w == Complex(0, 0)) continue;
          out.block(p * d2, pp * d2, d2, d2) +=
              w * b.block(k * d2, l * d2, d2, d2);
        }
  return Channel(d0, d2, HermitianOperator(out, 1e-7));
}

CptpReport is_cptp(const Channel& c, double tol) {
  const double min_eig = matlin::min_eigenvalue(c.choi);
  const ComplexMatrix marginal =
      matlin::partial_trace(c.choi.matrix(), c.shape(), 1);
  const double tp_dev =
      (marginal - ComplexMatrix::Identity(c.dim_in, c.dim_in))
          .cwiseAbs()
          .maxCoeff();
  const bool cp = min_eig >= -tol;
  const bool tp = tp_dev <= tol;
  CptpVerdict v = cp ? (tp ? CptpVerdict::cptp : CptpVerdict::not_tp)
                     : (tp ? CptpVerdict::not_cp : CptpVerdict::neither);
  return CptpReport{v, min_eig, tp_dev};
}

Channel identity_channel(int d) {
  if (d <= 0) throw DimensionMismatch("identity_channel: d <= 0");
  ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) choi(i * d + i, j * d + j) = 1.0;
  return Channel(d, d, HermitianOperator(choi));
}

Channel unitary_channel(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) throw DimensionMismatch("unitary_channel: nonsquare");
  KrausSet k{static_cast<int>(u.cols()), static_cast<int>(u.rows()), {u}};
  return choi_from_kraus(k);
}

Channel pauli_channel(double p_i, double p_x, double p_y, double p_z) {
  const double sum = p_i + p_x + p_y + p_z;
  if (p_i < 0 || p_x < 0 || p_y < 0 || p_z < 0 || std::abs(sum - 1.0) > 1e-12)
    throw InvalidDistribution("pauli_channel: probabilities must be >= 0 and sum to 1");
  KrausSet k{2, 2, {}};
  if (p_i > 0) k.operators.push_back(std::sqrt(p_i) * ComplexMatrix::Identity(2, 2));
  if (p_x > 0) k.operators.push_back(std::sqrt(p_x) * pauli_x());
  if (p_y > 0) k.operators.push_back(std::sqrt(p_y) * pauli_y());
  if (p_z > 0) k.operators.push_back(std::sqrt(p_z) * pauli_z());
  if (k.operators.empty())
    throw InvalidDistribution("pauli_channel: all probabilities zero");
  return choi_from_kraus(k);
}

std::pair<Channel, Channel> collisional_pair(double p) {
  if (p < 0.0 || p > 1.0) throw OutOfRange("collisional_pair: p must be in [0,1]");
  Channel first = pauli_channel(1.0 - p, p / 2.0, 0.0, p / 2.0);
  const double stay = (1.0 - p) * (1.0 - p) + p * p;
  const double flip = p * (1.0 - p);
  Channel second = pauli_channel(stay, flip, 0.0, flip);
  return {std::move(first), std::move(second)};
}

double dephasing_probability(double t) {
  const double e4 = std::exp(4.0);
  return e4 * (1.0 - std::exp(-2.0 * (1.0 - std::cos(t)))) / (e4 - 1.0);
}

Channel dephasing_t(double t) {
  const double p = dephasing_probability(t);
  return pauli_channel(1.0 - p / 2.0, 0.0, 0.0, p / 2.0);
}

Channel dephasing_hd(int d, double p) {
  if (d < 2) throw OutOfRange("dephasing_hd: d must be >= 2");
  if (p < 0.0 || p > 1.0) throw OutOfRange("dephasing_hd: p must be in [0,1]");
  // Off-diagonal Choi blocks scale by (1-p), diagonal blocks are intact.
  Channel id = identity_channel(d);
  ComplexMatrix choi = id.choi.matrix();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) choi.block(i * d, j * d, d, d) *= (1.0 - p);
  return Channel(d, d, HermitianOperator(choi));
}

ComplexMatrix haar_unitary(int d, Rng& rng) {
  if (d < 1) throw DimensionMismatch("haar_unitary: d must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the gauge so the distribution is Haar, not QR-dependent.
  for (int j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= (a > 0) ? rjj / a : Complex(1, 0);
  }
  return q;
}

Channel unitary_mixture(int d, int n, Rng& rng) {
  if (n < 1) throw OutOfRange("unitary_mixture: n must be >= 1");
  KrausSet k{d, d, {}};
  const double w = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) k.operators.push_back(w * haar_unitary(d, rng));
  return choi_from_kraus(k);
}

Channel random_cptp(int dim_in, int dim_out, int kraus_count, Rng& rng) {
  if (kraus_count < 1) throw OutOfRange("random_cptp: kraus_count must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ComplexMatrix> raw;
  ComplexMatrix acc = ComplexMatrix::Zero(dim_in, dim_in);
  for (int a = 0; a < kraus_count; ++a) {
    ComplexMatrix g(dim_out, dim_in);
    for (int i = 0; i < dim_out; ++i)
      for (int j = 0; j < dim_in; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    acc += g.adjoint() * g;
    raw.push_back(std::move(g));
  }
  // Normalize: K_a = G_a * acc^{-1/2} gives sum K^dag K = 1.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(acc);
  ComplexMatrix inv_sqrt = es.operatorInverseSqrt();
  KrausSet k{dim_in, dim_out, {}};
  for (auto& g : raw) k.operators.push_back(g * inv_sqrt);
  return choi_from_kraus(k);
}

ComplexMatrix transfer_matrix(const Channel& c) {
  const ComplexMatrix& choi = c.choi.matrix();
  const int din = c.dim_in;
  const int dout = c.dim_out;
  ComplexMatrix t(dout * dout, din * din);
  // N(rho)[b,b'] = sum_{ik} choi[(i,b),(k,b')] rho[i,k].
  for (int b = 0; b < dout; ++b)
    for (int bp = 0; bp < dout; ++bp)
      for (int i = 0; i < din; ++i)
        for (int k = 0; k < din; ++k)
          t(b * dout + bp, i * din + k) = choi(i * dout + b, k * dout + bp);
  return t;
}

std::optional<Channel> try_invert(const Channel& c) {
  if (c.dim_in != c.dim_out)
    throw DimensionMismatch("try_invert: requires dim_in == dim_out");
  const int d = c.dim_in;
  const ComplexMatrix t = transfer_matrix(c);
  Eigen::JacobiSVD<ComplexMatrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(svd.singularValues().size() - 1) <
      kInvertSingularValueTol)
    return std::nullopt;
  const ComplexMatrix tinv = svd.solve(ComplexMatrix::Identity(d * d, d * d));
  ComplexMatrix choi(d * d, d * d);
  for (int b = 0; b < d; ++b)
    for (int bp = 0; bp < d; ++bp)
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          choi(i * d + b, k * d + bp) = tinv(b * d + bp, i * d + k);
  return Channel(d, d, HermitianOperator(choi, 1e-7));
}

Channel combine(double wa, const Channel& a, double wb, const Channel& b) {
  if (a.dim_in != b.dim_in || a.dim_out != b.dim_out)
    throw DimensionMismatch("combine: channel dimensions differ");
  return Channel(a.dim_in, a.dim_out,
                 HermitianOperator(wa * a.choi.matrix() + wb * b.choi.matrix()));
}

Channel difference(const Channel& a, const Channel& b) {
  return combine(1.0, a, -1.0, b);
}

}  // namespace divisio::channels
