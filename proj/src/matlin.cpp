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

#include "divisio/matlin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numeric>

namespace divisio::matlin {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(const ComplexMatrix& m, double reject_tol) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("HermitianOperator: matrix must be square");
  if (m.rows() == 0) throw DimensionMismatch("HermitianOperator: empty matrix");
  if (!all_finite(m))
    throw Error("HermitianOperator: non-finite entries");
  const double defect = hermiticity_defect(m);
  if (defect > reject_tol)
    throw AsymmetryError("HermitianOperator: asymmetry " + std::to_string(defect) +
                         " exceeds threshold " + std::to_string(reject_tol));
  mat_ = 0.5 * (m + m.adjoint().eval());
}

HermitianOperator HermitianOperator::identity(int dim) {
  return HermitianOperator(ComplexMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zeros(int dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

int SubsystemShape::total() const {
  int p = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionMismatch("SubsystemShape: nonpositive dimension");
    p *= d;
  }
  return p;
}

void SubsystemShape::check_matches(int dim) const {
  if (total() != dim)
    throw DimensionMismatch("SubsystemShape: product " + std::to_string(total()) +
                            " does not match operator dimension " +
                            std::to_string(dim));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

// Row/column indices factor as i = pre * (d * post) + k * post + rest, where
// d is the dimension of the selected subsystem.
struct SplitIndex {
  int before;  // product of dims left of `which`
  int d;       // dims[which]
  int after;   // product of dims right of `which`
};

SplitIndex split(const SubsystemShape& shape, int which, int dim) {
  shape.check_matches(dim);
  if (which < 0 || which >= static_cast<int>(shape.dims.size()))
    throw DimensionMismatch("subsystem index out of range");
  SplitIndex s{1, shape.dims[which], 1};
  for (int k = 0; k < which; ++k) s.before *= shape.dims[k];
  for (int k = which + 1; k < static_cast<int>(shape.dims.size()); ++k)
    s.after *= shape.dims[k];
  return s;
}

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemShape& shape,
                            int which) {
  if (m.rows() != m.cols()) throw DimensionMismatch("partial_trace: nonsquare");
  const SplitIndex s = split(shape, which, static_cast<int>(m.rows()));
  const int out_dim = s.before * s.after;
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (int rb = 0; rb < s.before; ++rb)
    for (int ra = 0; ra < s.after; ++ra)
      for (int cb = 0; cb < s.before; ++cb)
        for (int ca = 0; ca < s.after; ++ca) {
          Complex acc = 0.0;
          for (int k = 0; k < s.d; ++k) {
            const int r = (rb * s.d + k) * s.after + ra;
            const int c = (cb * s.d + k) * s.after + ca;
            acc += m(r, c);
          }
          out(rb * s.after + ra, cb * s.after + ca) = acc;
        }
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& m,
                                const SubsystemShape& shape, int which) {
  return HermitianOperator(partial_trace(m.matrix(), shape, which));
}

ComplexMatrix partial_transpose(const ComplexMatrix& m,
                                const SubsystemShape& shape, int which) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("partial_transpose: nonsquare");
  const SplitIndex s = split(shape, which, static_cast<int>(m.rows()));
  ComplexMatrix out(m.rows(), m.cols());
  for (int rb = 0; rb < s.before; ++rb)
    for (int rk = 0; rk < s.d; ++rk)
      for (int ra = 0; ra < s.after; ++ra)
        for (int cb = 0; cb < s.before; ++cb)
          for (int ck = 0; ck < s.d; ++ck)
            for (int ca = 0; ca < s.after; ++ca) {
              const int r = (rb * s.d + rk) * s.after + ra;
              const int c = (cb * s.d + ck) * s.after + ca;
              const int rt = (rb * s.d + ck) * s.after + ra;
              const int ct = (cb * s.d + rk) * s.after + ca;
              out(rt, ct) = m(r, c);
            }
  return out;
}

HermitianOperator partial_transpose(const HermitianOperator& m,
                                    const SubsystemShape& shape, int which) {
  return HermitianOperator(partial_transpose(m.matrix(), shape, which));
}

EigResult eig_hermitian(const HermitianOperator& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.matrix());
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("eig_hermitian: eigensolver did not converge");
  return EigResult{es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const HermitianOperator& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.matrix(),
                                                  Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("trace_norm: nonsquare");
  // Hermitian inputs are the common case; sum |eigenvalue| is cheaper and
  // more accurate than a full SVD there.
  if (hermiticity_defect(m) < 1e-13 * (1.0 + m.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw ConvergenceFailure("trace_norm: eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace divisio::matlin
