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

#ifndef DIVISIO_MATLIN_HPP
#define DIVISIO_MATLIN_HPP

#include <Eigen/Dense>
#include <complex>
#include <initializer_list>
#include <vector>

#include "divisio/errors.hpp"

namespace divisio::matlin {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// Library-wide convention: all transpositions and partial transpositions are
// taken with respect to the computational basis.

/// True if every entry is finite (no NaN/Inf).
bool all_finite(const ComplexMatrix& m);

/// Largest entrywise deviation from Hermiticity, max_ij |m_ij - conj(m_ji)|.
double hermiticity_defect(const ComplexMatrix& m);

/// Hermitian matrix with a fixed dimension. Construction symmetrizes via
/// (M + M^dag)/2; inputs whose defect exceeds `reject_tol` are rejected.
class HermitianOperator {
public:
  static constexpr double kDefaultRejectTol = 1e-9;

  explicit HermitianOperator(const ComplexMatrix& m,
                             double reject_tol = kDefaultRejectTol);

  static HermitianOperator identity(int dim);
  static HermitianOperator zeros(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const ComplexMatrix& matrix() const { return mat_; }

  double trace() const { return mat_.trace().real(); }

private:
  ComplexMatrix mat_;
};

/// Tensor factorization of an operator space, e.g. {2, 2, 2} for three
/// qubits. Subsystem 0 is the leftmost (slowest-varying) index.
struct SubsystemShape {
  std::vector<int> dims;

  SubsystemShape(std::initializer_list<int> d) : dims(d) {}
  explicit SubsystemShape(std::vector<int> d) : dims(std::move(d)) {}

  int total() const;
  /// Throws DimensionMismatch unless the product of dims equals `dim`.
  void check_matches(int dim) const;
};

/// Kronecker product, dimensions multiply.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Trace out subsystem `which`; the result acts on the remaining factors in
/// their original order. Preserves the full trace.
ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemShape& shape,
                            int which);
HermitianOperator partial_trace(const HermitianOperator& m,
                                const SubsystemShape& shape, int which);

/// Transpose subsystem `which` only (computational basis). Involutive.
ComplexMatrix partial_transpose(const ComplexMatrix& m,
                                const SubsystemShape& shape, int which);
HermitianOperator partial_transpose(const HermitianOperator& m,
                                    const SubsystemShape& shape, int which);

struct EigResult {
  RealVector eigenvalues;    // ascending
  ComplexMatrix eigenvectors;  // columns, unitary
};

/// Hermitian eigendecomposition, m = V diag(lambda) V^dag.
EigResult eig_hermitian(const HermitianOperator& m);

/// Smallest eigenvalue of a Hermitian operator.
double min_eigenvalue(const HermitianOperator& m);

/// Sum of singular values. Equals sum |lambda_i| for Hermitian input.
double trace_norm(const ComplexMatrix& m);

/// Largest singular value.
double operator_norm(const ComplexMatrix& m);

}  // namespace divisio::matlin

#endif  // DIVISIO_MATLIN_HPP
