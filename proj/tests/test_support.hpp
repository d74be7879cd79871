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

#ifndef DIVISIO_TESTS_TEST_SUPPORT_HPP
#define DIVISIO_TESTS_TEST_SUPPORT_HPP

#include "divisio/matlin.hpp"
#include "divisio/rng.hpp"

namespace divisio::test {

inline matlin::ComplexMatrix random_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  matlin::ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = matlin::Complex(gauss(rng), gauss(rng));
  return m;
}

inline matlin::HermitianOperator random_hermitian(int d, Rng& rng) {
  matlin::ComplexMatrix g = random_complex(d, d, rng);
  return matlin::HermitianOperator(0.5 * (g + g.adjoint().eval()));
}

inline matlin::HermitianOperator random_psd(int d, Rng& rng) {
  matlin::ComplexMatrix g = random_complex(d, d, rng);
  return matlin::HermitianOperator(g * g.adjoint());
}

inline matlin::ComplexMatrix ket_bra(int d, int i, int j) {
  matlin::ComplexMatrix m = matlin::ComplexMatrix::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

}  // namespace divisio::test

#endif  // DIVISIO_TESTS_TEST_SUPPORT_HPP
