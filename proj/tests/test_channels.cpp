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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "divisio/channels.hpp"
#include "test_support.hpp"

using namespace divisio;
using namespace divisio::channels;
using matlin::Complex;
using matlin::ComplexMatrix;
using matlin::HermitianOperator;
using divisio::test::ket_bra;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// The composition law in its literal form,
// Tr_1[(1_0 (x) choi_b)^{T_1} (choi_a (x) 1_2)], via the matlin primitives.
ComplexMatrix compose_literal(const Channel& later, const Channel& earlier) {
  const int d0 = earlier.dim_in, d1 = earlier.dim_out, d2 = later.dim_out;
  const ComplexMatrix lhs = matlin::partial_transpose(
      matlin::kron(ComplexMatrix::Identity(d0, d0), later.choi.matrix()),
      {d0, d1, d2}, 1);
  const ComplexMatrix rhs =
      matlin::kron(earlier.choi.matrix(), ComplexMatrix::Identity(d2, d2));
  return matlin::partial_trace(lhs * rhs, {d0, d1, d2}, 1);
}

}  // namespace

TEST_CASE("choi of identity and dephasing kraus") {
  Channel id = identity_channel(2);
  ComplexMatrix phi = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi(i * 2 + i, j * 2 + j) = 1.0;
  CHECK(max_abs_diff(id.choi.matrix(), phi) <= 1e-14);

  KrausSet dephase{2, 2, {ket_bra(2, 0, 0), ket_bra(2, 1, 1)}};
  Channel dep = choi_from_kraus(dephase);
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect(0, 0) = 1.0;  // |00><00|
  expect(3, 3) = 1.0;  // |11><11|
  CHECK(max_abs_diff(dep.choi.matrix(), expect) <= 1e-14);
}

TEST_CASE("choi of amplitude-damping-style kraus") {
  const double gamma = 0.5;
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  Channel c = choi_from_kraus(KrausSet{2, 2, {k0, k1}});
  // Entry ((0,0),(1,1)): coherence scaled by sqrt(1-gamma).
  CHECK(c.choi.matrix()(0, 3).real() == doctest::Approx(std::sqrt(0.5)));
  CHECK(is_cptp(c).verdict == CptpVerdict::cptp);
}

TEST_CASE("incomplete kraus sets are rejected") {
  KrausSet bad{2, 2, {0.5 * ComplexMatrix::Identity(2, 2)}};
  CHECK_THROWS_AS(choi_from_kraus(bad), IncompleteKraus);
}

TEST_CASE("apply basics") {
  Rng rng(17);
  Channel id = identity_channel(3);
  HermitianOperator sigma = divisio::test::random_hermitian(3, rng);
  CHECK(max_abs_diff(channels::apply(id, sigma).matrix(), sigma.matrix()) <= 1e-12);

  // Full dephasing kills the off-diagonals of |+><+|.
  Channel dep = dephasing_hd(2, 1.0);
  ComplexMatrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK(max_abs_diff(channels::apply(dep, plus), 0.5 * ComplexMatrix::Identity(2, 2)) <=
        1e-14);

  auto [first, second] = collisional_pair(0.5);
  ComplexMatrix out = channels::apply(first, ket_bra(2, 0, 0));
  ComplexMatrix expect(2, 2);
  expect << 0.75, 0, 0, 0.25;
  CHECK(max_abs_diff(out, expect) <= 1e-14);
}

TEST_CASE("compose vs literal formula and sequential application") {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = (rep % 2 == 0) ? 2 : 3;
    Channel a = random_cptp(d, d, 3, rng);
    Channel b = random_cptp(d, d, 2, rng);
    Channel ba = compose(b, a);
    CHECK(max_abs_diff(ba.choi.matrix(), compose_literal(b, a)) <= 1e-12);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const ComplexMatrix seq = channels::apply(b, channels::apply(a, ket_bra(d, i, j)));
        const ComplexMatrix one = channels::apply(ba, ket_bra(d, i, j));
        CHECK(max_abs_diff(seq, one) <= 1e-10);
      }
  }
}

TEST_CASE("compose with identity and unitary product") {
  Rng rng(31);
  Channel c = random_cptp(2, 2, 4, rng);
  CHECK(max_abs_diff(compose(identity_channel(2), c).choi.matrix(),
                     c.choi.matrix()) <= 1e-12);
  CHECK(max_abs_diff(compose(c, identity_channel(2)).choi.matrix(),
                     c.choi.matrix()) <= 1e-12);

  const ComplexMatrix u = haar_unitary(3, rng);
  const ComplexMatrix v = haar_unitary(3, rng);
  Channel uv = compose(unitary_channel(u), unitary_channel(v));
  CHECK(max_abs_diff(uv.choi.matrix(), unitary_channel(u * v).choi.matrix()) <=
        1e-12);
}

TEST_CASE("is_cptp diagnoses the three failure modes") {
  CHECK(is_cptp(identity_channel(2)).verdict == CptpVerdict::cptp);

  // Transposition map: Choi is the SWAP operator, eigenvalue -1.
  ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) swap(a * 2 + b, b * 2 + a) = 1.0;
  Channel transp(2, 2, HermitianOperator(swap));
  auto rep = is_cptp(transp);
  CHECK(rep.verdict == CptpVerdict::not_cp);
  CHECK(rep.min_choi_eigenvalue == doctest::Approx(-1.0));

  Channel doubled(2, 2,
                  HermitianOperator(2.0 * identity_channel(2).choi.matrix()));
  CHECK(is_cptp(doubled).verdict == CptpVerdict::not_tp);
}

TEST_CASE("pauli channel") {
  Channel id = pauli_channel(1, 0, 0, 0);
  CHECK(max_abs_diff(id.choi.matrix(), identity_channel(2).choi.matrix()) <=
        1e-14);

  // Collisional first map equals the pauli form.
  const double p = 0.3;
  auto [first, second] = collisional_pair(p);
  Channel ref = pauli_channel(1 - p, p / 2, 0, p / 2);
  CHECK(max_abs_diff(first.choi.matrix(), ref.choi.matrix()) <= 1e-14);

  // Fully depolarizing: sigma -> Tr[sigma]/2 on the operator basis.
  Channel depol = pauli_channel(0.25, 0.25, 0.25, 0.25);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const ComplexMatrix out = channels::apply(depol, ket_bra(2, i, j));
      const ComplexMatrix expect =
          (i == j) ? ComplexMatrix(0.5 * ComplexMatrix::Identity(2, 2))
                   : ComplexMatrix(ComplexMatrix::Zero(2, 2));
      CHECK(max_abs_diff(out, expect) <= 1e-14);
    }

  CHECK_THROWS_AS(pauli_channel(0.5, 0.2, 0.2, 0.2), InvalidDistribution);
  CHECK_THROWS_AS(pauli_channel(-0.1, 0.6, 0.25, 0.25), InvalidDistribution);
}

TEST_CASE("collisional pair regimes") {
  auto [a0, b0] = collisional_pair(0.0);
  CHECK(max_abs_diff(a0.choi.matrix(), identity_channel(2).choi.matrix()) <= 1e-14);
  CHECK(max_abs_diff(b0.choi.matrix(), identity_channel(2).choi.matrix()) <= 1e-14);

  auto [a5, b5] = collisional_pair(0.5);
  CHECK(max_abs_diff(a5.choi.matrix(), b5.choi.matrix()) <= 1e-14);
  Channel ref = pauli_channel(0.5, 0.25, 0, 0.25);
  CHECK(max_abs_diff(a5.choi.matrix(), ref.choi.matrix()) <= 1e-14);

  auto [a1, b1] = collisional_pair(1.0);
  CHECK(max_abs_diff(b1.choi.matrix(), identity_channel(2).choi.matrix()) <= 1e-14);
  Channel xz = pauli_channel(0, 0.5, 0, 0.5);
  CHECK(max_abs_diff(a1.choi.matrix(), xz.choi.matrix()) <= 1e-14);

  CHECK_THROWS_AS(collisional_pair(1.5), OutOfRange);
}

TEST_CASE("dephasing in time") {
  CHECK(dephasing_probability(0.0) == doctest::Approx(0.0));
  CHECK(dephasing_probability(M_PI) == doctest::Approx(1.0).epsilon(1e-12));
  const double e4 = std::exp(4.0);
  CHECK(dephasing_probability(M_PI / 2) ==
        doctest::Approx(e4 * (1 - std::exp(-2.0)) / (e4 - 1)));

  CHECK(max_abs_diff(dephasing_t(0.0).choi.matrix(),
                     identity_channel(2).choi.matrix()) <= 1e-14);

  // The qubit dephasing map coincides with the d=2 projector form.
  for (double t : {0.7, 1.9, 3.0, 5.5}) {
    Channel a = dephasing_t(t);
    Channel b = dephasing_hd(2, dephasing_probability(t));
    CHECK(max_abs_diff(a.choi.matrix(), b.choi.matrix()) <= 1e-12);
  }
}

TEST_CASE("high-dimensional dephasing") {
  CHECK(max_abs_diff(dephasing_hd(3, 0.0).choi.matrix(),
                     identity_channel(3).choi.matrix()) <= 1e-14);

  Channel full = dephasing_hd(3, 1.0);
  ComplexMatrix expect = ComplexMatrix::Zero(9, 9);
  for (int k = 0; k < 3; ++k) expect(k * 3 + k, k * 3 + k) = 1.0;
  CHECK(max_abs_diff(full.choi.matrix(), expect) <= 1e-14);

  // Composition law p'' = p + p' - p p'.
  Rng rng(47);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d : {2, 3, 5})
    for (int rep = 0; rep < 7; ++rep) {
      const double p = unif(rng), q = unif(rng);
      Channel lhs = compose(dephasing_hd(d, q), dephasing_hd(d, p));
      Channel rhs = dephasing_hd(d, p + q - p * q);
      CHECK(max_abs_diff(lhs.choi.matrix(), rhs.choi.matrix()) <= 1e-10);
    }

  CHECK_THROWS_AS(dephasing_hd(1, 0.5), OutOfRange);
  CHECK_THROWS_AS(dephasing_hd(3, 1.5), OutOfRange);
}

TEST_CASE("haar unitary sampling") {
  Rng rng(2718);
  const ComplexMatrix u1 = haar_unitary(1, rng);
  CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) <= 1e-12);

  for (int d : {2, 3, 5}) {
    const ComplexMatrix u = haar_unitary(d, rng);
    CHECK(max_abs_diff(u.adjoint() * u, ComplexMatrix::Identity(d, d)) <= 1e-10);
  }

  // Haar marginal E|U_00|^2 = 1/d at d = 4.
  double acc = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const ComplexMatrix u = haar_unitary(4, rng);
    acc += std::norm(u(0, 0));
  }
  CHECK(std::abs(acc / n - 0.25) <= 0.01);
}

TEST_CASE("unitary mixtures") {
  Rng rng(99);
  Channel single = unitary_mixture(3, 1, rng);
  CHECK(is_cptp(single).verdict == CptpVerdict::cptp);

  Channel mix = unitary_mixture(3, 4, rng);
  CHECK(max_abs_diff(channels::apply(mix, ComplexMatrix::Identity(3, 3)),
                     ComplexMatrix::Identity(3, 3)) <= 1e-9);

  // Choi rank is at most n.
  Channel two = unitary_mixture(4, 2, rng);
  auto eig = matlin::eig_hermitian(two.choi);
  int nonzero = 0;
  for (int i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues(i) > 1e-10) ++nonzero;
  CHECK(nonzero <= 2);
}

TEST_CASE("random cptp channels are cptp") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    Channel c = random_cptp(2 + rep % 2, 2 + rep % 2, 1 + rep % 4, rng);
    auto rep_c = is_cptp(c);
    CHECK(rep_c.verdict == CptpVerdict::cptp);
    CHECK(std::abs(c.choi.trace() - c.dim_in) <= 1e-9);
  }
}

TEST_CASE("transfer representation matches apply") {
  Rng rng(13);
  Channel c = random_cptp(3, 2, 2, rng);
  const ComplexMatrix t = transfer_matrix(c);
  HermitianOperator rho = divisio::test::random_hermitian(3, rng);
  Eigen::VectorXcd v(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(i * 3 + j) = rho.matrix()(i, j);
  const Eigen::VectorXcd w = t * v;
  const ComplexMatrix out = channels::apply(c, rho).matrix();
  for (int b = 0; b < 2; ++b)
    for (int bp = 0; bp < 2; ++bp)
      CHECK(std::abs(w(b * 2 + bp) - out(b, bp)) <= 1e-12);
}

TEST_CASE("try_invert") {
  Channel id = identity_channel(2);
  auto inv = try_invert(id);
  REQUIRE(inv.has_value());
  CHECK(max_abs_diff(inv->choi.matrix(), id.choi.matrix()) <= 1e-10);

  CHECK(!try_invert(dephasing_t(M_PI)).has_value());

  auto half = try_invert(dephasing_hd(2, 0.5));
  REQUIRE(half.has_value());
  // Inverse rescales coherences by 2 and is not CP.
  Channel recon = compose(*half, dephasing_hd(2, 0.5));
  CHECK(max_abs_diff(recon.choi.matrix(), id.choi.matrix()) <= 1e-8);
  CHECK(matlin::min_eigenvalue(half->choi) < -1e-3);
  ComplexMatrix coh = channels::apply(*half, ket_bra(2, 0, 1));
  CHECK(coh(0, 1).real() == doctest::Approx(2.0));

  Rng rng(3);
  Channel c = random_cptp(3, 3, 4, rng);
  auto cinv = try_invert(c);
  REQUIRE(cinv.has_value());
  CHECK(max_abs_diff(compose(c, *cinv).choi.matrix(),
                     identity_channel(3).choi.matrix()) <= 1e-8);
  CHECK(max_abs_diff(compose(*cinv, c).choi.matrix(),
                     identity_channel(3).choi.matrix()) <= 1e-8);
}

TEST_CASE("stored choi is the partial transpose of the conditional state") {
  // Build the transposition-flavored image independently and compare.
  Rng rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 2 + rep % 2;
    Channel c = random_cptp(d, d, 3, rng);
    ComplexMatrix rho = ComplexMatrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const ComplexMatrix nij = channels::apply(c, ket_bra(d, j, i));  // N(T|i><j|)
        for (int b = 0; b < d; ++b)
          for (int bp = 0; bp < d; ++bp)
            rho(i * d + b, j * d + bp) = nij(b, bp);
      }
    const ComplexMatrix pt = matlin::partial_transpose(rho, {d, d}, 0);
    CHECK(max_abs_diff(pt, c.choi.matrix()) <= 1e-10);
    CHECK(is_cptp(c).verdict == CptpVerdict::cptp);
  }
}

TEST_CASE("combine and difference") {
  Rng rng(37);
  Channel a = random_cptp(2, 2, 2, rng);
  Channel b = random_cptp(2, 2, 2, rng);
  Channel d = difference(a, b);
  CHECK(std::abs(d.choi.trace()) <= 1e-9);
  Channel w = combine(0.3, a, 0.7, b);
  CHECK(is_cptp(w).verdict == CptpVerdict::cptp);
  CHECK_THROWS_AS(combine(1.0, a, 1.0, random_cptp(3, 3, 1, rng)),
                  DimensionMismatch);
}
