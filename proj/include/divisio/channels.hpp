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

#ifndef DIVISIO_CHANNELS_HPP
#define DIVISIO_CHANNELS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "divisio/matlin.hpp"
#include "divisio/rng.hpp"

namespace divisio::channels {

using matlin::Complex;
using matlin::ComplexMatrix;
using matlin::HermitianOperator;

// Choi convention used throughout: for a map N with input dimension d_in and
// output dimension d_out, the stored operator is the unnormalized Choi matrix
//
//     choi = sum_{ij} |i><j| (x) N(|i><j|),
//
// on the (input (x) output) product basis, with trace d_in for
// trace-preserving maps. CPTP maps have choi >= 0 and Tr_out[choi] = 1_in.
// Applied to the transposition-flavored isomorphism this is the partial
// transpose, on the input factor, of the conditional-state image; one stored
// object therefore serves both the composition law and the diamond-norm
// programs. Hermiticity-preserving non-CPTP maps (differences of channels,
// linear inverses) use the same carrier with the PSD/trace conditions relaxed.

/// A linear, Hermiticity-preserving map carried by its Choi matrix.
struct Channel {
  int dim_in;
  int dim_out;
  HermitianOperator choi;  // dimension dim_in * dim_out

  Channel(int din, int dout, HermitianOperator c);

  matlin::SubsystemShape shape() const { return {{dim_in, dim_out}}; }
};

/// Kraus representation, operators map the input space to the output space.
struct KrausSet {
  int dim_in;
  int dim_out;
  std::vector<ComplexMatrix> operators;  // each dim_out x dim_in

  /// || sum_a K_a^dag K_a - 1 ||_max; zero for trace-preserving sets.
  double completeness_error() const;
};

/// Choi matrix of a Kraus set. Throws IncompleteKraus when the completeness
/// relation is violated beyond 1e-6.
Channel choi_from_kraus(const KrausSet& k);

/// Action on an arbitrary operator, N(sigma) = Tr_in[choi (sigma^T (x) 1)].
ComplexMatrix apply(const Channel& c, const ComplexMatrix& op);
HermitianOperator apply(const Channel& c, const HermitianOperator& state);

/// Choi matrix of later o earlier,
///   Tr_1[(1_0 (x) choi_later)^{T_1} (choi_earlier (x) 1_2)].
Channel compose(const Channel& later, const Channel& earlier);

enum class CptpVerdict { cptp, not_cp, not_tp, neither };

struct CptpReport {
  CptpVerdict verdict;
  double min_choi_eigenvalue;  // condition (a): >= -tol for CP
  double tp_deviation;         // condition (b): ||Tr_out[choi] - 1||_max
};

/// Checks the two Choi conditions for a CPTP map.
CptpReport is_cptp(const Channel& c, double tol = 1e-8);

Channel identity_channel(int d);

/// Channel for conjugation by a fixed unitary (or any matrix as sole Kraus).
Channel unitary_channel(const ComplexMatrix& u);

/// rho -> p_i rho + p_x X rho X + p_y Y rho Y + p_z Z rho Z.
Channel pauli_channel(double p_i, double p_x, double p_y, double p_z);

/// The two-collision pair (Lambda_{1|0}, Lambda_{2|0}) with correlated
/// collisions: first map (1-p) id + p/2 (X.X + Z.Z), second map
/// ((1-p)^2 + p^2) id + p(1-p) (X.X + Z.Z).
std::pair<Channel, Channel> collisional_pair(double p);

/// Dephasing probability p(t) = e^4 (1 - e^{-2(1-cos t)})/(e^4 - 1).
double dephasing_probability(double t);

/// Qubit dephasing map at time t, (1 - p(t)/2) rho + (p(t)/2) Z rho Z.
Channel dephasing_t(double t);

/// d-dimensional dephasing, (1-p) rho + p sum_k Pi_k rho Pi_k.
Channel dephasing_hd(int d, double p);

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases of
/// R's diagonal normalized.
ComplexMatrix haar_unitary(int d, Rng& rng);

/// Unbiased convex combination of n Haar-random unitary conjugations.
Channel unitary_mixture(int d, int n, Rng& rng);

/// Random CPTP map from a Haar-style isometry (Ginibre Kraus operators,
/// normalized to completeness). Test and experiment helper.
Channel random_cptp(int dim_in, int dim_out, int kraus_count, Rng& rng);

/// Transfer (natural) representation T with N(rho) = unvec(T vec(rho)),
/// vec row-major; T is (d_out^2) x (d_in^2).
ComplexMatrix transfer_matrix(const Channel& c);

/// Linear inverse of a square-dimension map, as a Channel-shaped object (not
/// necessarily CPTP). Empty when the transfer matrix has a singular value
/// below 1e-10.
std::optional<Channel> try_invert(const Channel& c);

/// wa * a + wb * b as a Channel-shaped Hermiticity-preserving map.
Channel combine(double wa, const Channel& a, double wb, const Channel& b);

/// a - b; the carrier for channel-discrimination differences.
Channel difference(const Channel& a, const Channel& b);

}  // namespace divisio::channels

#endif  // DIVISIO_CHANNELS_HPP
