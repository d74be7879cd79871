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

#ifndef DIVISIO_SDP_HPP
#define DIVISIO_SDP_HPP

#include <map>
#include <string>
#include <vector>

#include "divisio/matlin.hpp"

namespace divisio::sdp {

using matlin::ComplexMatrix;
using matlin::HermitianOperator;
using matlin::RealMatrix;

// Standard-form conic program over complex Hermitian PSD blocks plus free
// real scalars:
//
//   maximize/minimize  sum_k Tr[C_k X_k] + c_f . f
//   subject to         sum_k Tr[A_{i,k} X_k] + F_i . f  (=, >=)  b_i
//                      X_k >= 0,    f free.
//
// One-sided matrix inequalities are expected to be lowered by the caller to
// this scalar form through an explicit slack PSD block tied entrywise by
// equalities; scalar >= rows are lowered internally. The solver embeds each
// complex Hermitian block into a real symmetric one of doubled size (blocks
// whose coefficients are all real stay real) and runs a primal-dual
// path-following interior-point method on the homogeneous self-dual
// embedding, with Nesterov-Todd scaling, a Mehrotra predictor-corrector and
// a dense Schur-complement solve.

enum class Relation { equality, greater_equal };
enum class Sense { maximize, minimize };

struct Constraint {
  std::map<int, HermitianOperator> block_coeffs;  // block index -> A_{i,k}
  std::map<int, double> scalar_coeffs;            // scalar index -> F_i
  double rhs = 0.0;
  Relation relation = Relation::equality;
};

struct SdpProblem {
  std::vector<int> block_dims;
  int free_scalar_count = 0;
  std::map<int, HermitianOperator> objective_blocks;
  std::map<int, double> objective_scalars;
  std::vector<Constraint> constraints;
  Sense sense = Sense::maximize;

  int add_block(int dim) {
    block_dims.push_back(dim);
    return static_cast<int>(block_dims.size()) - 1;
  }
  int add_free_scalar() { return free_scalar_count++; }

  /// Throws on malformed data (shape mismatches, non-Hermitian coefficients).
  void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolveOptions {
  double gap_tolerance = 1e-8;   // relative duality gap at Optimal
  int max_iterations = 200;
  double feasibility_tolerance = 1e-8;  // absolute residual bound at Optimal
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<HermitianOperator> primal_blocks;
  std::vector<double> scalar_values;
  // One multiplier per constraint, in problem order. On PrimalInfeasible this
  // holds the Farkas ray y (b.y > 0, -A^T y PSD); on DualInfeasible the
  // improving primal ray is in primal_blocks/scalar_values instead.
  std::vector<double> dual_multipliers;
  double gap = 0.0;  // |primal - dual| / (1 + |primal|)
  int iterations = 0;
};

SdpSolution solve(const SdpProblem& p, const SolveOptions& opts = {});

/// Real embedding H = A + iB |-> [[A, -B], [B, A]]; PSD iff H is PSD, the
/// spectrum doubles in multiplicity, Tr[embed(H)] = 2 Tr[H].
RealMatrix embed_complex(const HermitianOperator& h);

/// Debug dump of a problem as JSON, complex entries as [re, im] pairs.
void dump_problem(const SdpProblem& p, const std::string& path);
SdpProblem load_problem(const std::string& path);

}  // namespace divisio::sdp

#endif  // DIVISIO_SDP_HPP
