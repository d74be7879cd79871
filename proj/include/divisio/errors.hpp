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

#ifndef DIVISIO_ERRORS_HPP
#define DIVISIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace divisio {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes are incompatible (subsystem products, channel chaining, ...).
class DimensionMismatch : public Error {
public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// An iterative numerical routine exceeded its iteration cap.
class ConvergenceFailure : public Error {
public:
  explicit ConvergenceFailure(const std::string& what) : Error(what) {}
};

/// A matrix handed to HermitianOperator is too far from Hermitian.
class AsymmetryError : public Error {
public:
  explicit AsymmetryError(const std::string& what) : Error(what) {}
};

/// Kraus operators do not satisfy the completeness relation.
class IncompleteKraus : public Error {
public:
  explicit IncompleteKraus(const std::string& what) : Error(what) {}
};

/// Probabilities are negative or do not sum to one.
class InvalidDistribution : public Error {
public:
  explicit InvalidDistribution(const std::string& what) : Error(what) {}
};

/// A scalar parameter lies outside its documented range.
class OutOfRange : public Error {
public:
  explicit OutOfRange(const std::string& what) : Error(what) {}
};

/// Operation defined only for qubit channels was called with d != 2.
class UnsupportedDimension : public Error {
public:
  explicit UnsupportedDimension(const std::string& what) : Error(what) {}
};

/// The interior-point iteration stalled before reaching its tolerances.
class NumericalFailure : public Error {
public:
  explicit NumericalFailure(const std::string& what) : Error(what) {}
};

}  // namespace divisio

#endif  // DIVISIO_ERRORS_HPP
