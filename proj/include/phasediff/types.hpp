// Copyright 2026 The phasediff Authors
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

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace phasediff {

template <typename Real = double>
using Complex = std::complex<Real>;

/// Dense complex matrix on the first `dim` Fock levels (operators, kets as
/// single columns, density matrices).
template <typename Real = double>
using Operator = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
using Ket = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real = double>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real = double>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a state leaks population into the top of the truncated basis.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical routine cannot deliver its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fock-space truncation: `n_max` basis states |0>..|n_max-1>, and the largest
/// population tolerated in the top 5% of levels.
struct TruncationConfig {
  int n_max = 600;
  double tail_tol = 1e-8;

  TruncationConfig() = default;
  TruncationConfig(int n, double tol = 1e-8) : n_max(n), tail_tol(tol) {
    if (n_max < 2) throw std::invalid_argument("TruncationConfig: n_max must be >= 2");
    if (!(tail_tol >= 0.0 && tail_tol < 1.0))
      throw std::invalid_argument("TruncationConfig: tail_tol must lie in [0, 1)");
  }

  /// First level counted as "tail": ceil(0.95 * n_max).
  /// First level of the adequacy window: the top 5%, and never fewer than two levels.
  int tail_start() const { return std::min(static_cast<int>(std::ceil(0.95 * n_max)), n_max - 2); }

  static TruncationConfig full() { return TruncationConfig(600); }
  static TruncationConfig desk() { return TruncationConfig(200); }

  friend bool operator==(const TruncationConfig&, const TruncationConfig&) = default;
};

/// Real coherent amplitude and real squeezing parameter of the probe S(r)D(alpha)|0>.
struct ProbeParams {
  double alpha = 0.0;
  double r = 0.0;

  friend bool operator==(const ProbeParams&, const ProbeParams&) = default;
};

}  // namespace phasediff
