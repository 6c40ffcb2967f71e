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

// Single-mode bosonic operators and states in a truncated Fock basis.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "phasediff/types.hpp"

namespace phasediff {

template <typename Real = double>
Operator<Real> annihilation_op(const TruncationConfig& cfg) {
  Operator<Real> a = Operator<Real>::Zero(cfg.n_max, cfg.n_max);
  for (int n = 1; n < cfg.n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<Real>(n));
  return a;
}

template <typename Real = double>
Operator<Real> creation_op(const TruncationConfig& cfg) {
  return annihilation_op<Real>(cfg).adjoint();
}

template <typename Real = double>
Operator<Real> number_op(const TruncationConfig& cfg) {
  Operator<Real> n = Operator<Real>::Zero(cfg.n_max, cfg.n_max);
  for (int k = 0; k < cfg.n_max; ++k) n(k, k) = static_cast<Real>(k);
  return n;
}

/// Rotated quadrature (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2); phi = 0 is X,
/// phi = pi/2 is Y = i(a^dag - a)/sqrt(2). Vacuum variance 1/2.
template <typename Real = double>
Operator<Real> quadrature_op(Real phi, const TruncationConfig& cfg) {
  const Operator<Real> a = annihilation_op<Real>(cfg);
  const Complex<Real> e = std::polar(Real(1), -phi);
  return (a * e + a.adjoint() * std::conj(e)) / std::sqrt(Real(2));
}

/// exp(K) for anti-Hermitian K, through the spectral decomposition of the
/// Hermitian matrix iK. The result is unitary to rounding in the truncated
/// space; whether it approximates the infinite-dimensional operator is a
/// separate question answered by the tail check on the states it produces.
template <typename Real = double>
Operator<Real> exp_anti_hermitian(const Operator<Real>& generator) {
  const Complex<Real> i(0, 1);
  const Operator<Real> hermitian = i * generator;
  Eigen::SelfAdjointEigenSolver<Operator<Real>> es(hermitian);
  if (es.info() != Eigen::Success)
    throw NumericalError("exp_anti_hermitian: eigendecomposition failed");
  // K = -i H, so exp(K) = V exp(-i lambda) V^dag.
  const Ket<Real> phases = es.eigenvalues().unaryExpr(
      [](Real lambda) { return std::polar(Real(1), -lambda); });
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Population in levels n >= ceil(0.95 n_max).
template <typename Real = double>
Real tail_population(const Ket<Real>& psi, const TruncationConfig& cfg) {
  const int start = cfg.tail_start();
  if (start >= psi.size()) return Real(0);
  return psi.tail(psi.size() - start).squaredNorm();
}

namespace detail {

template <typename Real>
void require_adequate(const Ket<Real>& psi, const TruncationConfig& cfg, const char* what) {
  const Real tail = tail_population(psi, cfg);
  if (!(tail <= cfg.tail_tol)) {
    std::ostringstream os;
    os << what << ": population " << static_cast<double>(tail) << " above level "
       << cfg.tail_start() << " exceeds tail_tol " << cfg.tail_tol << " at n_max "
       << cfg.n_max;
    throw TruncationError(os.str());
  }
}

template <typename Real>
Ket<Real> vacuum(const TruncationConfig& cfg) {
  Ket<Real> v = Ket<Real>::Zero(cfg.n_max);
  v(0) = Real(1);
  return v;
}

}  // namespace detail

/// S(r) = exp(r/2 (a^dag^2 - a^2)) for real r. Positive r squeezes Y and
/// stretches X.
template <typename Real = double>
Operator<Real> squeezing_op(Real r, const TruncationConfig& cfg) {
  if (std::abs(r) > Real(3))
    throw std::invalid_argument("squeezing_op: |r| > 3 is outside the supported range");
  const Operator<Real> a = annihilation_op<Real>(cfg);
  const Operator<Real> a2 = a * a;
  const Operator<Real> generator = (r / Real(2)) * (a2.adjoint() - a2);
  Operator<Real> s = exp_anti_hermitian<Real>(generator);
  detail::require_adequate<Real>(s.col(0), cfg, "squeezing_op");
  return s;
}

/// D(alpha) = exp(alpha a^dag - alpha a) for real alpha.
template <typename Real = double>
Operator<Real> displacement_op(Real alpha, const TruncationConfig& cfg) {
  const Operator<Real> a = annihilation_op<Real>(cfg);
  const Operator<Real> generator = alpha * (a.adjoint() - a);
  Operator<Real> d = exp_anti_hermitian<Real>(generator);
  detail::require_adequate<Real>(d.col(0), cfg, "displacement_op");
  return d;
}

/// U(theta) = exp(-i theta a^dag a), diagonal.
template <typename Real = double>
Operator<Real> phase_shift_op(Real theta, const TruncationConfig& cfg) {
  Ket<Real> diag(cfg.n_max);
  for (int n = 0; n < cfg.n_max; ++n) diag(n) = std::polar(Real(1), -theta * n);
  return diag.asDiagonal();
}

/// Report produced by DensityMatrix::check_invariants.
struct StateDiagnostics {
  double hermiticity = 0.0;     // max |rho - rho^dag|
  double trace_error = 0.0;     // |Tr rho - 1|
  double min_eigenvalue = 0.0;
  double tail_population = 0.0;

  bool ok(double tail_tol) const {
    return hermiticity <= 1e-12 && trace_error <= 1e-10 && min_eigenvalue >= -1e-10 &&
           tail_population <= tail_tol;
  }
};

/// Hermitian, unit-trace, positive semidefinite state on the truncated space.
///
/// Construction checks hermiticity, trace and truncation adequacy. Positivity
/// needs a full eigendecomposition and is verified on request by
/// check_invariants(); every map in this library preserves it exactly.
template <typename Real = double>
class DensityMatrix {
 public:
  DensityMatrix(Operator<Real> m, TruncationConfig cfg) : rho_(std::move(m)), cfg_(cfg) {
    if (rho_.rows() != cfg_.n_max || rho_.cols() != cfg_.n_max)
      throw DimensionError("DensityMatrix: matrix size does not match n_max");
    const Real herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > Real(1e-12))
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    // Remove the residual anti-Hermitian rounding so downstream eigensolvers
    // see an exactly Hermitian matrix.
    rho_ = (rho_ + rho_.adjoint()).eval() / Real(2);
    const Real tr = rho_.trace().real();
    if (std::abs(tr - Real(1)) > Real(1e-10))
      throw std::invalid_argument("DensityMatrix: trace deviates from 1");
    const Real tail = tail_population();
    if (!(tail <= cfg_.tail_tol)) {
      std::ostringstream os;
      os << "DensityMatrix: tail population " << static_cast<double>(tail)
         << " exceeds tail_tol " << cfg_.tail_tol << " at n_max " << cfg_.n_max;
      throw TruncationError(os.str());
    }
  }

  /// |psi><psi| for a normalized ket.
  static DensityMatrix pure(const Ket<Real>& psi, const TruncationConfig& cfg) {
    if (std::abs(psi.squaredNorm() - Real(1)) > Real(1e-10))
      throw std::invalid_argument("DensityMatrix::pure: ket is not normalized");
    return DensityMatrix(psi * psi.adjoint(), cfg);
  }

  /// Fock state |n><n|.
  static DensityMatrix fock(int n, const TruncationConfig& cfg) {
    if (n < 0 || n >= cfg.n_max) throw std::out_of_range("DensityMatrix::fock: level out of range");
    Operator<Real> m = Operator<Real>::Zero(cfg.n_max, cfg.n_max);
    m(n, n) = Real(1);
    return DensityMatrix(std::move(m), cfg);
  }

  const Operator<Real>& matrix() const { return rho_; }
  const TruncationConfig& config() const { return cfg_; }
  int dim() const { return cfg_.n_max; }
  Complex<Real> operator()(int m, int n) const { return rho_(m, n); }

  Real tail_population() const {
    const int start = cfg_.tail_start();
    Real tail = 0;
    for (int k = start; k < dim(); ++k) tail += rho_(k, k).real();
    return tail;
  }

  Real purity() const { return rho_.cwiseAbs2().sum(); }

  StateDiagnostics check_invariants() const {
    StateDiagnostics d;
    d.hermiticity = static_cast<double>((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff());
    d.trace_error = static_cast<double>(std::abs(rho_.trace() - Complex<Real>(1)));
    Eigen::SelfAdjointEigenSolver<Operator<Real>> es(rho_, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = static_cast<double>(es.eigenvalues().minCoeff());
    d.tail_population = static_cast<double>(tail_population());
    return d;
  }

 private:
  Operator<Real> rho_;
  TruncationConfig cfg_;
};

/// S(r) D(alpha)|0>; the displacement acts first.
template <typename Real = double>
Ket<Real> squeezed_displaced_ket(const ProbeParams& p, const TruncationConfig& cfg) {
  Ket<Real> psi = detail::vacuum<Real>(cfg);
  if (p.alpha != 0.0) psi = displacement_op<Real>(static_cast<Real>(p.alpha), cfg) * psi;
  if (p.r != 0.0) psi = squeezing_op<Real>(static_cast<Real>(p.r), cfg) * psi;
  detail::require_adequate<Real>(psi, cfg, "squeezed_displaced_state");
  return psi;
}

template <typename Real = double>
DensityMatrix<Real> squeezed_displaced_state(const ProbeParams& p, const TruncationConfig& cfg) {
  return DensityMatrix<Real>::pure(squeezed_displaced_ket<Real>(p, cfg), cfg);
}

template <typename Real = double>
DensityMatrix<Real> coherent_state(Real alpha, const TruncationConfig& cfg) {
  return squeezed_displaced_state<Real>(ProbeParams{static_cast<double>(alpha), 0.0}, cfg);
}

/// Tr[rho A].
template <typename Real = double>
Complex<Real> expectation(const DensityMatrix<Real>& rho, const Operator<Real>& op) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim())
    throw DimensionError("expectation: operator and state dimensions differ");
  // Tr[rho A] = sum_{mn} rho_mn A_nm
  return rho.matrix().cwiseProduct(op.transpose()).sum();
}

/// Smallest n_max from `candidates` (ascending) for which S(r)D(alpha)|0>
/// passes the tail check. Throws TruncationError if none does.
template <typename Real = double>
TruncationConfig adequate_truncation(const ProbeParams& p, std::initializer_list<int> candidates,
                                     double tail_tol = 1e-8) {
  for (int n : candidates) {
    const TruncationConfig cfg(n, tail_tol);
    try {
      squeezed_displaced_ket<Real>(p, cfg);
      return cfg;
    } catch (const TruncationError&) {
    }
  }
  throw TruncationError("adequate_truncation: no candidate dimension is adequate");
}

}  // namespace phasediff
