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

// Gauss-Hermite quadrature via Golub-Welsch eigenvalues and Christoffel weights.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "phasediff/types.hpp"

namespace phasediff {

/// Nodes and weights of a quadrature rule, stored in ascending node order.
template <typename Real = double>
struct QuadratureRule {
  RealVector<Real> nodes;
  RealVector<Real> weights;

  Eigen::Index size() const { return nodes.size(); }
};

namespace detail {

// Ratio p_n(t)/p_{n-1}(t) of orthonormal Hermite polynomials and
// log(sum_{k<n} p_k(t)^2), with rescaling so that large |t| cannot overflow.
template <typename Real>
std::pair<Real, Real> hermite_ratio_and_log_christoffel(int n, Real t) {
  Real prev = 0;
  Real cur = std::pow(std::numbers::pi_v<Real>, Real(-0.25));
  Real sum = 0;
  Real log_scale = 0;
  for (int k = 0; k < n; ++k) {
    sum += cur * cur;
    const Real next =
        std::sqrt(Real(2) / (k + 1)) * t * cur - std::sqrt(Real(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > Real(1e100)) {
      prev *= Real(1e-100);
      cur *= Real(1e-100);
      sum *= Real(1e-200);
      log_scale += Real(200) * std::log(Real(10));
    }
  }
  return {cur / prev, std::log(sum) + log_scale};
}

}  // namespace detail

/// n-point Gauss-Hermite rule for the weight e^{-t^2} on the real line.
template <typename Real = double>
QuadratureRule<Real> gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  QuadratureRule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes(0) = 0;
    rule.weights(0) = std::sqrt(std::numbers::pi_v<Real>);
    return rule;
  }
  RealVector<Real> diag = RealVector<Real>::Zero(n);
  RealVector<Real> sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(Real(k) / 2);
  Eigen::SelfAdjointEigenSolver<RealMatrix<Real>> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("gauss_hermite: eigensolver failed");

  for (int i = 0; i < n; ++i) {
    Real t = es.eigenvalues()(i);
    // One Newton step on p_n; p_n' = sqrt(2n) p_{n-1}.
    auto [ratio, log_c] = detail::hermite_ratio_and_log_christoffel<Real>(n, t);
    t -= ratio / std::sqrt(Real(2) * n);
    std::tie(ratio, log_c) = detail::hermite_ratio_and_log_christoffel<Real>(n, t);
    rule.nodes(i) = t;
    rule.weights(i) = std::exp(-log_c);
  }
  // The rule is symmetric; enforce it exactly.
  for (int i = 0; i < n / 2; ++i) {
    const Real t = (rule.nodes(n - 1 - i) - rule.nodes(i)) / 2;
    const Real w = (rule.weights(n - 1 - i) + rule.weights(i)) / 2;
    rule.nodes(i) = -t;
    rule.nodes(n - 1 - i) = t;
    rule.weights(i) = rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0;
  return rule;
}

/// Rule for E[f(psi)] with psi ~ N(0, sigma^2): nodes psi_k = sqrt(2) sigma t_k,
/// weights w_k / sqrt(pi), renormalized to sum to one.
template <typename Real = double>
QuadratureRule<Real> gaussian_phase_rule(Real sigma, int n) {
  QuadratureRule<Real> rule = gauss_hermite<Real>(n);
  rule.nodes *= std::sqrt(Real(2)) * sigma;
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace phasediff
