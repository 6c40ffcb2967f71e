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

// Homodyne outcome densities from Fock-basis density matrices.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "phasediff/metrology.hpp"

namespace phasediff {

/// Uniform grid of quadrature outcomes (vacuum variance 1/2 units).
struct QuadratureGrid {
  double y_min = -6.0;
  double y_max = 6.0;
  int n_points = 2001;

  template <typename Real = double>
  OutcomeGrid<Real> outcome_grid() const {
    return trapezoid_grid<Real>(static_cast<Real>(y_min), static_cast<Real>(y_max), n_points);
  }

  friend bool operator==(const QuadratureGrid&, const QuadratureGrid&) = default;
};

/// Hermite functions psi_0..psi_{count-1} at y, by the normalized three-term
/// recurrence with running rescaling (no overflow for large n or |y|).
template <typename Real = double>
RealVector<Real> quadrature_wavefunctions(int count, Real y) {
  RealVector<Real> out(count);
  if (count == 0) return out;
  Real prev = 0;
  Real cur = std::pow(std::numbers::pi_v<Real>, Real(-0.25));
  Real log_scale = -y * y / 2;
  for (int n = 0; n < count; ++n) {
    out(n) = cur * std::exp(log_scale);
    const Real next =
        std::sqrt(Real(2) / (n + 1)) * y * cur - std::sqrt(Real(n) / (n + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > Real(1e100)) {
      cur *= Real(1e-100);
      prev *= Real(1e-100);
      log_scale += Real(100) * std::log(Real(10));
    }
  }
  return out;
}

/// psi_n(y) = pi^{-1/4} (2^n n!)^{-1/2} H_n(y) e^{-y^2/2}.
template <typename Real = double>
Real quadrature_wavefunction(int n, Real y) {
  if (n < 0) throw std::out_of_range("quadrature_wavefunction: negative level");
  return quadrature_wavefunctions<Real>(n + 1, y)(n);
}

/// First two moments of the rotated quadrature X_phi.
template <typename Real = double>
std::pair<Real, Real> quadrature_moments(const DensityMatrix<Real>& rho, Real phi) {
  const Operator<Real> q = quadrature_op<Real>(phi, rho.config());
  const Real mean = expectation(rho, q).real();
  const Real second = expectation<Real>(rho, q * q).real();
  return {mean, second - mean * mean};
}

/// y in [mu - 8 s, mu + 8 s] with 2001 points, from the state's moments.
template <typename Real = double>
QuadratureGrid default_grid(const DensityMatrix<Real>& rho, Real phi, int n_points = 2001,
                            double half_width_sd = 8.0) {
  const auto [mean, var] = quadrature_moments(rho, phi);
  const double mu = static_cast<double>(mean);
  const double s = std::sqrt(std::max(static_cast<double>(var), 0.0));
  return QuadratureGrid{mu - half_width_sd * s, mu + half_width_sd * s, n_points};
}

/// Throws unless the grid covers mu +/- 6 s of the state's X_phi distribution.
template <typename Real = double>
void require_grid_covers(const DensityMatrix<Real>& rho, Real phi, const QuadratureGrid& grid) {
  const auto [mean, var] = quadrature_moments(rho, phi);
  const double s = std::sqrt(std::max(static_cast<double>(var), 0.0));
  const double mu = static_cast<double>(mean);
  if (grid.y_min > mu - 6 * s || grid.y_max < mu + 6 * s)
    throw std::invalid_argument("homodyne grid does not span +/-6 standard deviations");
}

/// Evaluates X_phi outcome densities of states of one dimension on a fixed
/// grid; the Hermite-function table is built once.
template <typename Real = double>
class HomodyneEvaluator {
 public:
  HomodyneEvaluator(int dim, const QuadratureGrid& grid)
      : grid_(grid), outcomes_(grid.outcome_grid<Real>()), table_(dim, grid.n_points) {
    for (int j = 0; j < grid.n_points; ++j)
      table_.col(j) = quadrature_wavefunctions<Real>(dim, outcomes_.points(j));
  }

  const OutcomeGrid<Real>& outcomes() const { return outcomes_; }
  const QuadratureGrid& grid() const { return grid_; }

  /// p(y) = sum_mn [U(phi) rho U(phi)^dag]_mn psi_m(y) psi_n(y). Throws
  /// NumericalError if the density leaks off the grid or goes negative.
  RealVector<Real> pdf(const DensityMatrix<Real>& rho, Real phi) const {
    if (rho.dim() != table_.rows()) throw DimensionError("homodyne_pdf: dimension mismatch");
    const RealMatrix<Real> rotated = encode_phase(rho, phi).matrix().real();
    const RealMatrix<Real> t = rotated * table_;
    RealVector<Real> p = table_.cwiseProduct(t).colwise().sum().transpose();
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (p(j) < Real(-1e-10))
        throw NumericalError("homodyne_pdf: negative density " +
                             std::to_string(static_cast<double>(p(j))));
      if (p(j) < 0) p(j) = 0;
    }
    const Real norm_err = std::abs(outcomes_.weights.dot(p) - Real(1));
    if (norm_err > Real(kNormalizationTol))
      throw NumericalError("homodyne_pdf: normalization error " +
                           std::to_string(static_cast<double>(norm_err)) +
                           " on the grid; widen it");
    return p;
  }

 private:
  QuadratureGrid grid_;
  OutcomeGrid<Real> outcomes_;
  RealMatrix<Real> table_;
};

template <typename Real = double>
RealVector<Real> homodyne_pdf(const DensityMatrix<Real>& rho, Real phi, const QuadratureGrid& grid) {
  require_grid_covers(rho, phi, grid);
  return HomodyneEvaluator<Real>(rho.dim(), grid).pdf(rho, phi);
}

/// Y quadrature.
inline constexpr double kPhaseQuadrature = std::numbers::pi / 2;

/// Classical FI of X_phi homodyne on the family U(theta) rho U(theta)^dag.
/// Without an explicit grid the default grid of rho_theta is used.
template <typename Real = double>
FiEstimate<Real> fi_homodyne(const DensityMatrix<Real>& rho, Real theta = 0,
                             std::optional<QuadratureGrid> grid = std::nullopt,
                             Real derivative_step = Real(0.005),
                             Real phi = Real(kPhaseQuadrature)) {
  const DensityMatrix<Real> encoded = encode_phase(rho, theta);
  const QuadratureGrid g = grid ? *grid : default_grid<Real>(encoded, phi);
  require_grid_covers(encoded, phi, g);
  const HomodyneEvaluator<Real> eval(rho.dim(), g);
  // U(phi) U(t) rho U(t)^dag U(phi)^dag = U(phi + t) rho U(phi + t)^dag.
  auto family = [&](Real t) { return eval.pdf(rho, phi + t); };
  return fisher_information<Real>(family, eval.outcomes(), theta, derivative_step);
}

template <typename Real = double>
FiEstimate<Real> fi_homodyne(const ScenarioSpec& spec, Real theta, const TruncationConfig& cfg,
                             std::optional<QuadratureGrid> grid = std::nullopt,
                             Real derivative_step = Real(0.005)) {
  return fi_homodyne<Real>(prepare_scenario<Real>(spec, cfg), theta, grid, derivative_step);
}

}  // namespace phasediff
