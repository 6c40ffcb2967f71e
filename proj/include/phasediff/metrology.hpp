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

// Fidelity, quantum Fisher information from the fidelity limit, classical
// Fisher information of outcome densities, and Cramer-Rao bounds.

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "phasediff/channels.hpp"

namespace phasediff {

/// Eigenvalues below this are treated as zero when forming state square roots.
inline constexpr double kClipThreshold = 1e-12;

/// Square root of a density matrix restricted to its numerical support:
/// sqrt(rho) = basis * diag(root) * basis^dag, with `basis` holding only the
/// eigenvectors whose eigenvalue exceeds kClipThreshold.
template <typename Real = double>
struct StateRoot {
  Operator<Real> basis;
  RealVector<Real> root;
  /// Total weight of the discarded eigenvalues (absolute values).
  Real clipped = 0;

  Eigen::Index rank() const { return root.size(); }
};

template <typename Real = double>
StateRoot<Real> state_root(const Operator<Real>& rho) {
  Eigen::SelfAdjointEigenSolver<Operator<Real>> es(rho);
  if (es.info() != Eigen::Success) throw NumericalError("state_root: eigendecomposition failed");
  const auto& lambda = es.eigenvalues();
  const Eigen::Index n = lambda.size();
  // Eigenvalues come sorted ascending; the support is a trailing block.
  Eigen::Index first = 0;
  StateRoot<Real> out;
  while (first < n && lambda(first) <= Real(kClipThreshold)) {
    out.clipped += std::abs(lambda(first));
    ++first;
  }
  out.basis = es.eigenvectors().rightCols(n - first);
  out.root = lambda.tail(n - first).cwiseSqrt();
  return out;
}

template <typename Real = double>
StateRoot<Real> state_root(const DensityMatrix<Real>& rho) {
  return state_root<Real>(rho.matrix());
}

/// Root of U(theta) rho U(theta)^dag from the root of rho (exact: rotating
/// the eigenvectors).
template <typename Real = double>
StateRoot<Real> rotate_root(const StateRoot<Real>& r, Real theta) {
  StateRoot<Real> out = r;
  for (Eigen::Index n = 0; n < out.basis.rows(); ++n)
    out.basis.row(n) *= std::polar(Real(1), -theta * static_cast<Real>(n));
  return out;
}

enum class FidelityMethod {
  /// Sum of singular values of sqrt(rho) sqrt(tau).
  SingularValues,
  /// Sum of square roots of the eigenvalues of sqrt(rho) tau sqrt(rho).
  ProductEigenvalues,
};

/// Uhlmann fidelity Tr sqrt(sqrt(rho) tau sqrt(rho)) from the two roots.
///
/// Both methods reduce to the rank(rho) x rank(tau) core
/// C = diag(root_rho) V_rho^dag V_tau diag(root_tau): the eigenvalues of
/// sqrt(rho) tau sqrt(rho) are the nonzero eigenvalues of C C^dag, i.e. the
/// squared singular values of C.
template <typename Real = double>
Real fidelity(const StateRoot<Real>& rho, const StateRoot<Real>& tau,
              FidelityMethod method = FidelityMethod::SingularValues) {
  if (rho.basis.rows() != tau.basis.rows())
    throw DimensionError("fidelity: state dimensions differ");
  if (rho.rank() == 0 || tau.rank() == 0) return Real(0);
  const Operator<Real> core =
      rho.root.asDiagonal() * (rho.basis.adjoint() * tau.basis) * tau.root.asDiagonal();
  Real f = 0;
  if (method == FidelityMethod::SingularValues) {
    Eigen::BDCSVD<Operator<Real>> svd(core);
    f = svd.singularValues().sum();
  } else {
    Eigen::SelfAdjointEigenSolver<Operator<Real>> es(core * core.adjoint(),
                                                     Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("fidelity: eigendecomposition failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      f += std::sqrt(std::max(es.eigenvalues()(i), Real(0)));
  }
  return f;
}

template <typename Real = double>
Real fidelity(const DensityMatrix<Real>& rho, const DensityMatrix<Real>& tau,
              FidelityMethod method = FidelityMethod::SingularValues) {
  if (rho.dim() != tau.dim()) throw DimensionError("fidelity: state dimensions differ");
  return fidelity<Real>(state_root(rho), state_root(tau), method);
}

enum class EstimateStatus { Reliable, Unreliable };

inline std::string_view to_string(EstimateStatus s) {
  return s == EstimateStatus::Reliable ? "ok" : "unreliable";
}

template <typename Real = double>
struct QfiEstimate {
  Real value = 0;
  Real delta_theta = 0;
  /// |H(delta/2) - H(delta)| / max(H(delta), 1e-6).
  Real richardson_check = 0;
  /// 8(1 - F(rho_theta, rho_{theta+delta})) / delta^2.
  Real one_sided_value = 0;
  /// Relative gap between the one-sided and the central estimate.
  Real one_sided_check = 0;
  Real clipped = 0;
  EstimateStatus status = EstimateStatus::Reliable;

  bool reliable() const { return status == EstimateStatus::Reliable; }
};

/// Relative tolerance on the step-halving and one-sided checks.
inline constexpr double kQfiReliabilityTol = 0.02;

/// QFI of the family theta -> U(theta) rho U(theta)^dag, as
/// 8(1 - F(rho_{theta-d/2}, rho_{theta+d/2})) / d^2.
template <typename Real = double>
QfiEstimate<Real> qfi_from_fidelity(const DensityMatrix<Real>& rho, Real theta = 0,
                                    Real delta_theta = Real(0.005)) {
  if (!(delta_theta > 0 && delta_theta <= Real(0.1)))
    throw std::invalid_argument("qfi_from_fidelity: delta_theta must lie in (0, 0.1]");
  const StateRoot<Real> root = state_root(rho);
  auto central = [&](Real d) {
    const Real f = fidelity(rotate_root(root, theta - d / 2), rotate_root(root, theta + d / 2));
    return 8 * (1 - f) / (d * d);
  };
  QfiEstimate<Real> est;
  est.delta_theta = delta_theta;
  est.clipped = root.clipped;
  const Real h = central(delta_theta);
  const Real h_half = central(delta_theta / 2);
  const Real f_one = fidelity(rotate_root(root, theta), rotate_root(root, theta + delta_theta));
  est.one_sided_value = std::max(Real(0), 8 * (1 - f_one) / (delta_theta * delta_theta));
  est.value = std::max(Real(0), h);
  const Real scale = std::max(std::abs(h), Real(1e-6));
  est.richardson_check = std::abs(h_half - h) / scale;
  est.one_sided_check = std::abs(est.one_sided_value - est.value) / scale;
  if (est.richardson_check > Real(kQfiReliabilityTol) ||
      est.one_sided_check > Real(kQfiReliabilityTol))
    est.status = EstimateStatus::Unreliable;
  return est;
}

template <typename Real = double>
QfiEstimate<Real> qfi_from_fidelity(const ScenarioSpec& spec, Real theta, Real delta_theta,
                                    const TruncationConfig& cfg) {
  return qfi_from_fidelity<Real>(prepare_scenario<Real>(spec, cfg), theta, delta_theta);
}

/// Pure-probe QFI [cosh(4r) - 1] + 4 e^{4r} alpha^2.
template <typename Real = double>
Real qfi_pure_analytic(const ProbeParams& p) {
  const Real r = static_cast<Real>(p.r);
  const Real a = static_cast<Real>(p.alpha);
  return (std::cosh(4 * r) - 1) + 4 * std::exp(4 * r) * a * a;
}

/// Noiseless Y-homodyne Fisher information at theta = 0: 4 e^{4r} alpha^2.
template <typename Real = double>
Real fi_homodyne_noiseless_analytic(const ProbeParams& p) {
  const Real a = static_cast<Real>(p.alpha);
  return 4 * std::exp(4 * static_cast<Real>(p.r)) * a * a;
}

/// Sample points and integration weights of a one-dimensional outcome space.
template <typename Real = double>
struct OutcomeGrid {
  RealVector<Real> points;
  RealVector<Real> weights;

  Eigen::Index size() const { return points.size(); }
};

/// Composite trapezoidal rule on [lo, hi] with n points.
template <typename Real = double>
OutcomeGrid<Real> trapezoid_grid(Real lo, Real hi, int n) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("trapezoid_grid: need n >= 2 and hi > lo");
  OutcomeGrid<Real> g;
  g.points = RealVector<Real>::LinSpaced(n, lo, hi);
  const Real h = (hi - lo) / (n - 1);
  g.weights = RealVector<Real>::Constant(n, h);
  g.weights(0) = g.weights(n - 1) = h / 2;
  return g;
}

template <typename Real = double>
struct FiEstimate {
  Real value = 0;
  Real y_min = 0;
  Real y_max = 0;
  int n_points = 0;
  Real derivative_step = 0;
  /// Largest |sum_i w_i p_i - 1| over the three evaluated densities.
  Real normalization_error = 0;
};

/// Points where the density falls below this are left out of the FI sum.
inline constexpr double kPdfFloor = 1e-12;
inline constexpr double kNormalizationTol = 1e-6;

/// F = sum_i w_i (dp_i/dtheta)^2 / p_i with a central difference of step
/// `step`. `pdf(theta)` must return densities on `grid.points`.
template <typename Real, typename PdfFamily>
FiEstimate<Real> fisher_information(PdfFamily&& pdf, const OutcomeGrid<Real>& grid, Real theta,
                                    Real step) {
  if (!(step > 0)) throw std::invalid_argument("fisher_information: step must be positive");
  const RealVector<Real> p0 = pdf(theta);
  const RealVector<Real> pp = pdf(theta + step);
  const RealVector<Real> pm = pdf(theta - step);
  if (p0.size() != grid.size() || pp.size() != grid.size() || pm.size() != grid.size())
    throw DimensionError("fisher_information: density does not match the grid");

  FiEstimate<Real> est;
  est.derivative_step = step;
  est.n_points = static_cast<int>(grid.size());
  est.y_min = grid.points(0);
  est.y_max = grid.points(grid.size() - 1);
  for (const RealVector<Real>* p : {&p0, &pp, &pm})
    est.normalization_error =
        std::max(est.normalization_error, std::abs(grid.weights.dot(*p) - Real(1)));
  if (est.normalization_error > Real(kNormalizationTol))
    throw NumericalError("fisher_information: density is not normalized on the grid (error " +
                         std::to_string(static_cast<double>(est.normalization_error)) + ")");

  Real f = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (p0(i) < Real(kPdfFloor)) continue;
    const Real dp = (pp(i) - pm(i)) / (2 * step);
    f += grid.weights(i) * dp * dp / p0(i);
  }
  est.value = f;
  return est;
}

/// Cramer-Rao variance bound 1 / (M * info).
inline double cramer_rao_variance(double info, long long repetitions) {
  if (!(info > 0)) throw std::invalid_argument("cramer_rao_variance: information must be positive");
  if (repetitions < 1) throw std::invalid_argument("cramer_rao_variance: repetitions must be >= 1");
  return 1.0 / (static_cast<double>(repetitions) * info);
}

/// zeta_H = H_(a)/H_(b), zeta_F = F_(a)/F_(b), plus the inverse ratios.
struct ScenarioRatios {
  double zeta_h = 0.0;
  double zeta_f = 0.0;
  double h_b_over_a = 0.0;
  double f_b_over_a = 0.0;
  /// H_(b) >= H_(a).
  bool b_favoured = false;
};

template <typename Real = double>
ScenarioRatios scenario_ratios(const QfiEstimate<Real>& h_a, const QfiEstimate<Real>& h_b,
                               const FiEstimate<Real>& f_a, const FiEstimate<Real>& f_b) {
  if (!h_a.reliable() || !h_b.reliable())
    throw NumericalError("scenario_ratios: QFI estimate flagged unreliable");
  constexpr double tiny = 1e-12;
  const double ha = static_cast<double>(h_a.value), hb = static_cast<double>(h_b.value);
  const double fa = static_cast<double>(f_a.value), fb = static_cast<double>(f_b.value);
  if (ha <= tiny || hb <= tiny) throw NumericalError("scenario_ratios: vanishing QFI");
  if (fa <= tiny || fb <= tiny) throw NumericalError("scenario_ratios: vanishing FI");
  ScenarioRatios out;
  out.zeta_h = ha / hb;
  out.zeta_f = fa / fb;
  out.h_b_over_a = hb / ha;
  out.f_b_over_a = fb / fa;
  out.b_favoured = hb >= ha;
  return out;
}

}  // namespace phasediff
