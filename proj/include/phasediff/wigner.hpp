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

// Wigner functions on phase-space grids. x and p are the eigenvalue scales of
// X and Y (vacuum variance 1/2), and W integrates to one over dx dp.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "phasediff/channels.hpp"
#include "phasediff/quadrature.hpp"

namespace phasediff {

struct PhaseSpaceGrid {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int nx = 101, np = 101;

  PhaseSpaceGrid() = default;
  PhaseSpaceGrid(double x0, double x1, int nx_, double p0, double p1, int np_)
      : x_min(x0), x_max(x1), p_min(p0), p_max(p1), nx(nx_), np(np_) {
    if (nx < 2 || np < 2 || !(x_max > x_min) || !(p_max > p_min))
      throw std::invalid_argument("PhaseSpaceGrid: need >= 2 points and increasing ranges");
  }

  double x(int i) const { return x_min + (x_max - x_min) * i / (nx - 1); }
  double p(int j) const { return p_min + (p_max - p_min) * j / (np - 1); }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dp() const { return (p_max - p_min) / (np - 1); }

  friend bool operator==(const PhaseSpaceGrid&, const PhaseSpaceGrid&) = default;
};

/// Field sampled on a PhaseSpaceGrid; entry (i, j) is W(x_i, p_j).
template <typename Real = double>
using WignerField = RealMatrix<Real>;

namespace detail {

// Recurrence coefficients of the normalized Laguerre functions
// f_n^(L)(X) = sqrt(n!/(n+L)!) X^{L/2} e^{-X/2} L_n^(L)(X), from
// (n+1) L_{n+1} = (2n+1+L-X) L_n - (n+L) L_{n-1}.
template <typename Real>
struct LaguerreTable {
  std::vector<int> diagonals;
  std::vector<RealVector<Real>> back;     // sqrt(n (n+L))
  std::vector<RealVector<Real>> inv_den;  // 1 / sqrt((n+1)(n+1+L))
  std::vector<Real> log_norm;             // -lgamma(L+1)/2

  LaguerreTable(const Operator<Real>& rho, Real skip_below) {
    const int dim = static_cast<int>(rho.rows());
    for (int d = 0; d < dim; ++d) {
      if (rho.diagonal(-d).cwiseAbs().maxCoeff() <= skip_below) continue;
      const int len = dim - d;
      RealVector<Real> b(len), inv(len);
      for (int n = 0; n < len; ++n) {
        b(n) = std::sqrt(Real(n) * Real(n + d));
        inv(n) = 1 / std::sqrt(Real(n + 1) * Real(n + 1 + d));
      }
      diagonals.push_back(d);
      back.push_back(std::move(b));
      inv_den.push_back(std::move(inv));
      log_norm.push_back(-std::lgamma(Real(d) + 1) / 2);
    }
  }
};

// sum_n rho_{n+L,n} (-1)^n f_n^(L)(X) along diagonal number k of the table,
// with running rescaling so that neither underflow of the seed nor growth of
// the recurrence loses the terms that matter.
template <typename Real>
Complex<Real> laguerre_diagonal_sum(const Operator<Real>& rho, const LaguerreTable<Real>& t,
                                    std::size_t k, Real big_x) {
  const int diag = t.diagonals[k];
  const RealVector<Real>& back = t.back[k];
  const RealVector<Real>& inv_den = t.inv_den[k];
  const Eigen::Index len = back.size();
  Real log_scale = (diag == 0 ? Real(0) : Real(diag) / 2 * std::log(big_x)) - big_x / 2 +
                   t.log_norm[k];
  Real factor = std::exp(log_scale);
  Real prev = 0, cur = 1;
  Complex<Real> even(0), odd(0);
  for (Eigen::Index n = 0; n < len; ++n) {
    const Complex<Real> term = rho(n + diag, n) * (cur * factor);
    if (n % 2 == 0) even += term; else odd += term;
    const Real next = ((2 * n + 1 + diag - big_x) * cur - back(n) * prev) * inv_den(n);
    prev = cur;
    cur = next;
    if (std::abs(cur) > Real(1e100)) {
      cur *= Real(1e-100);
      prev *= Real(1e-100);
      log_scale += Real(100) * std::log(Real(10));
      factor = std::exp(log_scale);
    }
  }
  return even - odd;
}

}  // namespace detail

/// W(x, p) = (1/pi) Tr[rho D(beta) Parity D(beta)^dag], beta = (x + ip)/sqrt(2),
/// summed diagonal by diagonal over the Fock matrix elements through the
/// Laguerre-series form of the Moyal elements. Diagonals whose entries are
/// all below 1e-18 in magnitude are skipped.
template <typename Real = double>
WignerField<Real> wigner_fock(const DensityMatrix<Real>& rho, const PhaseSpaceGrid& grid) {
  const Operator<Real>& m = rho.matrix();
  const detail::LaguerreTable<Real> table(m, Real(1e-18));

  WignerField<Real> w(grid.nx, grid.np);
  const Real inv_pi = 1 / std::numbers::pi_v<Real>;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.np; ++j) {
      const Real x = static_cast<Real>(grid.x(i)), p = static_cast<Real>(grid.p(j));
      const Real big_x = 2 * (x * x + p * p);  // 4 |beta|^2
      const Real angle = std::atan2(p, x);
      Real total = 0;
      for (std::size_t k = 0; k < table.diagonals.size(); ++k) {
        const int d = table.diagonals[k];
        const Complex<Real> s = detail::laguerre_diagonal_sum<Real>(m, table, k, big_x);
        // (2 conj(beta))^d / |2 beta|^d = e^{-i d angle}
        const Real part = (s * std::polar(Real(1), -angle * d)).real();
        total += d == 0 ? part : 2 * part;
      }
      w(i, j) = total * inv_pi;
    }
  }
  return w;
}

/// Gaussian state in phase space: mean vector and covariance matrix.
template <typename Real = double>
struct GaussianMoments {
  Eigen::Matrix<Real, 2, 1> mean;
  Eigen::Matrix<Real, 2, 2> cov;
};

/// Components and weights of the dephased probe as a Gaussian mixture.
template <typename Real = double>
struct GaussianMixture {
  std::vector<GaussianMoments<Real>> components;
  std::vector<Real> weights;
};

/// Phase-space rotation implementing U(psi) = exp(-i psi n): (x + ip) -> (x + ip) e^{-i psi}.
template <typename Real>
Eigen::Matrix<Real, 2, 2> phase_rotation(Real psi) {
  Eigen::Matrix<Real, 2, 2> rot;
  rot << std::cos(psi), std::sin(psi), -std::sin(psi), std::cos(psi);
  return rot;
}

/// Mixture components lighter than this are dropped; their total contribution
/// to W stays far below double rounding of the field.
inline constexpr double kNegligibleWeight = 1e-18;

template <typename Real = double>
GaussianMixture<Real> gaussian_mixture(const ScenarioSpec& spec, int n_components) {
  if (n_components < 1) throw std::invalid_argument("gaussian_mixture: need at least one component");
  const Real r = static_cast<Real>(spec.probe.r);
  const Real alpha = static_cast<Real>(spec.probe.alpha);
  const Eigen::Matrix<Real, 2, 2> squeeze =
      Eigen::Matrix<Real, 2, 1>(std::exp(r), std::exp(-r)).asDiagonal();
  const Eigen::Matrix<Real, 2, 1> coherent_mean(std::sqrt(Real(2)) * alpha, 0);
  const Eigen::Matrix<Real, 2, 2> vacuum_cov = Eigen::Matrix<Real, 2, 2>::Identity() / 2;

  const QuadratureRule<Real> rule = spec.noise.sigma == 0.0
      ? QuadratureRule<Real>{RealVector<Real>::Zero(1), RealVector<Real>::Ones(1)}
      : gaussian_phase_rule<Real>(static_cast<Real>(spec.noise.sigma), n_components);

  GaussianMixture<Real> mix;
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    if (rule.weights(k) < Real(kNegligibleWeight)) continue;
    const Eigen::Matrix<Real, 2, 2> rot = phase_rotation<Real>(rule.nodes(k));
    GaussianMoments<Real> g;
    if (spec.order == ScenarioOrder::SqueezeThenDephase) {
      g.mean = rot * squeeze * coherent_mean;
      g.cov = rot * squeeze * vacuum_cov * squeeze.transpose() * rot.transpose();
    } else {
      g.mean = squeeze * rot * coherent_mean;
      g.cov = squeeze * vacuum_cov * squeeze.transpose();
    }
    mix.components.push_back(g);
    mix.weights.push_back(rule.weights(k));
  }
  return mix;
}

/// Mixture size whose node spacing resolves each component's angular width
/// (spacing at most half the width), between 1 and `cap`.
inline int suggested_components(const ScenarioSpec& spec, int cap = 20000) {
  if (spec.noise.sigma == 0.0) return 1;
  const double alpha = std::max(std::abs(spec.probe.alpha), 1e-3);
  const double width = spec.order == ScenarioOrder::SqueezeThenDephase
                           ? std::exp(-2.0 * std::abs(spec.probe.r)) / (2.0 * alpha)
                           : 1.0 / (2.0 * alpha);
  const double ratio = 2.0 * std::numbers::pi * spec.noise.sigma / width;
  return std::clamp(static_cast<int>(std::ceil(ratio * ratio)), 101, cap);
}

/// W as a weighted sum of Gaussian Wigner functions, one per phase node.
template <typename Real = double>
WignerField<Real> wigner_gaussian_mixture(const ScenarioSpec& spec, const PhaseSpaceGrid& grid,
                                          int n_components) {
  const GaussianMixture<Real> mix = gaussian_mixture<Real>(spec, n_components);
  WignerField<Real> w = WignerField<Real>::Zero(grid.nx, grid.np);
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto& g = mix.components[k];
    const Eigen::Matrix<Real, 2, 2> inv = g.cov.inverse();
    const Real norm = mix.weights[k] / (2 * std::numbers::pi_v<Real> * std::sqrt(g.cov.determinant()));
    for (int i = 0; i < grid.nx; ++i) {
      const Real dx = static_cast<Real>(grid.x(i)) - g.mean(0);
      for (int j = 0; j < grid.np; ++j) {
        const Real dp = static_cast<Real>(grid.p(j)) - g.mean(1);
        const Real q = inv(0, 0) * dx * dx + 2 * inv(0, 1) * dx * dp + inv(1, 1) * dp * dp;
        w(i, j) += norm * std::exp(-q / 2);
      }
    }
  }
  return w;
}

/// Trapezoidal integral of the field over the grid.
template <typename Real = double>
Real wigner_integral(const WignerField<Real>& w, const PhaseSpaceGrid& grid) {
  RealVector<Real> wx = RealVector<Real>::Constant(grid.nx, static_cast<Real>(grid.dx()));
  RealVector<Real> wp = RealVector<Real>::Constant(grid.np, static_cast<Real>(grid.dp()));
  wx(0) /= 2, wx(grid.nx - 1) /= 2, wp(0) /= 2, wp(grid.np - 1) /= 2;
  return wx.dot(w * wp);
}

enum class MarginalAxis {
  X,  // integrate over p: density of X outcomes on the x grid
  P,  // integrate over x: density of Y outcomes on the p grid
};

template <typename Real = double>
RealVector<Real> wigner_marginal(const WignerField<Real>& w, const PhaseSpaceGrid& grid,
                                 MarginalAxis axis) {
  if (axis == MarginalAxis::X) {
    RealVector<Real> wp = RealVector<Real>::Constant(grid.np, static_cast<Real>(grid.dp()));
    wp(0) /= 2, wp(grid.np - 1) /= 2;
    return w * wp;
  }
  RealVector<Real> wx = RealVector<Real>::Constant(grid.nx, static_cast<Real>(grid.dx()));
  wx(0) /= 2, wx(grid.nx - 1) /= 2;
  return w.transpose() * wx;
}

}  // namespace phasediff
