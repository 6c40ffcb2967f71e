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

// Phase-diffusion channel and the two probe-preparation orderings.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "phasediff/fock.hpp"
#include "phasediff/quadrature.hpp"

namespace phasediff {

/// Gaussian random phase with standard deviation `sigma` (radians), averaged
/// with a `nodes`-point Gauss-Hermite rule when evaluated by quadrature.
struct PhaseNoise {
  double sigma = 0.0;
  int nodes = 101;

  PhaseNoise() = default;
  explicit PhaseNoise(double s, int n = 101) : sigma(s), nodes(n) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("PhaseNoise: sigma must be >= 0");
    if (nodes < 1) throw std::invalid_argument("PhaseNoise: nodes must be >= 1");
  }

  static PhaseNoise from_variance(double sigma2, int n = 101) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("PhaseNoise: sigma^2 must be >= 0");
    return PhaseNoise(std::sqrt(sigma2), n);
  }

  double variance() const { return sigma * sigma; }
  /// Gamma t of the dephasing master equation, from sigma^2 = 2 (Gamma t)^2.
  double gamma_t() const { return sigma / std::sqrt(2.0); }

  friend bool operator==(const PhaseNoise&, const PhaseNoise&) = default;
};

enum class ScenarioOrder {
  SqueezeThenDephase,  // (a): E_sigma(S D |0><0| D^dag S^dag)
  DephaseThenSqueeze,  // (b): S E_sigma(|alpha><alpha|) S^dag
};

inline std::string_view to_string(ScenarioOrder o) {
  return o == ScenarioOrder::SqueezeThenDephase ? "a" : "b";
}

inline ScenarioOrder parse_scenario(std::string_view s) {
  if (s == "a") return ScenarioOrder::SqueezeThenDephase;
  if (s == "b") return ScenarioOrder::DephaseThenSqueeze;
  throw std::invalid_argument("unknown scenario '" + std::string(s) + "' (expected a or b)");
}

struct ScenarioSpec {
  ProbeParams probe;
  PhaseNoise noise;
  ScenarioOrder order = ScenarioOrder::SqueezeThenDephase;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// rho_mn -> rho_mn exp(-sigma^2 (m-n)^2 / 2).
template <typename Real = double>
DensityMatrix<Real> dephase_analytic(const DensityMatrix<Real>& rho, const PhaseNoise& noise) {
  if (noise.sigma == 0.0) return rho;
  const int dim = rho.dim();
  const Real half_var = static_cast<Real>(noise.variance()) / 2;
  RealVector<Real> damping(dim);
  for (int d = 0; d < dim; ++d) damping(d) = std::exp(-half_var * Real(d) * Real(d));
  Operator<Real> out = rho.matrix();
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) out(m, n) *= damping(std::abs(m - n));
  return DensityMatrix<Real>(std::move(out), rho.config());
}

namespace detail {

/// Largest |m - n| whose diagonal holds an entry above `floor`.
template <typename Real>
int coherence_bandwidth(const Operator<Real>& rho, Real floor) {
  for (Eigen::Index d = rho.rows() - 1; d > 0; --d)
    if (rho.diagonal(d).cwiseAbs().maxCoeff() > floor ||
        rho.diagonal(-d).cwiseAbs().maxCoeff() > floor)
      return static_cast<int>(d);
  return 0;
}

/// Odd node count at which Gauss-Hermite integrates cos(w t) e^{-t^2} to
/// about 1e-10 for all w <= w_max (empirically n ~ 0.15 w_max^2).
inline int resolving_nodes(double w_max) {
  return static_cast<int>(std::ceil(0.2 * w_max * w_max + 2.0 * w_max + 31.0)) | 1;
}

}  // namespace detail

/// Gauss-Hermite average of U(psi) rho U(psi)^dag over psi ~ N(0, sigma^2).
/// Uses noise.nodes, raised as needed to resolve every coherence of rho above
/// 1e-9; throws NumericalError if the result still differs from the closed
/// form by more than 1e-8.
template <typename Real = double>
DensityMatrix<Real> dephase_quadrature(const DensityMatrix<Real>& rho, const PhaseNoise& noise) {
  if (noise.sigma == 0.0) return rho;
  const int dim = rho.dim();
  const int band = detail::coherence_bandwidth(rho.matrix(), Real(1e-9));
  const int nodes =
      std::max(noise.nodes, detail::resolving_nodes(std::sqrt(2.0) * noise.sigma * band));
  const QuadratureRule<Real> rule = gaussian_phase_rule<Real>(static_cast<Real>(noise.sigma), nodes);
  // U rho U^dag multiplies rho_mn by exp(-i psi (m - n)); the averaged kernel
  // depends on d = m - n only and is the conjugate for -d.
  Ket<Real> kernel(dim);
  for (int d = 0; d < dim; ++d) {
    Complex<Real> acc(0);
    for (Eigen::Index k = 0; k < rule.size(); ++k)
      acc += rule.weights(k) * std::polar(Real(1), -rule.nodes(k) * d);
    kernel(d) = acc;
  }
  Operator<Real> out = rho.matrix();
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) {
      const int d = m - n;
      out(m, n) *= d >= 0 ? kernel(d) : std::conj(kernel(-d));
    }
  const DensityMatrix<Real> exact = dephase_analytic(rho, noise);
  const Real err = (out - exact.matrix()).cwiseAbs().maxCoeff();
  if (err > Real(1e-8)) {
    std::ostringstream os;
    os << "dephase_quadrature: " << nodes << " nodes insufficient at sigma " << noise.sigma
       << " (max entry error " << static_cast<double>(err) << ")";
    throw NumericalError(os.str());
  }
  return DensityMatrix<Real>(std::move(out), rho.config());
}

/// U(theta) rho U(theta)^dag, applied as rho_mn -> rho_mn exp(-i theta (m - n)).
template <typename Real = double>
DensityMatrix<Real> encode_phase(const DensityMatrix<Real>& rho, Real theta) {
  if (theta == Real(0)) return rho;
  const int dim = rho.dim();
  Ket<Real> phase(dim);
  for (int n = 0; n < dim; ++n) phase(n) = std::polar(Real(1), -theta * n);
  Operator<Real> out = phase.asDiagonal() * rho.matrix() * phase.conjugate().asDiagonal();
  return DensityMatrix<Real>(std::move(out), rho.config());
}

/// Probe state before phase encoding for the given ordering.
template <typename Real = double>
DensityMatrix<Real> prepare_scenario(const ScenarioSpec& spec, const TruncationConfig& cfg) {
  if (spec.order == ScenarioOrder::SqueezeThenDephase)
    return dephase_analytic(squeezed_displaced_state<Real>(spec.probe, cfg), spec.noise);

  const DensityMatrix<Real> seed =
      dephase_analytic(coherent_state<Real>(static_cast<Real>(spec.probe.alpha), cfg), spec.noise);
  if (spec.probe.r == 0.0) return seed;
  const Operator<Real> s = squeezing_op<Real>(static_cast<Real>(spec.probe.r), cfg);
  return DensityMatrix<Real>(s * seed.matrix() * s.adjoint(), cfg);
}

}  // namespace phasediff
