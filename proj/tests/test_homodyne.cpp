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

#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phasediff/homodyne.hpp"

using namespace phasediff;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr auto kA = ScenarioOrder::SqueezeThenDephase;
constexpr auto kB = ScenarioOrder::DephaseThenSqueeze;
constexpr double kY = std::numbers::pi / 2;

ScenarioSpec spec_of(double alpha, double r, double sigma2, ScenarioOrder order) {
  return ScenarioSpec{{alpha, r}, PhaseNoise::from_variance(sigma2), order};
}

}  // namespace

TEST_CASE("Hermite functions", "[homodyne]") {
  CHECK_THAT(quadrature_wavefunction(0, 0.0), WithinAbs(std::pow(std::numbers::pi, -0.25), 1e-15));
  CHECK_THAT(quadrature_wavefunction(0, 0.0), WithinAbs(0.751126, 1e-6));
  CHECK(quadrature_wavefunction(1, 0.0) == 0.0);
  for (int n : {0, 1, 2, 5, 10, 15})
    for (double y : {-3.1, -0.4, 0.0, 1.7, 4.2})
      CHECK_THAT(quadrature_wavefunction(n, y), WithinAbs(oracle::hermite_function(n, y), 1e-12));
}

TEST_CASE("Hermite functions are orthonormal", "[homodyne]") {
  const OutcomeGrid<> grid = trapezoid_grid(-12.0, 12.0, 4001);
  RealMatrix<> table(51, grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j)
    table.col(j) = quadrature_wavefunctions(51, grid.points(j));
  const RealMatrix<> gram = table * grid.weights.asDiagonal() * table.transpose();
  CHECK((gram - RealMatrix<>::Identity(51, 51)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("Hermite functions stay finite at high order", "[homodyne]") {
  for (double y : {-40.0, -25.0, 0.3, 33.0, 40.0}) {
    const RealVector<> v = quadrature_wavefunctions(600, y);
    CHECK(v.allFinite());
    CHECK(v.cwiseAbs().maxCoeff() < 1.0);
  }
  // Near the classical turning point of n = 599 the function is O(n^{-1/12}).
  CHECK(std::abs(quadrature_wavefunction(599, std::sqrt(2.0 * 599 + 1) - 1)) > 1e-3);
}

TEST_CASE("homodyne densities of Gaussian states", "[homodyne]") {
  const TruncationConfig cfg(120);

  SECTION("vacuum") {
    const DensityMatrix<> vac = DensityMatrix<>::fock(0, cfg);
    for (double phi : {0.0, 0.9, kY}) {
      const QuadratureGrid grid{-6.0, 6.0, 2001};
      const RealVector<> p = homodyne_pdf(vac, phi, grid);
      CHECK_THAT(p(1000), WithinAbs(1 / std::sqrt(std::numbers::pi), 1e-12));
      CHECK_THAT(p(1000), WithinAbs(0.564190, 1e-6));
    }
  }

  SECTION("coherent state along X") {
    const DensityMatrix<> coh = coherent_state(2.0, cfg);
    const QuadratureGrid grid = default_grid(coh, 0.0);
    const RealVector<> p = homodyne_pdf(coh, 0.0, grid);
    const OutcomeGrid<> g = grid.outcome_grid();
    for (Eigen::Index i = 0; i < g.size(); i += 50)
      CHECK_THAT(p(i), WithinAbs(oracle::normal_pdf(g.points(i), 2 * std::sqrt(2.0), 0.5), 1e-10));
  }

  SECTION("squeezed vacuum along Y") {
    const DensityMatrix<> sq = squeezed_displaced_state({0.0, 0.5}, cfg);
    const QuadratureGrid grid = default_grid(sq, kY);
    const RealVector<> p = homodyne_pdf(sq, kY, grid);
    const OutcomeGrid<> g = grid.outcome_grid();
    const double var = std::exp(-1.0) / 2;
    CHECK_THAT(var, WithinAbs(0.18394, 1e-5));
    for (Eigen::Index i = 0; i < g.size(); i += 50)
      CHECK_THAT(p(i), WithinAbs(oracle::normal_pdf(g.points(i), 0.0, var), 1e-10));
  }
}

TEST_CASE("homodyne moments match operator expectations", "[homodyne][property]") {
  const TruncationConfig cfg(200);
  for (auto order : {kA, kB})
    for (double phi : {0.0, 0.6, kY}) {
      const DensityMatrix<> rho = prepare_scenario(spec_of(2.0, 0.6, 0.1, order), cfg);
      const QuadratureGrid grid = default_grid(rho, phi);
      const RealVector<> p = homodyne_pdf(rho, phi, grid);
      const OutcomeGrid<> g = grid.outcome_grid();
      const double m1 = g.weights.dot(p.cwiseProduct(g.points));
      const double m2 = g.weights.dot(p.cwiseProduct(g.points.cwiseAbs2()));
      const Operator<> q = quadrature_op(phi, cfg);
      const double e1 = expectation(rho, q).real();
      const double e2 = expectation<double>(rho, q * q).real();
      INFO("order=" << to_string(order) << " phi=" << phi);
      CHECK(std::abs(m1 - e1) <= 1e-6 * std::max(1.0, std::abs(e1)));
      CHECK_THAT(m2, WithinRel(e2, 1e-6));
    }
}

TEST_CASE("homodyne densities are phase covariant", "[homodyne][property]") {
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  const TruncationConfig cfg(150);
  const DensityMatrix<> rho = prepare_scenario(spec_of(1.5, 0.5, 0.1, kB), cfg);
  const QuadratureGrid grid{-10.0, 10.0, 801};
  const HomodyneEvaluator<> eval(cfg.n_max, grid);
  for (int trial = 0; trial < 5; ++trial) {
    const double theta = angle(gen), phi = angle(gen);
    const RealVector<> lhs = eval.pdf(encode_phase(rho, theta), phi);
    const RealVector<> rhs = eval.pdf(rho, phi + theta);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("homodyne grid checks", "[homodyne]") {
  const TruncationConfig cfg(120);
  const DensityMatrix<> coh = coherent_state(3.0, cfg);
  CHECK_THROWS_AS(homodyne_pdf(coh, 0.0, QuadratureGrid{-2.0, 2.0, 401}), std::invalid_argument);
  // Covers +/-6 sd but too coarse to normalize to 1e-6.
  const QuadratureGrid coarse{4.24 - 4.3, 4.24 + 4.3, 5};
  CHECK_THROWS_AS(homodyne_pdf(coh, 0.0, coarse), NumericalError);
  const QuadratureGrid g = default_grid(coh, 0.0);
  CHECK(g.n_points == 2001);
  CHECK_THAT(g.y_max - g.y_min, WithinRel(16 * std::sqrt(0.5), 1e-9));
}

TEST_CASE("noiseless Y-homodyne Fisher information", "[homodyne][fi]") {
  const TruncationConfig cfg(200);
  const FiEstimate<> coh = fi_homodyne<double>(spec_of(2.0, 0.0, 0.0, kA), 0.0, cfg);
  CHECK_THAT(coh.value, WithinRel(16.0, 0.01));
  CHECK(coh.derivative_step == 0.005);
  CHECK(coh.n_points == 2001);

  const FiEstimate<> vac = fi_homodyne<double>(spec_of(0.0, 0.0, 0.0, kA), 0.0, cfg);
  CHECK_THAT(vac.value, WithinAbs(0.0, 1e-9));

  for (ProbeParams p : {ProbeParams{1.0, 0.5}, ProbeParams{2.0, -0.5}, ProbeParams{1.5, 1.0}}) {
    const FiEstimate<> f = fi_homodyne<double>(ScenarioSpec{p, PhaseNoise(0.0), kA}, 0.0, cfg);
    CHECK_THAT(f.value, WithinRel(fi_homodyne_noiseless_analytic(p), 0.01));
  }
}

TEST_CASE("Y is the better quadrature at theta = 0", "[homodyne][fi]") {
  const TruncationConfig cfg(200);
  for (ProbeParams p : {ProbeParams{1.0, 0.3}, ProbeParams{2.0, 0.8}, ProbeParams{2.0, 0.0}}) {
    const DensityMatrix<> rho = squeezed_displaced_state(p, cfg);
    const double fy = fi_homodyne<double>(rho, 0.0, std::nullopt, 0.005, kY).value;
    const double fx = fi_homodyne<double>(rho, 0.0, std::nullopt, 0.005, 0.0).value;
    CHECK(fy >= fx);
  }
}

TEST_CASE("scenarios coincide without squeezing", "[homodyne][fi]") {
  const TruncationConfig cfg(200);
  const double fa = fi_homodyne<double>(spec_of(4.0, 0.0, 0.1, kA), 0.0, cfg).value;
  const double fb = fi_homodyne<double>(spec_of(4.0, 0.0, 0.1, kB), 0.0, cfg).value;
  CHECK_THAT(fa, WithinRel(fb, 0.005));
}

TEST_CASE("homodyne FI never exceeds the QFI", "[homodyne][fi][property]") {
  const TruncationConfig cfg(200);
  for (auto order : {kA, kB})
    for (ProbeParams p : {ProbeParams{1.0, 0.5}, ProbeParams{2.0, 1.0}, ProbeParams{2.5, 0.2}})
      for (double sigma2 : {0.0, 0.05, 0.2})
        for (double theta : {0.0, 0.2}) {
          const DensityMatrix<> rho =
              prepare_scenario(ScenarioSpec{p, PhaseNoise::from_variance(sigma2), order}, cfg);
          const double h = qfi_from_fidelity(rho, theta).value;
          const double f = fi_homodyne(rho, theta).value;
          INFO("order=" << to_string(order) << " alpha=" << p.alpha << " r=" << p.r
                        << " s2=" << sigma2 << " theta=" << theta);
          CHECK(f <= 1.02 * h);
        }
}
