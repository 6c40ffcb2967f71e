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

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>

#include "phasediff/sweep.hpp"

namespace phasediff {

namespace {

struct Check {
  std::string name;
  std::function<std::pair<bool, std::string>()> run;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::pair<bool, std::string> within(double value, double expected, double rel_tol) {
  const double err = std::abs(value - expected) / std::max(std::abs(expected), 1e-300);
  return {err <= rel_tol, "value " + sci(value) + ", expected " + sci(expected) + ", rel err " +
                              sci(err) + " (tol " + sci(rel_tol) + ")"};
}

std::vector<Check> checks() {
  const TruncationConfig small(120, 1e-8);
  const TruncationConfig desk = TruncationConfig::desk();
  return {
      {"coherent state amplitudes",
       [=] {
         const double a = 1.3;
         const Ket<> k = squeezed_displaced_ket(ProbeParams{a, 0.0}, small);
         double err = 0.0, term = std::exp(-a * a / 2);
         for (int n = 0; n < 40; ++n) {
           err = std::max(err, std::abs(k(n) - term));
           term *= a / std::sqrt(n + 1.0);
         }
         return std::pair{err < 1e-12, "max abs err " + sci(err)};
       }},
      {"squeezed vacuum amplitudes",
       [=] {
         const double r = 0.4, t = std::tanh(r);
         const Ket<> k = squeezed_displaced_ket(ProbeParams{0.0, r}, small);
         double err = 0.0, c = 1.0 / std::sqrt(std::cosh(r));
         for (int m = 0; 2 * m < 60; ++m) {
           err = std::max(err, std::abs(k(2 * m) - c) + std::abs(k(2 * m + 1)));
           c *= t / 2 * std::sqrt((2.0 * m + 1) * (2.0 * m + 2)) / (m + 1);
         }
         return std::pair{err < 1e-12, "max abs err " + sci(err)};
       }},
      {"mean photon number sinh^2 r + alpha^2 e^{2r}",
       [=] {
         const ProbeParams p{2.0, 0.5};
         const auto rho = squeezed_displaced_state(p, desk);
         const double n = expectation(rho, number_op(desk)).real();
         return within(n, std::pow(std::sinh(0.5), 2) + 4.0 * std::exp(1.0), 1e-10);
       }},
      {"squeezed Y variance e^{-2r}/2",
       [=] {
         const auto rho = squeezed_displaced_state(ProbeParams{1.0, 0.7}, desk);
         const auto [mean, var] = quadrature_moments(rho, kPhaseQuadrature);
         return within(var, std::exp(-1.4) / 2, 1e-10);
       }},
      {"Gauss-Hermite moment x^4",
       [] {
         const auto rule = gauss_hermite(30);
         const double m4 = (rule.weights.array() * rule.nodes.array().pow(4)).sum();
         return within(m4, 3.0 * std::sqrt(std::numbers::pi) / 4.0, 1e-13);
       }},
      {"dephasing quadrature matches analytic damping",
       [=] {
         const auto rho = squeezed_displaced_state(ProbeParams{2.0, 0.5}, desk);
         const PhaseNoise noise = PhaseNoise::from_variance(0.1);
         const double err =
             (dephase_quadrature(rho, noise).matrix() - dephase_analytic(rho, noise).matrix())
                 .cwiseAbs()
                 .maxCoeff();
         return std::pair{err < 1e-8, "max abs err " + sci(err)};
       }},
      {"coherent QFI 4 alpha^2",
       [=] {
         const auto q = qfi_from_fidelity(squeezed_displaced_state(ProbeParams{2.0, 0.0}, desk));
         return within(q.value, 16.0, 1e-3);
       }},
      {"pure squeezed coherent QFI closed form",
       [=] {
         const ProbeParams p{2.0, 0.5};
         const auto q = qfi_from_fidelity(squeezed_displaced_state(p, desk));
         return within(q.value, qfi_pure_analytic(p), 1e-3);
       }},
      {"pure QFI equals 4 Var(n)",
       [=] {
         const auto rho = squeezed_displaced_state(ProbeParams{1.5, 0.3}, desk);
         const auto n = number_op(desk);
         const double m1 = expectation(rho, n).real();
         const double m2 = expectation(rho, Operator<>(n * n)).real();
         return within(qfi_from_fidelity(rho).value, 4 * (m2 - m1 * m1), 1e-3);
       }},
      {"noiseless homodyne FI 4 alpha^2 e^{4r}",
       [=] {
         const ProbeParams p{2.0, 0.5};
         const auto f = fi_homodyne(squeezed_displaced_state(p, desk));
         return within(f.value, fi_homodyne_noiseless_analytic(p), 1e-3);
       }},
      {"homodyne FI bounded by QFI under dephasing",
       [=] {
         const ScenarioSpec spec{{2.0, 1.0}, PhaseNoise::from_variance(0.1),
                                 ScenarioOrder::DephaseThenSqueeze};
         const auto rho = prepare_scenario(spec, desk);
         const double h = qfi_from_fidelity(rho).value, f = fi_homodyne(rho).value;
         return std::pair{f <= h * (1 + 1e-3), "F " + sci(f) + ", H " + sci(h)};
       }},
      {"dephasing after squeezing costs more QFI",
       [=] {
         auto h = [&](ScenarioOrder o) {
           return qfi_from_fidelity(ScenarioSpec{{2.0, 1.0}, PhaseNoise::from_variance(0.1), o},
                                    0.0, 0.005, desk)
               .value;
         };
         const double ha = h(ScenarioOrder::SqueezeThenDephase);
         const double hb = h(ScenarioOrder::DephaseThenSqueeze);
         return std::pair{hb >= ha, "H_a " + sci(ha) + ", H_b " + sci(hb)};
       }},
      {"Wigner Fock and Gaussian-mixture routes agree",
       [=] {
         const ScenarioSpec spec{{1.0, 0.5}, PhaseNoise::from_variance(0.1),
                                 ScenarioOrder::SqueezeThenDephase};
         const PhaseSpaceGrid grid(-4, 5, 31, -4, 4, 31);
         const auto wf = wigner_fock(prepare_scenario(spec, small), grid);
         const auto wm = wigner_gaussian_mixture(spec, grid, suggested_components(spec));
         const double err = (wf - wm).cwiseAbs().maxCoeff();
         return std::pair{err < 1e-6, "sup err " + sci(err)};
       }},
  };
}

}  // namespace

int run_verify(std::ostream& out) {
  int failures = 0;
  for (const auto& c : checks()) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = c.run();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    failures += ok ? 0 : 1;
    out << (ok ? "PASS " : "FAIL ") << c.name << ": " << detail << '\n';
  }
  out << (failures ? std::to_string(failures) + " check(s) failed" : "all checks passed") << '\n';
  return failures;
}

}  // namespace phasediff
