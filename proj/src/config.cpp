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

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phasediff/sweep.hpp"

#ifndef PHASEDIFF_VERSION
#define PHASEDIFF_VERSION "0.0.0"
#endif

namespace phasediff {

std::string library_version() { return PHASEDIFF_VERSION; }

std::string_view to_string(OutputKind k) {
  switch (k) {
    case OutputKind::Qfi: return "qfi";
    case OutputKind::Fi: return "fi";
    case OutputKind::Zeta: return "zeta";
    case OutputKind::OptimalityRatio: return "optimality_ratio";
    case OutputKind::Wigner: return "wigner";
  }
  return "?";
}

OutputKind parse_output_kind(std::string_view s) {
  for (auto k : {OutputKind::Qfi, OutputKind::Fi, OutputKind::Zeta, OutputKind::OptimalityRatio,
                 OutputKind::Wigner})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown output '" + std::string(s) + "'");
}

bool SweepConfig::wants(OutputKind k) const {
  return std::find(outputs.begin(), outputs.end(), k) != outputs.end();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError(key + ": empty number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key + ": not a finite number: '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || x < INT32_MIN ||
      x > INT32_MAX)
    throw ConfigError(key + ": not an integer: '" + v + "'");
  return static_cast<int>(x);
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_real(key, item));
  return out;
}

std::optional<std::pair<double, double>> to_range(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  const auto xs = to_reals(key, v);
  if (xs.size() != 2) throw ConfigError(key + ": expected 'auto' or 'min,max'");
  return std::pair{xs[0], xs[1]};
}

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_reals(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt_real(xs[i]);
  return out;
}

std::string fmt_range(const std::optional<std::pair<double, double>>& r) {
  return r ? fmt_real(r->first) + "," + fmt_real(r->second) : "auto";
}

void set_key(SweepConfig& c, const std::string& key, const std::string& v) {
  if (key == "alpha_values") c.alpha_values = to_reals(key, v);
  else if (key == "r_values") c.r_values = to_reals(key, v);
  else if (key == "sigma2_values") c.sigma2_values = to_reals(key, v);
  else if (key == "scenarios") {
    c.scenarios.clear();
    for (const auto& s : split_list(v)) {
      try {
        c.scenarios.push_back(parse_scenario(s));
      } catch (const std::exception&) {
        throw ConfigError("scenarios: expected a and/or b, got '" + s + "'");
      }
    }
  } else if (key == "theta") c.theta = to_real(key, v);
  else if (key == "delta_theta") c.delta_theta = to_real(key, v);
  else if (key == "derivative_step") c.derivative_step = to_real(key, v);
  else if (key == "profile") {
    if (v == "desk") c.truncation = TruncationConfig::desk();
    else if (v == "full") c.truncation = TruncationConfig::full();
    else throw ConfigError("profile: expected desk or full");
    c.auto_truncation = false;
  } else if (key == "n_max") {
    if (v == "auto") {
      c.auto_truncation = true;
    } else {
      c.auto_truncation = false;
      const int n = to_int(key, v);
      if (n < 2) throw ConfigError("n_max: must be >= 2");
      c.truncation.n_max = n;
    }
  } else if (key == "tail_tol") c.truncation.tail_tol = to_real(key, v);
  else if (key == "quadrature_nodes") c.quadrature_nodes = to_int(key, v);
  else if (key == "homodyne_points") c.homodyne_points = to_int(key, v);
  else if (key == "outputs") {
    c.outputs.clear();
    for (const auto& s : split_list(v)) c.outputs.push_back(parse_output_kind(s));
  } else if (key == "output_path") c.output_path = v;
  else if (key == "workers") c.workers = to_int(key, v);
  else if (key == "wigner_x_range") c.wigner_x_range = to_range(key, v);
  else if (key == "wigner_p_range") c.wigner_p_range = to_range(key, v);
  else if (key == "wigner_resolution") {
    const auto xs = split_list(v);
    if (xs.size() != 2) throw ConfigError("wigner_resolution: expected 'nx,np'");
    c.wigner_nx = to_int(key, xs[0]);
    c.wigner_np = to_int(key, xs[1]);
  } else if (key == "wigner_components") c.wigner_components = v == "auto" ? 0 : to_int(key, v);
  else if (key == "wigner_method") {
    if (v == "mixture") c.wigner_method = WignerMethod::Mixture;
    else if (v == "fock") c.wigner_method = WignerMethod::Fock;
    else throw ConfigError("wigner_method: expected mixture or fock");
  } else throw ConfigError("unknown key '" + key + "'");
}

std::pair<std::string, std::string> split_assignment(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key = value: '" + trim(line) + "'");
  std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError("missing key: '" + trim(line) + "'");
  return {std::move(key), trim(line.substr(eq + 1))};
}

}  // namespace

SweepConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t lineno = 0, start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (!trim(line).empty()) {
      try {
        entries.push_back(split_assignment(line));
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  SweepConfig cfg;
  // A profile sets defaults that explicit keys refine, wherever it appears.
  std::stable_partition(entries.begin(), entries.end(),
                        [](const auto& e) { return e.first == "profile"; });
  for (const auto& [key, value] : entries) set_key(cfg, key, value);
  validate(cfg);
  return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const SweepConfig& c) {
  std::ostringstream o;
  std::string scen, outs;
  for (std::size_t i = 0; i < c.scenarios.size(); ++i)
    scen += (i ? "," : "") + std::string(to_string(c.scenarios[i]));
  for (std::size_t i = 0; i < c.outputs.size(); ++i)
    outs += (i ? "," : "") + std::string(to_string(c.outputs[i]));
  o << "alpha_values = " << fmt_reals(c.alpha_values) << '\n'
    << "r_values = " << fmt_reals(c.r_values) << '\n'
    << "sigma2_values = " << fmt_reals(c.sigma2_values) << '\n'
    << "scenarios = " << scen << '\n'
    << "theta = " << fmt_real(c.theta) << '\n'
    << "delta_theta = " << fmt_real(c.delta_theta) << '\n'
    << "derivative_step = " << fmt_real(c.derivative_step) << '\n'
    << "n_max = " << (c.auto_truncation ? "auto" : std::to_string(c.truncation.n_max)) << '\n'
    << "tail_tol = " << fmt_real(c.truncation.tail_tol) << '\n'
    << "quadrature_nodes = " << c.quadrature_nodes << '\n'
    << "homodyne_points = " << c.homodyne_points << '\n'
    << "outputs = " << outs << '\n'
    << "output_path = " << c.output_path << '\n'
    << "workers = " << c.workers << '\n'
    << "wigner_x_range = " << fmt_range(c.wigner_x_range) << '\n'
    << "wigner_p_range = " << fmt_range(c.wigner_p_range) << '\n'
    << "wigner_resolution = " << c.wigner_nx << ',' << c.wigner_np << '\n'
    << "wigner_components = "
    << (c.wigner_components == 0 ? "auto" : std::to_string(c.wigner_components)) << '\n'
    << "wigner_method = " << (c.wigner_method == WignerMethod::Fock ? "fock" : "mixture") << '\n';
  return o.str();
}

void apply_override(SweepConfig& cfg, std::string_view assignment) {
  const auto [key, value] = split_assignment(assignment);
  set_key(cfg, key, value);
  validate(cfg);
}

void validate(const SweepConfig& c) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!c.alpha_values.empty(), "alpha_values: empty list");
  require(!c.r_values.empty(), "r_values: empty list");
  require(!c.sigma2_values.empty(), "sigma2_values: empty list");
  require(!c.scenarios.empty(), "scenarios: empty list");
  require(!c.outputs.empty(), "outputs: empty list");
  for (double r : c.r_values) require(std::abs(r) <= 3.0, "r_values: |r| must be <= 3");
  for (double s : c.sigma2_values) require(s >= 0.0, "sigma2_values: must be >= 0");
  auto distinct = [](auto v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  require(distinct(c.scenarios), "scenarios: duplicate entry");
  require(distinct(c.outputs), "outputs: duplicate entry");
  require(c.delta_theta > 0.0 && c.delta_theta <= 0.1, "delta_theta: must lie in (0, 0.1]");
  require(c.derivative_step > 0.0 && c.derivative_step <= 0.1,
          "derivative_step: must lie in (0, 0.1]");
  require(c.truncation.n_max >= 2, "n_max: must be >= 2");
  require(c.truncation.tail_tol >= 0.0 && c.truncation.tail_tol < 1.0,
          "tail_tol: must lie in [0, 1)");
  require(c.quadrature_nodes >= 1, "quadrature_nodes: must be >= 1");
  require(c.homodyne_points >= 3, "homodyne_points: must be >= 3");
  require(!c.output_path.empty(), "output_path: empty");
  require(c.workers >= 1, "workers: must be >= 1");
  require(c.wigner_nx >= 2 && c.wigner_np >= 2, "wigner_resolution: need >= 2 points per axis");
  require(c.wigner_components >= 0, "wigner_components: must be auto or >= 1");
  for (const auto& r : {c.wigner_x_range, c.wigner_p_range})
    require(!r || r->first < r->second, "wigner range: min must be below max");
}

std::string config_hash(const SweepConfig& cfg) {
  // The worker count does not affect results.
  SweepConfig key = cfg;
  key.workers = 1;
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize_config(key)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<SweepPoint> expand_grid(const SweepConfig& cfg) {
  std::vector<SweepPoint> out;
  out.reserve(cfg.alpha_values.size() * cfg.r_values.size() * cfg.sigma2_values.size() *
              cfg.scenarios.size());
  for (double a : cfg.alpha_values)
    for (double r : cfg.r_values)
      for (double s2 : cfg.sigma2_values)
        for (auto order : cfg.scenarios) out.push_back({a, r, s2, order});
  return out;
}

}  // namespace phasediff
