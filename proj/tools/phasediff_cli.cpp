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

// Command-line front end: sweep, figure, verify, wigner.

#include <algorithm>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasediff/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using namespace phasediff;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUnreliable = 2;

SweepConfig configure(const std::string& path, const std::vector<std::string>& overrides) {
  SweepConfig cfg = load_config(path);
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

/// Config recorded next to a results file, if any.
std::pair<SweepConfig, std::string> recorded_config(const fs::path& results) {
  const fs::path manifest = results.string() + ".json";
  if (!fs::exists(manifest)) return {SweepConfig{}, "unknown"};
  std::ifstream in(manifest);
  const auto m = nlohmann::json::parse(in, nullptr, false);
  if (m.is_discarded() || !m.contains("config")) return {SweepConfig{}, "unknown"};
  return {parse_config(m["config"].get<std::string>()), m.value("config_hash", "unknown")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase estimation with squeezed coherent probes under phase diffusion"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  std::string config_path, results_path, figure_id, out_dir;
  std::vector<std::string> overrides;
  bool fresh = false;

  auto* sweep = app.add_subcommand("sweep", "Evaluate H and F over a parameter grid");
  sweep->add_option("config", config_path, "Config file (key = value)")->required();
  sweep->add_option("-s,--set", overrides, "Override a config key: key=value");
  sweep->add_flag("--fresh", fresh, "Overwrite existing output instead of resuming");

  auto* figure = app.add_subcommand("figure", "Export figure data from a results CSV");
  figure->add_option("results", results_path, "Results CSV written by sweep")->required();
  figure->add_option("figure_id", figure_id, "fig2, fig3, zeta, optimality or wigner")
      ->required();
  figure->add_option("-o,--out-dir", out_dir, "Output directory (default: next to results)");
  figure->add_option("-s,--set", overrides, "Override a recorded config key (wigner settings)");

  auto* verify = app.add_subcommand("verify", "Run the built-in oracle and invariant checks");

  auto* wigner = app.add_subcommand("wigner", "Export Wigner fields for every grid point");
  wigner->add_option("config", config_path, "Config file (key = value)")->required();
  wigner->add_option("-s,--set", overrides, "Override a config key: key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sweep) {
      const SweepConfig cfg = configure(config_path, overrides);
      RunOptions opts;
      opts.fresh = fresh;
      const auto rows = run_sweep(cfg, opts);
      if (cfg.wants(OutputKind::Wigner)) run_wigner(cfg);
      const auto bad = std::count_if(rows.begin(), rows.end(),
                                     [](const SweepResult& r) { return r.status != RowStatus::Ok; });
      std::cout << rows.size() << " rows written to " << cfg.output_path;
      if (bad) std::cout << ", " << bad << " flagged unreliable or failed";
      std::cout << '\n';
      return bad ? kExitUnreliable : kExitOk;
    }
    if (*figure) {
      const FigureId id = parse_figure_id(figure_id);
      const auto rows = read_results(results_path);
      auto [cfg, hash] = recorded_config(results_path);
      for (const auto& o : overrides) apply_override(cfg, o);
      FigureContext ctx;
      ctx.out_dir = out_dir.empty() ? fs::path(results_path).parent_path() : fs::path(out_dir);
      if (ctx.out_dir.empty()) ctx.out_dir = ".";
      ctx.config_hash = hash;
      ctx.config = cfg;
      const auto files = emit_figure_data(rows, id, ctx);
      std::cout << files.size() << " files written to " << ctx.out_dir.string() << '\n';
      const bool bad = std::any_of(rows.begin(), rows.end(),
                                   [](const SweepResult& r) { return r.status != RowStatus::Ok; });
      return bad && id != FigureId::Wigner ? kExitUnreliable : kExitOk;
    }
    if (*verify) return run_verify(std::cout) ? kExitUnreliable : kExitOk;
    if (*wigner) {
      const SweepConfig cfg = configure(config_path, overrides);
      const auto files = run_wigner(cfg);
      std::cout << files.size() << " files written\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnreliable;
  }
  return kExitOk;
}
