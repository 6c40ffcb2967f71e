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

// Configuration-driven sweeps over (alpha, r, sigma^2, scenario), result
// files, figure data export and the built-in verification suite.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "phasediff/homodyne.hpp"
#include "phasediff/wigner.hpp"

namespace phasediff {

/// Invalid or inconsistent configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string library_version();

enum class OutputKind { Qfi, Fi, Zeta, OptimalityRatio, Wigner };

std::string_view to_string(OutputKind k);
OutputKind parse_output_kind(std::string_view s);

enum class WignerMethod { Mixture, Fock };

/// Everything a sweep needs. Parsed from flat `key = value` text; lists are
/// comma separated and `#` starts a comment.
struct SweepConfig {
  std::vector<double> alpha_values{2.0};
  std::vector<double> r_values{0.0};
  std::vector<double> sigma2_values{0.0};
  std::vector<ScenarioOrder> scenarios{ScenarioOrder::SqueezeThenDephase,
                                       ScenarioOrder::DephaseThenSqueeze};
  double theta = 0.0;
  double delta_theta = 0.005;
  double derivative_step = 0.005;
  /// Fixed truncation, or the smallest adequate of 200..600 per point.
  TruncationConfig truncation = TruncationConfig::desk();
  bool auto_truncation = false;
  int quadrature_nodes = 101;
  int homodyne_points = 2001;
  std::vector<OutputKind> outputs{OutputKind::Qfi, OutputKind::Fi};
  std::string output_path = "results.csv";
  int workers = 1;

  // Wigner export. Empty ranges mean "fit to the state's moments".
  std::optional<std::pair<double, double>> wigner_x_range;
  std::optional<std::pair<double, double>> wigner_p_range;
  int wigner_nx = 101;
  int wigner_np = 101;
  int wigner_components = 0;  // 0: suggested_components()
  WignerMethod wigner_method = WignerMethod::Mixture;

  bool wants(OutputKind k) const;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Parse config text. `profile = desk|full` sets the truncation first; any
/// later key overrides it.
SweepConfig parse_config(std::string_view text);
SweepConfig load_config(const std::filesystem::path& path);
/// Canonical text form: every key, fixed order, round-trip exact numbers.
std::string serialize_config(const SweepConfig& cfg);
/// Apply one `key=value` override (CLI flags).
void apply_override(SweepConfig& cfg, std::string_view assignment);
void validate(const SweepConfig& cfg);
/// FNV-1a 64 of the canonical serialization (worker count excluded), as 16 hex digits.
std::string config_hash(const SweepConfig& cfg);

struct SweepPoint {
  double alpha = 0.0;
  double r = 0.0;
  double sigma2 = 0.0;
  ScenarioOrder order = ScenarioOrder::SqueezeThenDephase;

  ScenarioSpec spec(int nodes = 101) const {
    return ScenarioSpec{{alpha, r}, PhaseNoise::from_variance(sigma2, nodes), order};
  }
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Cartesian product in config list order, alpha outermost, scenario innermost.
std::vector<SweepPoint> expand_grid(const SweepConfig& cfg);

enum class RowStatus { Ok, Unreliable, Error };
std::string_view to_string(RowStatus s);

/// One evaluated grid point. Quantities that were not requested (or failed)
/// are NaN; the status and message say why.
struct SweepResult {
  SweepPoint params;
  int n_max = 0;
  double theta = 0.0;
  double delta_theta = 0.0;
  double h = std::numeric_limits<double>::quiet_NaN();
  double h_richardson = std::numeric_limits<double>::quiet_NaN();
  double h_one_sided = std::numeric_limits<double>::quiet_NaN();
  double h_one_sided_check = std::numeric_limits<double>::quiet_NaN();
  double h_noiseless = std::numeric_limits<double>::quiet_NaN();
  double f = std::numeric_limits<double>::quiet_NaN();
  double f_step = std::numeric_limits<double>::quiet_NaN();
  double f_y_min = std::numeric_limits<double>::quiet_NaN();
  double f_y_max = std::numeric_limits<double>::quiet_NaN();
  int f_points = 0;
  double f_normalization_error = std::numeric_limits<double>::quiet_NaN();
  double f_noiseless = std::numeric_limits<double>::quiet_NaN();
  double f_over_h = std::numeric_limits<double>::quiet_NaN();
  double tail_population = std::numeric_limits<double>::quiet_NaN();
  double clipped_weight = std::numeric_limits<double>::quiet_NaN();
  RowStatus status = RowStatus::Ok;
  std::string message;

  /// F/H as recorded, or computed from f and h when not recorded.
  double optimality_ratio() const { return std::isnan(f_over_h) ? f / h : f_over_h; }
};

/// Evaluate one point; never throws for numerical failures (they land in
/// status/message).
SweepResult evaluate_point(const SweepPoint& point, const SweepConfig& cfg);

std::string results_csv_header();
std::string to_csv_row(const SweepResult& row);
SweepResult parse_csv_row(std::string_view line);

struct RunOptions {
  /// Stop after this many newly computed rows (simulates an interruption).
  std::optional<std::size_t> limit;
  /// Ignore and overwrite an existing output file.
  bool fresh = false;
  /// Called for each row in output order as it is written.
  std::function<void(const SweepResult&)> on_row;
};

/// Evaluate the grid with `cfg.workers` threads and stream rows to
/// cfg.output_path in grid order, plus `<output_path>.json`. An existing
/// output from the same config is resumed from its last complete row.
/// Returns all rows of the file (resumed and new). Wigner fields are not
/// written here; see run_wigner.
std::vector<SweepResult> run_sweep(const SweepConfig& cfg, const RunOptions& options = {});

/// Read a results CSV written by run_sweep.
std::vector<SweepResult> read_results(const std::filesystem::path& path);

enum class FigureId { Fig2, Fig3, Zeta, Optimality, Wigner };
std::string_view to_string(FigureId f);
FigureId parse_figure_id(std::string_view s);

struct FigureContext {
  std::filesystem::path out_dir = ".";
  std::string config_hash = "unknown";
  /// Wigner settings (ranges, resolution, components).
  SweepConfig config;
};

/// One CSV per curve plus `<figure>_manifest.json` in ctx.out_dir. Throws
/// ConfigError (and writes nothing) if `results` is empty or lacks the
/// columns the figure needs. Returns the written paths, manifest last.
std::vector<std::filesystem::path> emit_figure_data(const std::vector<SweepResult>& results,
                                                    FigureId figure, const FigureContext& ctx);

/// Phase-space grid for a scenario: explicit config ranges, or mean +/- 8 sd
/// of the mixture moments per axis.
PhaseSpaceGrid wigner_grid_for(const ScenarioSpec& spec, const SweepConfig& cfg);

/// Dense field CSV: `#` metadata lines, a header row of p values, then one
/// row per x value.
void write_wigner_csv(const std::filesystem::path& path, const WignerField<>& field,
                      const PhaseSpaceGrid& grid, const std::vector<std::pair<std::string, std::string>>& meta);

/// `wigner <config>`: one field per (alpha, r, sigma^2, scenario) in the
/// directory of cfg.output_path, plus a manifest. Returns written paths.
std::vector<std::filesystem::path> run_wigner(const SweepConfig& cfg);

/// Built-in oracle and invariant checks; prints one line per check and
/// returns the number of failures.
int run_verify(std::ostream& out);

}  // namespace phasediff
