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

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "phasediff/sweep.hpp"

namespace phasediff {

namespace fs = std::filesystem;

std::string_view to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Ok: return "ok";
    case RowStatus::Unreliable: return "unreliable";
    case RowStatus::Error: return "error";
  }
  return "?";
}

namespace {

constexpr std::string_view kColumns[] = {
    "alpha",         "r",
    "sigma2",        "scenario",
    "n_max",         "theta",
    "delta_theta",   "H",
    "H_richardson_check", "H_one_sided",
    "H_one_sided_check",  "H_noiseless",
    "F",             "F_derivative_step",
    "F_y_min",       "F_y_max",
    "F_points",      "F_normalization_error",
    "F_noiseless",   "F_over_H",
    "tail_population", "clipped_weight",
    "status",        "message"};
constexpr std::size_t kNumColumns = std::size(kColumns);

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

double parse_num(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("results: malformed number '" + s + "'");
  return x;
}

RowStatus parse_status(const std::string& s) {
  for (auto st : {RowStatus::Ok, RowStatus::Unreliable, RowStatus::Error})
    if (to_string(st) == s) return st;
  throw ConfigError("results: unknown status '" + s + "'");
}

}  // namespace

SweepResult evaluate_point(const SweepPoint& point, const SweepConfig& cfg) {
  SweepResult row;
  row.params = point;
  row.theta = cfg.theta;
  row.delta_theta = cfg.delta_theta;
  row.n_max = cfg.truncation.n_max;
  const ProbeParams probe{point.alpha, point.r};
  const bool need_h = cfg.wants(OutputKind::Qfi) || cfg.wants(OutputKind::Zeta) ||
                      cfg.wants(OutputKind::OptimalityRatio);
  const bool need_f = cfg.wants(OutputKind::Fi) || cfg.wants(OutputKind::Zeta) ||
                      cfg.wants(OutputKind::OptimalityRatio);
  try {
    if (std::abs(point.r) <= 3.0) {
      row.h_noiseless = qfi_pure_analytic(probe);
      row.f_noiseless = fi_homodyne_noiseless_analytic(probe);
    }
    const ScenarioSpec spec = point.spec(cfg.quadrature_nodes);
    const TruncationConfig trunc =
        cfg.auto_truncation
            ? adequate_truncation(probe, {200, 300, 400, 500, 600}, cfg.truncation.tail_tol)
            : cfg.truncation;
    row.n_max = trunc.n_max;
    const DensityMatrix<> rho = prepare_scenario(spec, trunc);
    row.tail_population = rho.tail_population();
    std::string notes;
    if (need_h) {
      const QfiEstimate<> q = qfi_from_fidelity(rho, cfg.theta, cfg.delta_theta);
      row.h = q.value;
      row.h_richardson = q.richardson_check;
      row.h_one_sided = q.one_sided_value;
      row.h_one_sided_check = q.one_sided_check;
      row.clipped_weight = q.clipped;
      if (!q.reliable()) {
        row.status = RowStatus::Unreliable;
        notes = "H step checks above tolerance";
      }
    }
    if (need_f) {
      const QuadratureGrid grid =
          default_grid(encode_phase(rho, cfg.theta), kPhaseQuadrature, cfg.homodyne_points);
      const FiEstimate<> f = fi_homodyne(rho, cfg.theta, grid, cfg.derivative_step);
      row.f = f.value;
      row.f_step = f.derivative_step;
      row.f_y_min = f.y_min;
      row.f_y_max = f.y_max;
      row.f_points = f.n_points;
      row.f_normalization_error = f.normalization_error;
    }
    if (need_h && need_f) row.f_over_h = row.f / row.h;
    row.message = notes;
  } catch (const std::exception& e) {
    row.status = RowStatus::Error;
    row.message = csv_safe(e.what());
  }
  return row;
}

std::string results_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kNumColumns; ++i) out += (i ? "," : "") + std::string(kColumns[i]);
  return out;
}

std::string to_csv_row(const SweepResult& r) {
  const auto& p = r.params;
  std::ostringstream o;
  o << num(p.alpha) << ',' << num(p.r) << ',' << num(p.sigma2) << ',' << to_string(p.order) << ','
    << r.n_max << ',' << num(r.theta) << ',' << num(r.delta_theta) << ',' << num(r.h) << ','
    << num(r.h_richardson) << ',' << num(r.h_one_sided) << ',' << num(r.h_one_sided_check) << ','
    << num(r.h_noiseless) << ',' << num(r.f) << ',' << num(r.f_step) << ',' << num(r.f_y_min)
    << ',' << num(r.f_y_max) << ',' << r.f_points << ',' << num(r.f_normalization_error) << ','
    << num(r.f_noiseless) << ',' << num(r.optimality_ratio()) << ','
    << num(r.tail_population) << ',' << num(r.clipped_weight) << ',' << to_string(r.status)
    << ',' << csv_safe(r.message);
  return o.str();
}

SweepResult parse_csv_row(std::string_view line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (f.size() + 1 < kNumColumns) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) break;
    f.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  f.emplace_back(line.substr(start));
  if (f.size() != kNumColumns)
    throw ConfigError("results: expected " + std::to_string(kNumColumns) + " columns, got " +
                      std::to_string(f.size()));
  SweepResult r;
  try {
    r.params.order = parse_scenario(f[3]);
  } catch (const std::exception&) {
    throw ConfigError("results: unknown scenario '" + f[3] + "'");
  }
  r.params.alpha = parse_num(f[0]);
  r.params.r = parse_num(f[1]);
  r.params.sigma2 = parse_num(f[2]);
  r.n_max = static_cast<int>(parse_num(f[4]));
  r.theta = parse_num(f[5]);
  r.delta_theta = parse_num(f[6]);
  r.h = parse_num(f[7]);
  r.h_richardson = parse_num(f[8]);
  r.h_one_sided = parse_num(f[9]);
  r.h_one_sided_check = parse_num(f[10]);
  r.h_noiseless = parse_num(f[11]);
  r.f = parse_num(f[12]);
  r.f_step = parse_num(f[13]);
  r.f_y_min = parse_num(f[14]);
  r.f_y_max = parse_num(f[15]);
  r.f_points = static_cast<int>(parse_num(f[16]));
  r.f_normalization_error = parse_num(f[17]);
  r.f_noiseless = parse_num(f[18]);
  r.f_over_h = parse_num(f[19]);
  r.tail_population = parse_num(f[20]);
  r.clipped_weight = parse_num(f[21]);
  r.status = parse_status(f[22]);
  r.message = f[23];
  return r;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::ordered_json sweep_manifest(const SweepConfig& cfg, std::size_t n_points) {
  nlohmann::ordered_json m;
  m["library"] = "phasediff";
  m["version"] = library_version();
  m["config_hash"] = config_hash(cfg);
  m["config"] = serialize_config(cfg);
  m["columns"] = std::vector<std::string>(std::begin(kColumns), std::end(kColumns));
  m["rows"] = n_points;
  m["ordering"] = "alpha, r, sigma2, scenario (config list order, scenario innermost)";
  return m;
}

/// Complete rows already in `path` that match the grid prefix, or nullopt if
/// there is nothing to resume.
std::optional<std::vector<SweepResult>> resumable_rows(const SweepConfig& cfg,
                                                       const std::vector<SweepPoint>& points) {
  const fs::path path = cfg.output_path;
  if (!fs::exists(path)) return std::nullopt;
  const fs::path manifest = path.string() + ".json";
  std::string stored_hash;
  if (fs::exists(manifest)) {
    try {
      stored_hash = nlohmann::json::parse(read_file(manifest)).value("config_hash", "");
    } catch (const nlohmann::json::exception&) {
    }
  }
  if (stored_hash != config_hash(cfg))
    throw ConfigError("output '" + path.string() +
                      "' was written by a different config; remove it or run fresh");
  const std::string text = read_file(path);
  std::vector<SweepResult> rows;
  std::size_t start = 0;
  bool header = true;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // trailing partial line is dropped
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (header) {
      if (line != results_csv_header())
        throw ConfigError("output '" + path.string() + "' has an unexpected header");
      header = false;
      continue;
    }
    SweepResult r;
    try {
      r = parse_csv_row(line);
    } catch (const ConfigError&) {
      break;
    }
    if (rows.size() >= points.size() || to_csv_row(r) != line) break;
    const SweepPoint& p = points[rows.size()];
    if (num(r.params.alpha) != num(p.alpha) || num(r.params.r) != num(p.r) ||
        num(r.params.sigma2) != num(p.sigma2) || r.params.order != p.order)
      break;
    rows.push_back(std::move(r));
  }
  if (header) return std::nullopt;
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::vector<SweepResult> run_sweep(const SweepConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const std::vector<SweepPoint> points = expand_grid(cfg);
  const fs::path path = cfg.output_path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());

  std::vector<SweepResult> rows;
  if (!options.fresh)
    if (auto existing = resumable_rows(cfg, points)) rows = std::move(*existing);

  std::string prefix = results_csv_header() + "\n";
  for (const auto& r : rows) prefix += to_csv_row(r) + "\n";
  write_text(path, prefix);
  write_text(path.string() + ".json", sweep_manifest(cfg, points.size()).dump(2) + "\n");

  const std::size_t first = rows.size();
  std::size_t last = points.size();
  if (options.limit) last = std::min(last, first + *options.limit);
  const std::size_t count = last - first;
  if (count == 0) return rows;

  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot append to '" + path.string() + "'");

  std::vector<std::optional<SweepResult>> slots(count);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= count) return;
      SweepResult r = evaluate_point(points[first + i], cfg);
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(r);
      }
      ready.notify_all();
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), count);
  std::vector<std::jthread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);

  try {
    for (std::size_t i = 0; i < count; ++i) {
      SweepResult r;
      {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[i].has_value(); });
        r = std::move(*slots[i]);
        slots[i].reset();
      }
      out << to_csv_row(r) << '\n';
      out.flush();
      if (options.on_row) options.on_row(r);
      rows.push_back(std::move(r));
    }
  } catch (...) {
    stop = true;
    throw;
  }
  return rows;
}

std::vector<SweepResult> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read results '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != results_csv_header())
    throw ConfigError("results '" + path.string() + "': missing or unexpected header");
  std::vector<SweepResult> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  return rows;
}

}  // namespace phasediff
