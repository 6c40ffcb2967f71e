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
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "phasediff/sweep.hpp"

namespace phasediff {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(FigureId f) {
  switch (f) {
    case FigureId::Fig2: return "fig2";
    case FigureId::Fig3: return "fig3";
    case FigureId::Zeta: return "zeta";
    case FigureId::Optimality: return "optimality";
    case FigureId::Wigner: return "wigner";
  }
  return "?";
}

FigureId parse_figure_id(std::string_view s) {
  for (auto f : {FigureId::Fig2, FigureId::Fig3, FigureId::Zeta, FigureId::Optimality,
                 FigureId::Wigner})
    if (to_string(f) == s) return f;
  throw ConfigError("unknown figure id '" + std::string(s) +
                    "' (expected fig2, fig3, zeta, optimality or wigner)");
}

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

/// A pending CSV: built completely before anything touches the disk.
struct Curve {
  std::string file;
  json slice;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string preamble;
};

enum class Axis { Alpha, R, Sigma2 };

double axis_value(const SweepResult& row, Axis a) {
  switch (a) {
    case Axis::Alpha: return row.params.alpha;
    case Axis::R: return row.params.r;
    case Axis::Sigma2: return row.params.sigma2;
  }
  return 0.0;
}

std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::Alpha: return "alpha";
    case Axis::R: return "r";
    case Axis::Sigma2: return "sigma2";
  }
  return "?";
}

std::size_t distinct_count(const std::vector<SweepResult>& rows, Axis a) {
  std::set<std::string> seen;
  for (const auto& r : rows) seen.insert(num(axis_value(r, a)));
  return seen.size();
}

/// Rows grouped by everything except `x` (and optionally the scenario), in
/// order of first appearance, each group sorted along `x`.
std::vector<std::vector<const SweepResult*>> slices_along(const std::vector<SweepResult>& rows,
                                                          Axis x, bool by_scenario) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SweepResult*>> groups;
  for (const auto& r : rows) {
    std::string key;
    for (Axis a : {Axis::Alpha, Axis::R, Axis::Sigma2})
      if (a != x) key += num(axis_value(r, a)) + "|";
    if (by_scenario) key += to_string(r.params.order);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<std::vector<const SweepResult*>> out;
  for (const auto& k : order) {
    auto g = groups[k];
    std::stable_sort(g.begin(), g.end(), [x](auto* a, auto* b) {
      return axis_value(*a, x) < axis_value(*b, x);
    });
    out.push_back(std::move(g));
  }
  return out;
}

json slice_of(const SweepResult& r, Axis x, bool with_scenario) {
  json s;
  for (Axis a : {Axis::Alpha, Axis::R, Axis::Sigma2})
    if (a != x) s[std::string(axis_name(a))] = axis_value(r, a);
  if (with_scenario) s["scenario"] = std::string(to_string(r.params.order));
  return s;
}

std::string slice_suffix(const json& slice) {
  std::string out;
  for (const auto& [k, v] : slice.items())
    out += "_" + k + "=" + (v.is_string() ? v.get<std::string>() : num(v.get<double>()));
  return out;
}

void require_column(const std::vector<SweepResult>& rows, bool want_h, bool want_f,
                    std::string_view figure) {
  auto any = [&](auto pred) { return std::any_of(rows.begin(), rows.end(), pred); };
  if (want_h && !any([](const SweepResult& r) { return !std::isnan(r.h); }))
    throw ConfigError(std::string(figure) + ": results have no H values (outputs must include qfi)");
  if (want_f && !any([](const SweepResult& r) { return !std::isnan(r.f); }))
    throw ConfigError(std::string(figure) + ": results have no F values (outputs must include fi)");
}

std::vector<Curve> fig2_curves(const std::vector<SweepResult>& rows) {
  require_column(rows, true, false, "fig2");
  std::vector<Curve> curves;
  for (const auto& g : slices_along(rows, Axis::R, true)) {
    Curve c;
    c.slice = slice_of(*g.front(), Axis::R, true);
    c.file = "fig2_H_vs_r" + slice_suffix(c.slice) + ".csv";
    c.columns = {"r", "H", "F", "status"};
    for (const auto* r : g)
      c.rows.push_back({num(r->params.r), num(r->h), num(r->f), std::string(to_string(r->status))});
    curves.push_back(std::move(c));
  }
  // Noiseless closed forms on the same r values, one curve per alpha.
  std::vector<double> alphas;
  for (const auto& r : rows)
    if (std::find(alphas.begin(), alphas.end(), r.params.alpha) == alphas.end())
      alphas.push_back(r.params.alpha);
  std::set<double> rs;
  for (const auto& r : rows) rs.insert(r.params.r);
  for (double a : alphas) {
    Curve c;
    c.slice = json{{"alpha", a}, {"sigma2", 0.0}, {"closed_form", true}};
    c.file = "fig2_closed_form_alpha=" + num(a) + ".csv";
    c.columns = {"r", "H", "F"};
    for (double r : rs) {
      if (std::abs(r) > 3.0) continue;
      c.rows.push_back({num(r), num(qfi_pure_analytic(ProbeParams{a, r})),
                        num(fi_homodyne_noiseless_analytic(ProbeParams{a, r}))});
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

/// Curves of one quantity per scenario slice along alpha, and along sigma2
/// when the results vary it.
template <typename Columns>
std::vector<Curve> per_scenario_curves(const std::vector<SweepResult>& rows, std::string_view tag,
                                       const std::vector<std::string>& quantity_names,
                                       Columns quantities) {
  std::vector<Curve> curves;
  std::vector<Axis> axes{Axis::Alpha};
  if (distinct_count(rows, Axis::Sigma2) > 1) axes.push_back(Axis::Sigma2);
  for (Axis x : axes) {
    for (const auto& g : slices_along(rows, x, true)) {
      Curve c;
      c.slice = slice_of(*g.front(), x, true);
      c.file = std::string(tag) + "_vs_" + std::string(axis_name(x)) + slice_suffix(c.slice) + ".csv";
      c.columns = {std::string(axis_name(x))};
      c.columns.insert(c.columns.end(), quantity_names.begin(), quantity_names.end());
      c.columns.push_back("status");
      for (const auto* r : g) {
        std::vector<std::string> line{num(axis_value(*r, x))};
        for (double v : quantities(*r)) line.push_back(num(v));
        line.emplace_back(to_string(r->status));
        c.rows.push_back(std::move(line));
      }
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

std::vector<Curve> fig3_curves(const std::vector<SweepResult>& rows) {
  require_column(rows, true, false, "fig3");
  return per_scenario_curves(rows, "fig3", {"H", "F"}, [](const SweepResult& r) {
    return std::vector<double>{r.h, r.f};
  });
}

std::vector<Curve> optimality_curves(const std::vector<SweepResult>& rows) {
  require_column(rows, true, true, "optimality");
  return per_scenario_curves(rows, "optimality", {"F_over_H", "H", "F"},
                             [](const SweepResult& r) {
                               return std::vector<double>{r.optimality_ratio(), r.h, r.f};
                             });
}

RowStatus worst(RowStatus a, RowStatus b) { return std::max(a, b); }

std::vector<Curve> zeta_curves(const std::vector<SweepResult>& rows) {
  require_column(rows, true, true, "zeta");
  // Pair scenario (a) and (b) rows at identical (alpha, r, sigma2).
  std::map<std::string, const SweepResult*> b_rows;
  auto key = [](const SweepResult& r) {
    return num(r.params.alpha) + "|" + num(r.params.r) + "|" + num(r.params.sigma2);
  };
  for (const auto& r : rows)
    if (r.params.order == ScenarioOrder::DephaseThenSqueeze) b_rows[key(r)] = &r;
  std::vector<SweepResult> paired;
  std::vector<const SweepResult*> partner;
  for (const auto& r : rows) {
    if (r.params.order != ScenarioOrder::SqueezeThenDephase) continue;
    if (auto it = b_rows.find(key(r)); it != b_rows.end()) {
      paired.push_back(r);
      partner.push_back(it->second);
    }
  }
  if (paired.empty())
    throw ConfigError("zeta: results need matching scenario a and b rows");
  std::map<const SweepResult*, const SweepResult*> b_of;
  for (std::size_t i = 0; i < paired.size(); ++i) b_of[&paired[i]] = partner[i];

  std::vector<Curve> curves;
  std::vector<Axis> axes{Axis::Alpha};
  if (distinct_count(paired, Axis::Sigma2) > 1) axes.push_back(Axis::Sigma2);
  for (Axis x : axes) {
    for (const auto& g : slices_along(paired, x, false)) {
      Curve c;
      c.slice = slice_of(*g.front(), x, false);
      c.file = "zeta_vs_" + std::string(axis_name(x)) + slice_suffix(c.slice) + ".csv";
      c.columns = {std::string(axis_name(x)), "zeta_H", "zeta_F", "H_b_over_a", "F_b_over_a",
                   "H_a", "H_b", "F_a", "F_b", "status"};
      for (const auto* a : g) {
        const SweepResult* b = b_of.at(a);
        c.rows.push_back({num(axis_value(*a, x)), num(a->h / b->h), num(a->f / b->f),
                          num(b->h / a->h), num(b->f / a->f), num(a->h), num(b->h), num(a->f),
                          num(b->f), std::string(to_string(worst(a->status, b->status)))});
      }
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

std::string metadata_preamble(const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string out = "# phasediff wigner field\n";
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  return out;
}

Curve wigner_curve(const SweepPoint& p, const SweepConfig& cfg, const std::string& hash) {
  const ScenarioSpec spec = p.spec(cfg.quadrature_nodes);
  const PhaseSpaceGrid grid = wigner_grid_for(spec, cfg);
  WignerField<> field;
  std::string method, components;
  if (cfg.wigner_method == WignerMethod::Mixture) {
    const int n = cfg.wigner_components > 0 ? cfg.wigner_components : suggested_components(spec);
    field = wigner_gaussian_mixture(spec, grid, n);
    method = "mixture";
    components = std::to_string(n);
  } else {
    const TruncationConfig trunc =
        cfg.auto_truncation ? adequate_truncation(spec.probe, {200, 300, 400, 500, 600},
                                                  cfg.truncation.tail_tol)
                            : cfg.truncation;
    field = wigner_fock(prepare_scenario(spec, trunc), grid);
    method = "fock";
    components = "n_max=" + std::to_string(trunc.n_max);
  }
  Curve c;
  c.slice = json{{"alpha", p.alpha},
                 {"r", p.r},
                 {"sigma2", p.sigma2},
                 {"scenario", std::string(to_string(p.order))}};
  c.file = "wigner" + slice_suffix(c.slice) + ".csv";
  c.preamble = metadata_preamble({{"version", library_version()},
                                  {"config_hash", hash},
                                  {"alpha", num(p.alpha)},
                                  {"r", num(p.r)},
                                  {"sigma2", num(p.sigma2)},
                                  {"scenario", std::string(to_string(p.order))},
                                  {"method", method},
                                  {"components", components},
                                  {"x_range", num(grid.x_min) + ":" + num(grid.x_max)},
                                  {"p_range", num(grid.p_min) + ":" + num(grid.p_max)},
                                  {"nx", std::to_string(grid.nx)},
                                  {"np", std::to_string(grid.np)},
                                  {"integral", num(wigner_integral(field, grid))},
                                  {"layout", "rows are x values, columns are p values"}});
  c.columns = {"x/p"};
  for (int j = 0; j < grid.np; ++j) c.columns.push_back(num(grid.p(j)));
  for (int i = 0; i < grid.nx; ++i) {
    std::vector<std::string> line{num(grid.x(i))};
    for (int j = 0; j < grid.np; ++j) line.push_back(num(field(i, j)));
    c.rows.push_back(std::move(line));
  }
  return c;
}

std::vector<Curve> wigner_curves(const std::vector<SweepPoint>& points, const SweepConfig& cfg,
                                 const std::string& hash) {
  std::vector<Curve> curves;
  std::set<std::string> seen;
  for (const auto& p : points) {
    const std::string key = num(p.alpha) + "|" + num(p.r) + "|" + num(p.sigma2) + "|" +
                            std::string(to_string(p.order));
    if (seen.insert(key).second) curves.push_back(wigner_curve(p, cfg, hash));
  }
  return curves;
}

struct FigureInfo {
  std::string description;
  json axes;
};

FigureInfo figure_info(FigureId f) {
  switch (f) {
    case FigureId::Fig2:
      return {"QFI H versus squeezing r at fixed alpha, numerical and noiseless closed form",
              json{{"x", "r"}, {"y", {"H", "F"}}}};
    case FigureId::Fig3:
      return {"QFI H and homodyne FI F versus alpha (and sigma^2) for each scenario",
              json{{"x", {"alpha", "sigma2"}}, {"y", {"H", "F"}}}};
    case FigureId::Zeta:
      return {"Scenario ratios zeta_H = H_a/H_b and zeta_F = F_a/F_b",
              json{{"x", {"alpha", "sigma2"}}, {"y", {"zeta_H", "zeta_F"}}}};
    case FigureId::Optimality:
      return {"Optimality ratio F/H of Y-homodyne detection for each scenario",
              json{{"x", {"alpha", "sigma2"}}, {"y", {"F_over_H"}}}};
    case FigureId::Wigner:
      return {"Wigner functions of the dephased probes on a dense (x, p) grid",
              json{{"x", "x"}, {"y", "p"}, {"value", "W"}}};
  }
  return {};
}

std::vector<fs::path> write_figure(FigureId figure, std::vector<Curve> curves,
                                   const fs::path& out_dir, const std::string& hash) {
  if (curves.empty()) throw ConfigError(std::string(to_string(figure)) + ": nothing to emit");
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  const FigureInfo info = figure_info(figure);
  json manifest;
  manifest["figure"] = std::string(to_string(figure));
  manifest["description"] = info.description;
  manifest["library"] = "phasediff";
  manifest["version"] = library_version();
  manifest["config_hash"] = hash;
  manifest["axes"] = info.axes;
  manifest["curves"] = json::array();
  for (const auto& c : curves) {
    const fs::path path = out_dir / c.file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << c.preamble;
    for (std::size_t i = 0; i < c.columns.size(); ++i) out << (i ? "," : "") << c.columns[i];
    out << '\n';
    for (const auto& line : c.rows) {
      for (std::size_t i = 0; i < line.size(); ++i) out << (i ? "," : "") << line[i];
      out << '\n';
    }
    written.push_back(path);
    manifest["curves"].push_back(
        json{{"file", c.file}, {"slice", c.slice}, {"points", c.rows.size()}});
  }
  const fs::path mpath = out_dir / (std::string(to_string(figure)) + "_manifest.json");
  std::ofstream(mpath, std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
  written.push_back(mpath);
  return written;
}

}  // namespace

PhaseSpaceGrid wigner_grid_for(const ScenarioSpec& spec, const SweepConfig& cfg) {
  const GaussianMixture<> mix = gaussian_mixture(spec, suggested_components(spec));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto& g = mix.components[k];
    mean += mix.weights[k] * g.mean;
    second += mix.weights[k] * (g.cov + g.mean * g.mean.transpose());
  }
  const Eigen::Matrix2d cov = second - mean * mean.transpose();
  auto range = [&](const std::optional<std::pair<double, double>>& fixed, int axis) {
    if (fixed) return *fixed;
    const double half = 8.0 * std::sqrt(std::max(cov(axis, axis), 0.5));
    return std::pair{mean(axis) - half, mean(axis) + half};
  };
  const auto [x0, x1] = range(cfg.wigner_x_range, 0);
  const auto [p0, p1] = range(cfg.wigner_p_range, 1);
  return PhaseSpaceGrid(x0, x1, cfg.wigner_nx, p0, p1, cfg.wigner_np);
}

void write_wigner_csv(const fs::path& path, const WignerField<>& field, const PhaseSpaceGrid& grid,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << metadata_preamble(meta) << "x/p";
  for (int j = 0; j < grid.np; ++j) out << ',' << num(grid.p(j));
  out << '\n';
  for (int i = 0; i < grid.nx; ++i) {
    out << num(grid.x(i));
    for (int j = 0; j < grid.np; ++j) out << ',' << num(field(i, j));
    out << '\n';
  }
}

std::vector<fs::path> emit_figure_data(const std::vector<SweepResult>& results, FigureId figure,
                                       const FigureContext& ctx) {
  if (results.empty())
    throw ConfigError(std::string(to_string(figure)) + ": results are empty");
  std::vector<Curve> curves;
  switch (figure) {
    case FigureId::Fig2: curves = fig2_curves(results); break;
    case FigureId::Fig3: curves = fig3_curves(results); break;
    case FigureId::Zeta: curves = zeta_curves(results); break;
    case FigureId::Optimality: curves = optimality_curves(results); break;
    case FigureId::Wigner: {
      std::vector<SweepPoint> points;
      for (const auto& r : results) points.push_back(r.params);
      curves = wigner_curves(points, ctx.config, ctx.config_hash);
      break;
    }
  }
  return write_figure(figure, std::move(curves), ctx.out_dir, ctx.config_hash);
}

std::vector<fs::path> run_wigner(const SweepConfig& cfg) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  const fs::path dir = fs::path(cfg.output_path).parent_path();
  return write_figure(FigureId::Wigner, wigner_curves(expand_grid(cfg), cfg, hash),
                      dir.empty() ? fs::path(".") : dir, hash);
}

}  // namespace phasediff
