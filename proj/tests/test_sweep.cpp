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

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "phasediff/sweep.hpp"

using namespace phasediff;
namespace fs = std::filesystem;
using Catch::Matchers::WithinRel;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("phasediff_test_sweep_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

SweepConfig small_grid(const fs::path& out) {
  SweepConfig cfg = parse_config(R"(
alpha_values = 0.5, 1, 1.5
r_values = 0, 0.3
sigma2_values = 0, 0.05
scenarios = a, b
n_max = 60
outputs = qfi, fi
)");
  cfg.output_path = out.string();
  return cfg;
}

SweepResult synthetic(double alpha, double r, double sigma2, ScenarioOrder o, double h, double f) {
  SweepResult row;
  row.params = {alpha, r, sigma2, o};
  row.h = h;
  row.f = f;
  return row;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(PHASEDIFF_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parse, serialize, parse, serialize is idempotent", "[config]") {
  const SweepConfig a = parse_config(R"(
# comment line
profile = full
alpha_values = 1, 1.75, 2.5   # trailing comment
r_values = -1, 0.1
sigma2_values = 0.1
scenarios = b
delta_theta = 0.004
outputs = qfi, zeta, optimality_ratio
output_path = out/results.csv
workers = 3
wigner_x_range = -3, 9
wigner_resolution = 51, 61
wigner_components = 500
wigner_method = fock
)");
  CHECK(a.truncation.n_max == 600);
  CHECK(a.alpha_values == std::vector<double>{1, 1.75, 2.5});
  const std::string s1 = serialize_config(a);
  const SweepConfig b = parse_config(s1);
  CHECK(b == a);
  CHECK(serialize_config(b) == s1);
}

TEST_CASE("config round trip holds for random configs", "[config][property]") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    SweepConfig c;
    c.alpha_values.clear();
    for (int i = 0; i < 1 + trial % 4; ++i) c.alpha_values.push_back(5 * u(gen));
    c.r_values = {2 * u(gen) - 1, u(gen) / 3};
    c.sigma2_values = {u(gen) * 0.3};
    c.delta_theta = 0.001 + 0.01 * u(gen);
    c.theta = u(gen);
    c.auto_truncation = trial % 2 == 0;
    c.truncation.tail_tol = u(gen) * 1e-6;
    c.workers = 1 + trial % 3;
    if (trial % 3 == 0) c.wigner_p_range = std::pair{-u(gen) - 1, u(gen) + 1};
    const std::string s = serialize_config(c);
    const SweepConfig back = parse_config(s);
    CHECK(back == c);
    CHECK(serialize_config(back) == s);
  }
}

TEST_CASE("config keys and overrides", "[config]") {
  SweepConfig c = parse_config("n_max = 300\nprofile = desk\n");
  CHECK(c.truncation.n_max == 300);  // explicit keys refine the profile
  c = parse_config("n_max = auto\n");
  CHECK(c.auto_truncation);
  apply_override(c, "alpha_values=3,4");
  CHECK(c.alpha_values == std::vector<double>{3, 4});
  apply_override(c, " scenarios = b ");
  CHECK(c.scenarios == std::vector{ScenarioOrder::DephaseThenSqueeze});
  CHECK(config_hash(c).size() == 16);
  SweepConfig d = c;
  d.workers = 4;
  CHECK(config_hash(d) == config_hash(c));
  d.alpha_values = {3, 4.5};
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("config errors", "[config]") {
  CHECK_THROWS_AS(parse_config("colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_values = 1, x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_values =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenarios = c\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenarios = a, a\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("delta_theta = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("outputs = qfi, heat\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("r_values = 3.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("workers = 0\n"), ConfigError);
  SweepConfig c;
  CHECK_THROWS_AS(apply_override(c, "sigma2_values=-0.1"), ConfigError);
}

TEST_CASE("grid expansion is lexicographic in list order", "[sweep]") {
  SweepConfig c;
  c.alpha_values = {3, 1, 2};
  c.r_values = {0.5, 0};
  c.sigma2_values = {0.1, 0};
  c.scenarios = {ScenarioOrder::DephaseThenSqueeze, ScenarioOrder::SqueezeThenDephase};
  const auto pts = expand_grid(c);
  REQUIRE(pts.size() == 24);
  CHECK(pts[0] == SweepPoint{3, 0.5, 0.1, ScenarioOrder::DephaseThenSqueeze});
  CHECK(pts[1] == SweepPoint{3, 0.5, 0.1, ScenarioOrder::SqueezeThenDephase});
  CHECK(pts[2] == SweepPoint{3, 0.5, 0.0, ScenarioOrder::DephaseThenSqueeze});
  CHECK(pts[4] == SweepPoint{3, 0.0, 0.1, ScenarioOrder::DephaseThenSqueeze});
  CHECK(pts[8] == SweepPoint{1, 0.5, 0.1, ScenarioOrder::DephaseThenSqueeze});
  CHECK(pts[23] == SweepPoint{2, 0.0, 0.0, ScenarioOrder::SqueezeThenDephase});
}

TEST_CASE("single noiseless coherent point gives H and F near 16", "[sweep]") {
  SweepConfig c;
  c.scenarios = {ScenarioOrder::SqueezeThenDephase};
  const SweepResult row = evaluate_point({2.0, 0.0, 0.0, ScenarioOrder::SqueezeThenDephase}, c);
  CHECK(row.status == RowStatus::Ok);
  CHECK_THAT(row.h, WithinRel(16.0, 1e-3));
  CHECK_THAT(row.f, WithinRel(16.0, 1e-3));
  CHECK_THAT(row.h_noiseless, WithinRel(16.0, 1e-12));
  CHECK(row.h_richardson <= 0.02);
  CHECK(row.tail_population < 1e-8);
  CHECK(row.n_max == 200);
}

TEST_CASE("sweep writes 24 ordered rows with manifest", "[sweep]") {
  const fs::path dir = scratch("grid");
  SweepConfig c = small_grid(dir / "results.csv");
  c.workers = 2;
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 24);
  const auto pts = expand_grid(c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].params == pts[i]);
    CHECK(rows[i].status == RowStatus::Ok);
    CHECK(rows[i].f <= rows[i].h * 1.001);
  }
  const std::string text = slurp(c.output_path);
  CHECK(count_lines(text) == 25);
  CHECK(text.substr(0, text.find('\n')) == results_csv_header());

  const auto m = nlohmann::json::parse(slurp(c.output_path + ".json"));
  CHECK(m["version"] == library_version());
  CHECK(m["config_hash"] == config_hash(c));
  CHECK(parse_config(m["config"].get<std::string>()) == c);

  const auto back = read_results(c.output_path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(to_csv_row(back[i]) == to_csv_row(rows[i]));
}

TEST_CASE("rerun is byte-identical regardless of worker count", "[sweep]") {
  const fs::path dir = scratch("rerun");
  SweepConfig c = small_grid(dir / "one.csv");
  c.workers = 1;
  run_sweep(c);
  const std::string first = slurp(c.output_path);
  run_sweep(c, {.fresh = true});
  CHECK(slurp(c.output_path) == first);
  SweepConfig d = c;
  d.output_path = (dir / "two.csv").string();
  d.workers = 3;
  run_sweep(d);
  CHECK(slurp(d.output_path) == first);
}

TEST_CASE("interrupted sweep resumes to the uninterrupted file", "[sweep]") {
  const fs::path dir = scratch("resume");
  SweepConfig full = small_grid(dir / "full.csv");
  run_sweep(full);
  const std::string expected = slurp(full.output_path);

  SweepConfig c = full;
  c.output_path = (dir / "part.csv").string();
  const auto partial = run_sweep(c, {.limit = 7});
  CHECK(partial.size() == 7);
  CHECK(count_lines(slurp(c.output_path)) == 8);
  // Simulate a crash mid-write.
  std::ofstream(c.output_path, std::ios::app) << "1.5,0.3,0.05,b,60,0,0.0";
  std::size_t resumed = 0;
  const auto rows = run_sweep(c, {.on_row = [&](const SweepResult&) { ++resumed; }});
  CHECK(resumed == 17);
  CHECK(rows.size() == 24);
  CHECK(slurp(c.output_path) == expected);
  // Nothing left to do.
  run_sweep(c, {.on_row = [&](const SweepResult&) { ++resumed; }});
  CHECK(resumed == 17);
}

TEST_CASE("existing output from another config is refused", "[sweep]") {
  const fs::path dir = scratch("mismatch");
  SweepConfig c = small_grid(dir / "r.csv");
  c.alpha_values = {0.5};
  run_sweep(c);
  c.alpha_values = {0.7};
  CHECK_THROWS_AS(run_sweep(c), ConfigError);
  CHECK(run_sweep(c, {.fresh = true}).size() == 8);
}

TEST_CASE("per-point failures are recorded and the sweep continues", "[sweep]") {
  const fs::path dir = scratch("failures");
  SweepConfig c = small_grid(dir / "r.csv");
  c.alpha_values = {3.0, 0.5};
  c.r_values = {0.0};
  c.sigma2_values = {0.0};
  c.truncation.n_max = 20;
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status == RowStatus::Error);
  CHECK(!rows[0].message.empty());
  CHECK(std::isnan(rows[0].h));
  CHECK(rows[2].status == RowStatus::Ok);
  CHECK(read_results(c.output_path).size() == 4);
}

TEST_CASE("automatic truncation picks an adequate dimension", "[sweep]") {
  SweepConfig c = parse_config("n_max = auto\noutputs = qfi\n");
  const SweepResult row = evaluate_point({4.0, 1.0, 0.1, ScenarioOrder::DephaseThenSqueeze}, c);
  CHECK(row.n_max == 400);
  CHECK(row.status == RowStatus::Ok);
  CHECK(std::isnan(row.f));
}

TEST_CASE("figure export refuses empty results and writes nothing", "[figure]") {
  const fs::path dir = scratch("empty");
  FigureContext ctx;
  ctx.out_dir = dir / "fig";
  for (auto id : {FigureId::Fig2, FigureId::Fig3, FigureId::Zeta, FigureId::Optimality,
                  FigureId::Wigner})
    CHECK_THROWS_AS(emit_figure_data({}, id, ctx), ConfigError);
  CHECK(!fs::exists(ctx.out_dir));
}

TEST_CASE("fig2 gives one H-vs-r curve per alpha plus closed forms", "[figure]") {
  const fs::path dir = scratch("fig2");
  std::vector<SweepResult> rows;
  for (double a : {2.0, 4.0, 6.0})
    for (double r : {-1.0, -0.5, 0.0, 0.5, 1.0})
      rows.push_back(synthetic(a, r, 0.01, ScenarioOrder::SqueezeThenDephase, a * a + r, 1.0));
  FigureContext ctx{dir, "0123456789abcdef", {}};
  const auto files = emit_figure_data(rows, FigureId::Fig2, ctx);
  REQUIRE(files.size() == 7);
  CHECK(files.back().filename() == "fig2_manifest.json");
  const auto m = nlohmann::json::parse(slurp(files.back()));
  CHECK(m["version"] == library_version());
  CHECK(m["config_hash"] == "0123456789abcdef");
  REQUIRE(m["curves"].size() == 6);
  CHECK(m["curves"][0]["slice"]["alpha"] == 2.0);
  CHECK(m["curves"][0]["slice"]["sigma2"] == 0.01);
  CHECK(m["curves"][0]["points"] == 5);
  const std::string curve = slurp(dir / m["curves"][1]["file"].get<std::string>());
  CHECK(curve.substr(0, curve.find('\n')) == "r,H,F,status");
  CHECK(count_lines(curve) == 6);
  CHECK(curve.find("\n-1,15,1,ok\n") != std::string::npos);
  const std::string closed = slurp(dir / "fig2_closed_form_alpha=2.csv");
  CHECK(closed.find("\n0,16,16\n") != std::string::npos);
}

TEST_CASE("zeta gives zeta_H and zeta_F curves per r", "[figure]") {
  const fs::path dir = scratch("zeta");
  std::vector<SweepResult> rows;
  for (double a : {1.0, 2.0, 3.0})
    for (double r : {0.5, 1.0}) {
      rows.push_back(synthetic(a, r, 0.1, ScenarioOrder::SqueezeThenDephase, 10, 8));
      rows.push_back(synthetic(a, r, 0.1, ScenarioOrder::DephaseThenSqueeze, 40, 20));
    }
  const auto files = emit_figure_data(rows, FigureId::Zeta, {dir, "h", {}});
  REQUIRE(files.size() == 3);
  const std::string curve = slurp(files[0]);
  CHECK(curve.substr(0, curve.find('\n')) ==
        "alpha,zeta_H,zeta_F,H_b_over_a,F_b_over_a,H_a,H_b,F_a,F_b,status");
  CHECK(curve.find("\n1,0.25,0.4,4,2.5,10,40,8,20,ok\n") != std::string::npos);
  const auto m = nlohmann::json::parse(slurp(files.back()));
  CHECK(m["curves"][0]["slice"]["r"] == 0.5);
  CHECK(m["curves"][1]["slice"]["r"] == 1.0);
}

TEST_CASE("figures report missing columns", "[figure]") {
  const fs::path dir = scratch("missing");
  std::vector<SweepResult> only_a{
      synthetic(1, 0.5, 0.1, ScenarioOrder::SqueezeThenDephase, 10, 8)};
  CHECK_THROWS_AS(emit_figure_data(only_a, FigureId::Zeta, {dir / "z", "h", {}}), ConfigError);
  std::vector<SweepResult> no_f{synthetic(1, 0.5, 0.1, ScenarioOrder::SqueezeThenDephase, 10,
                                          std::numeric_limits<double>::quiet_NaN())};
  CHECK_THROWS_AS(emit_figure_data(no_f, FigureId::Optimality, {dir / "o", "h", {}}), ConfigError);
  std::vector<SweepResult> no_h{synthetic(1, 0.5, 0.1, ScenarioOrder::SqueezeThenDephase,
                                          std::numeric_limits<double>::quiet_NaN(), 1)};
  CHECK_THROWS_AS(emit_figure_data(no_h, FigureId::Fig3, {dir / "f", "h", {}}), ConfigError);
  CHECK(!fs::exists(dir / "z"));
  CHECK(!fs::exists(dir / "o"));
  CHECK(!fs::exists(dir / "f"));
  CHECK(emit_figure_data(no_f, FigureId::Fig3, {dir / "g", "h", {}}).size() == 2);
}

TEST_CASE("optimality and fig3 add sigma curves when sigma varies", "[figure]") {
  const fs::path dir = scratch("optimality");
  std::vector<SweepResult> rows;
  for (double a : {1.0, 2.0})
    for (double s2 : {0.01, 0.04, 0.09})
      for (auto o : {ScenarioOrder::SqueezeThenDephase, ScenarioOrder::DephaseThenSqueeze})
        rows.push_back(synthetic(a, 1.0, s2, o, 10, 9));
  // 3 sigma slices x 2 scenarios along alpha, 2 alpha slices x 2 scenarios along sigma.
  CHECK(emit_figure_data(rows, FigureId::Optimality, {dir, "h", {}}).size() == 11);
  const std::string c = slurp(dir / "optimality_vs_alpha_r=1_sigma2=0.01_scenario=a.csv");
  CHECK(c.find("\n1,0.9,10,9,ok\n") != std::string::npos);
}

TEST_CASE("wigner export writes dense fields with metadata", "[figure][wigner]") {
  const fs::path dir = scratch("wigner");
  SweepConfig c = parse_config(R"(
alpha_values = 1
r_values = 0.5
sigma2_values = 0.1
scenarios = a, b
wigner_resolution = 41, 31
)");
  c.output_path = (dir / "results.csv").string();
  const auto files = run_wigner(c);
  REQUIRE(files.size() == 3);
  const std::string text = slurp(files[0]);
  CHECK(text.rfind("# phasediff wigner field\n", 0) == 0);
  CHECK(text.find("# config_hash=" + config_hash(c) + "\n") != std::string::npos);
  CHECK(text.find("# scenario=a\n") != std::string::npos);
  std::istringstream in(text);
  std::string line;
  int data_lines = 0, header_cols = 0;
  bool header_seen = false;
  double integral = 0.0;
  while (std::getline(in, line)) {
    if (line.rfind("# integral=", 0) == 0) integral = std::stod(line.substr(11));
    if (line[0] == '#') continue;
    if (!header_seen) {
      header_cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
      header_seen = true;
    } else {
      ++data_lines;
    }
  }
  CHECK(header_cols == 32);
  CHECK(data_lines == 41);
  CHECK_THAT(integral, WithinRel(1.0, 1e-3));
  const auto m = nlohmann::json::parse(slurp(files.back()));
  CHECK(m["figure"] == "wigner");
  CHECK(m["config_hash"] == config_hash(c));
}

TEST_CASE("cli exit codes", "[cli]") {
  const fs::path dir = scratch("cli");
  const fs::path good = dir / "good.cfg";
  std::ofstream(good) << "alpha_values = 0.5\nr_values = 0.2\nsigma2_values = 0.05\nn_max = 40\n"
                      << "output_path = " << (dir / "good.csv").string() << "\n";
  CHECK(run_cli("sweep " + good.string()) == 0);
  CHECK(run_cli("sweep " + good.string() + " --set alpha_values=0.6 --fresh") == 0);
  CHECK(read_results(dir / "good.csv").front().params.alpha == 0.6);
  CHECK(run_cli("figure " + (dir / "good.csv").string() + " fig3") == 0);
  CHECK(fs::exists(dir / "fig3_manifest.json"));
  CHECK(run_cli("figure " + (dir / "good.csv").string() + " fig9") == 1);

  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "alpha_values = 1\nmystery = 2\n";
  CHECK(run_cli("sweep " + bad.string()) == 1);
  CHECK(run_cli("sweep " + (dir / "absent.cfg").string()) == 1);
  CHECK(run_cli("sweep " + good.string() + " --set delta_theta=-1") == 1);

  const fs::path failing = dir / "failing.cfg";
  std::ofstream(failing) << "alpha_values = 3\nr_values = 0\nsigma2_values = 0\nn_max = 20\n"
                         << "output_path = " << (dir / "failing.csv").string() << "\n";
  CHECK(run_cli("sweep " + failing.string()) == 2);

  std::ofstream(dir / "empty.csv") << results_csv_header() << "\n";
  CHECK(run_cli("figure " + (dir / "empty.csv").string() + " fig2 -o " + (dir / "e").string()) ==
        1);
  CHECK(!fs::exists(dir / "e"));
}
