#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "massbound/errors.hpp"
#include "massbound/experiment.hpp"
#include "massbound/parallel.hpp"

using namespace massbound;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("massbound_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool same_number(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

const char* const kGenerated = R"(
[experiment]
seed = 77
[metric]
family = generated
n = 3, 4, 5
count = 6
[theorem]
name = boundary-level
c = -0.5, 0.5, 1, 2
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(
; comment
[experiment]
kind = check
seed = 9
jobs = 2
[metric]
family = schwarzschild
n = 3, 5
m = linspace 0 1 3, 4
r0 = 2
[theorem]
name = boundary-level
c = 0.5, equality
[tolerances]
hypothesis = 1e-9
residual = 1e-7
[output]
dir = out
prefix = x_
plot_axis = m
)");
  CHECK(c.kind == ExperimentKind::Check);
  CHECK(c.seed == 9);
  CHECK(c.jobs == 2);
  CHECK(c.metric.dimensions == std::vector<int>{3, 5});
  CHECK(c.metric.masses == std::vector<double>{0.0, 0.5, 1.0, 4.0});
  CHECK(c.metric.boundary_radii == std::vector<double>{2.0});
  CHECK(c.theorem == TheoremId::BoundaryLevel);
  CHECK(c.c_values == std::vector<double>{0.5});
  CHECK(c.c_equality);
  CHECK(c.options.tolerances.hypothesis == 1e-9);
  CHECK(c.options.solver.residual_tolerance == 1e-7);
  CHECK(c.output_dir == fs::path("out"));
  CHECK(c.prefix == "x_");
  CHECK(c.plot_axis == "m");

  const auto ps = parse_config("[metric]\nfamily = power-sum\nterms = 0.5:1, -0.1:2.5\n");
  REQUIRE(ps.metric.terms.size() == 2);
  CHECK(ps.metric.terms[1].coefficient == -0.1);
  CHECK(ps.metric.terms[1].exponent == 2.5);

  const auto lin = parse_config("[theorem]\nname = boundary-level\nc = linspace -0.9 0.9 19\n");
  CHECK(lin.c_values.size() == 19);
  CHECK(lin.c_values[9] == 0.0);
}

TEST_CASE("config diagnostics name the line and field") {
  CHECK(config_error("[metric]\nfamily = flat\nfoo = 1\n") == "t.ini:3: metric.foo: unknown key");
  CHECK(config_error("[metrics]\nn = 3\n") == "t.ini:1: metrics: unknown section");
  CHECK(config_error("[metric]\nn = 3, x\n") == "t.ini:2: metric.n: 'x' is not a number");
  CHECK(config_error("[metric]\nn = 2\n") == "t.ini:2: metric.n: dimensions must be integers >= 3");
  CHECK(config_error("[metric]\nn =\n") == "t.ini:2: metric.n: empty list entry");
  CHECK(config_error("[metric]\nr0 = 1, -2\n") ==
        "t.ini:2: metric.r0: boundary radii must be positive");
  CHECK(config_error("[metric]\nfamily = kerr\n") == "t.ini:2: metric.family: unknown family 'kerr'");
  CHECK(config_error("[metric]\nfamily = generated\n") ==
        "t.ini: metric.count: must be at least 1");
  CHECK(config_error("\n[tolerances]\nconclusion = -1\n") ==
        "t.ini:3: tolerances.conclusion: tolerance -1 must be positive");
  CHECK(config_error("[theorem]\nname = boundary-level\n") ==
        "t.ini: theorem.c: theorem boundary-level needs a nonempty c grid");
  CHECK(config_error("[metric]\nfamily = flat\n[theorem]\nname = boundary-level\nc = equality\n") ==
        "t.ini:5: theorem.c: 'equality' needs the schwarzschild family");
  CHECK(config_error("[theorem]\nc = linspace 0 1\n").find("t.ini:2: theorem.c: expected 'linspace") == 0);
  CHECK(config_error("[experiment]\nkind = run\n") ==
        "t.ini:2: experiment.kind: unknown experiment kind 'run'");
  // syntax errors come from the INI reader with its line number
  CHECK(config_error("[metric]\nn = 3\nn = 4\n").rfind("t.ini:3:", 0) == 0);
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("tolerance overrides") {
  ExperimentConfig c;
  apply_tolerance_override(c, "conclusion=1e-7");
  apply_tolerance_override(c, " quadrature = 1e-10 ");
  CHECK(c.options.tolerances.conclusion == 1e-7);
  CHECK(c.options.solver.quadrature_tolerance == 1e-10);
  CHECK_THROWS_AS(apply_tolerance_override(c, "conclusion"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "nonsense=1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "equality=0"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "equality=abc"), ConfigError);
}

TEST_CASE("grid expansion") {
  auto c = parse_config("[metric]\nn = 3, 4, 5\nm = -0.5, 0, 1, 2\nr0 = 1, 2\n");
  const auto cases = expand_metrics(c);
  CHECK(cases.size() == 24);
  for (std::size_t i = 0; i < cases.size(); ++i) CHECK(cases[i].index == i);

  const auto g = parse_config(kGenerated);
  const auto a = expand_metrics(g);
  const auto b = expand_metrics(g);
  REQUIRE(a.size() == 18);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].id == b[i].id);
    seeds.insert(a[i].seed);
  }
  CHECK(seeds.size() == a.size());
}

TEST_CASE("parallel map matches the serial reference") {
  const auto f = [](std::size_t i) -> double {
    if (i % 7 == 3) throw DomainError("row " + std::to_string(i));
    return std::sqrt(double(i));
  };
  const auto serial = parallel::map_rows_serial(50, f);
  for (int jobs : {1, 3, 8}) {
    const auto par = parallel::map_rows(50, f, jobs);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].ok() == serial[i].ok());
      CHECK(par[i].error == serial[i].error);
      if (par[i].ok()) CHECK(*par[i].value == *serial[i].value);
    }
  }
  CHECK(serial[3].error == "row 3");
}

TEST_CASE("sweep kernels agree row by row") {
  const auto config = parse_config(kGenerated);
  const auto serial = run_rows_serial(config);
  for (int jobs : {1, 4}) {
    const auto par = run_rows(config, jobs);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].index == serial[i].index);
      CHECK(par[i].metric == serial[i].metric);
      CHECK(same_number(par[i].c, serial[i].c));
      CHECK(same_number(par[i].condition_margin, serial[i].condition_margin));
      CHECK(same_number(par[i].conclusion_margin, serial[i].conclusion_margin));
      CHECK(same_number(par[i].mass, serial[i].mass));
      CHECK(par[i].status == serial[i].status);
      CHECK(par[i].message == serial[i].message);
    }
  }
}

TEST_CASE("one failing row does not poison the sweep") {
  // m = -3 makes U(r0) negative; c = 1 and c = -1 are excluded values
  const auto config = parse_config(R"(
[metric]
family = schwarzschild
n = 3
m = -3, 1
[theorem]
name = boundary-level
c = -1, 0.5, 1
)");
  const auto rows = run_rows(config, 2);
  REQUIRE(rows.size() == 6);
  for (int i : {0, 1, 2}) {
    CHECK(rows[i].status == "rejected");
    CHECK(rows[i].message.find("U(r0)") != std::string::npos);
  }
  CHECK(rows[3].status == "rejected");  // c = -1
  CHECK(rows[4].status == "ok");
  CHECK(rows[5].status == "rejected");  // c = 1
  CHECK(healthy(rows[0], config.options.solver));
  CHECK(healthy(rows[4], config.options.solver));
  auto broken = rows[4];
  broken.status = "error";
  CHECK(!healthy(broken, config.options.solver));
}

TEST_CASE("flags are recomputable from margins and tolerances") {
  const auto config = parse_config(kGenerated);
  const auto& tol = config.options.tolerances;
  int checked = 0;
  for (const auto& r : run_rows(config, 0)) {
    if (r.status != "ok") continue;
    CHECK(r.hypothesis_holds == (r.condition_margin >= -tol.hypothesis));
    CHECK(r.conclusion_holds == (r.conclusion_margin >= -tol.conclusion));
    CHECK(r.equality_hypothesis == (std::abs(r.condition_margin) <= tol.equality));
    CHECK(r.equality_conclusion == (std::abs(r.conclusion_margin) <= tol.equality));
    CHECK(r.soundness_violation == (r.hypothesis_holds && !r.conclusion_holds));
    CHECK(!r.soundness_violation);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("flat single check") {
  const auto config = parse_config("[metric]\nfamily = flat\nn = 3\n[theorem]\nname = conformal-green\n");
  const auto rows = run_rows_serial(config);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].condition_margin) <= 1e-12);
  CHECK(rows[0].mass == 0.0);
  CHECK(rows[0].rigidity_residual == 0.0);
}

TEST_CASE("report table round-trips at 17 digits") {
  const auto rows = run_rows_serial(parse_config(kGenerated));
  std::ostringstream out;
  write_report(out, rows, "T");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# generated T");
  std::getline(in, line);
  CHECK(line == kReportColumns);
  const std::size_t columns = cells(kReportColumns).size();
  for (const auto& r : rows) {
    REQUIRE(std::getline(in, line));
    const auto f = cells(line);
    REQUIRE(f.size() == columns);
    CHECK(std::stoul(f[0]) == r.index);
    CHECK(f[1] == r.metric);
    if (r.status == "ok") {
      CHECK(std::stod(f[10]) == r.condition_margin);
      CHECK(std::stod(f[11]) == r.conclusion_margin);
      CHECK(std::stod(f[7]) == r.mass);
    }
  }
}

TEST_CASE("plot data") {
  const fs::path dir = scratch_dir("plots");

  SUBCASE("c sweep on schwarzschild crosses zero at the equality constant") {
    for (int n : {3, 4}) {
      const double m = 1.0;
      const double cstar = (2.0 - m) / (2.0 + m);
      auto config = parse_config(fmt::format(
          "[metric]\nn = {}\nm = {}\n[theorem]\nname = boundary-level\nc = linspace -0.9 0.9 37\n", n, m));
      const auto rows = run_rows_serial(config);
      emit_sweep_plots(rows, "c", dir / "c.csv", "T");
      const auto lines = lines_of(dir / "c.csv");
      CHECK(lines[1] == "group,c,condition_margin,conclusion_margin,mass,capacity");
      CHECK(lines.size() == rows.size() + 2);
      int crossings = 0;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        if ((a.condition_margin < 0) != (b.condition_margin < 0)) {
          ++crossings;
          CHECK(a.c < cstar);
          CHECK(b.c > cstar);
        }
        if ((a.conclusion_margin < 0) != (b.conclusion_margin < 0)) {
          // the conclusion margin is affine in c, so interpolation is exact
          const double t = a.conclusion_margin / (a.conclusion_margin - b.conclusion_margin);
          CHECK(a.c + t * (b.c - a.c) == doctest::Approx(cstar).epsilon(1e-8));
        }
      }
      CHECK(crossings == 1);
    }
  }
  SUBCASE("m sweep reproduces the mass") {
    const auto config = parse_config("[metric]\nm = linspace -1 4 11\n[output]\nplot_axis = m\n");
    const auto rows = run_rows_serial(config);
    emit_sweep_plots(rows, "m", dir / "m.csv", "T");
    for (const auto& r : rows) CHECK(r.mass == doctest::Approx(r.mass_parameter).epsilon(1e-8));
    const auto lines = lines_of(dir / "m.csv");
    CHECK(cells(lines[2])[0] == "schwarzschild(n=3,m=*,r0=1,c=)");
  }
  SUBCASE("equality constants along m form one curve") {
    const auto config = parse_config(
        "[metric]\nn = 3, 4\nm = -1, 0.5, 2\n[theorem]\nname = boundary-level\nc = equality, 0.3\n");
    const auto rows = run_rows_serial(config);
    emit_sweep_plots(rows, "m", dir / "eq.csv", "T");
    std::map<std::string, int> sizes;
    for (const auto& line : lines_of(dir / "eq.csv")) {
      if (line.empty() || line[0] != '"') continue;
      ++sizes[cells(line)[0]];
    }
    CHECK(sizes.size() == 4);
    CHECK(sizes["schwarzschild(n=3,m=*,r0=1,c=equality)"] == 3);
    CHECK(sizes["schwarzschild(n=4,m=*,r0=1,c=0.29999999999999999)"] == 3);
  }
  SUBCASE("r0 sweep is continuous") {
    const auto config = parse_config(
        "[metric]\nm = 1\nr0 = linspace 0.8 1.2 41\n[theorem]\nname = boundary-level\nc = 0.3\n");
    const auto rows = run_rows_serial(config);
    emit_sweep_plots(rows, "r0", dir / "r0.csv", "T");
    for (std::size_t i = 2; i < rows.size(); ++i) {
      // second differences of a smooth function on a step-0.01 grid
      const double d2 = rows[i].conclusion_margin - 2 * rows[i - 1].conclusion_margin +
                        rows[i - 2].conclusion_margin;
      CHECK(std::abs(d2) <= 1e-2);
    }
  }
  SUBCASE("inconsistent rows are rejected") {
    auto rows = run_rows_serial(parse_config("[metric]\nm = 1, 2\n"));
    CHECK_THROWS_AS(emit_sweep_plots(rows, "c", dir / "x.csv", "T"), ConfigError);  // no c
    auto repeated = rows;
    repeated.push_back(rows[0]);
    CHECK_THROWS_AS(emit_sweep_plots(repeated, "m", dir / "x.csv", "T"), ConfigError);
    CHECK_THROWS_AS(emit_sweep_plots(rows, "speed", dir / "x.csv", "T"), ConfigError);
    auto mixed = rows;
    mixed[1].theorem = "harmonic-green";
    CHECK_THROWS_AS(emit_sweep_plots(mixed, "m", dir / "x.csv", "T"), ConfigError);
    auto failed = rows;
    failed[0].status = "error";
    CHECK_THROWS_AS(emit_sweep_plots(failed, "m", dir / "x.csv", "T"), ConfigError);
    CHECK_NOTHROW(emit_sweep_plots(rows, "m", dir / "x.csv", "T"));
  }
}

TEST_CASE("oracle suite") {
  const auto checks = validate_oracles();
  CHECK(checks.size() == 18);
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.dimension);
    CAPTURE(c.max_deviation);
    CHECK(c.passed());
    if (c.name == "flat-exterior") CHECK(c.tolerance <= 1e-13);
  }
}

TEST_CASE("run writes deterministic tables and reports solver health") {
  const fs::path dir = scratch_dir("run");
  auto config = parse_config(kGenerated);
  config.output_dir = dir;
  config.jobs = 2;
  std::ostringstream log;
  const auto first = run(config, log);
  CHECK(first.exit_code == 0);
  CHECK(first.rows == 72);
  const auto a = lines_of(dir / "report.csv");
  config.jobs = 1;
  run(config, log);
  const auto b = lines_of(dir / "report.csv");
  REQUIRE(a.size() == b.size());
  CHECK(a[0].rfind("# generated ", 0) == 0);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "timings.csv"));
  CHECK(fs::exists(dir / "margins.csv"));

  // a failed hypothesis is a valid result, an unmet residual tolerance is not
  auto strict = config;
  apply_tolerance_override(strict, "residual=1e-30");
  CHECK(run(strict, log).exit_code == 3);

  auto check = parse_config("[experiment]\nkind = check\n[metric]\nm = -1\n");
  check.output_dir = dir;
  const auto result = run(check, log);
  CHECK(result.exit_code == 0);
  CHECK(!run_rows_serial(check)[0].hypothesis_holds);
  CHECK(lines_of(dir / "profiles.csv").size() == 64 + 2);

  auto fill = parse_config("[experiment]\nkind = fill-in\n[metric]\nn = 3, 4\nm = 0, 1\n");
  fill.output_dir = dir;
  CHECK(run(fill, log).exit_code == 0);
  CHECK(lines_of(dir / "fill_in.csv").size() == 4 + 2);
}
