#include "massbound/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "massbound/conformal.hpp"
#include "massbound/elliptic.hpp"
#include "massbound/errors.hpp"
#include "massbound/parallel.hpp"

namespace massbound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

// ---- config parsing -------------------------------------------------------

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Where each "section.key" appears, for diagnostics.
class LineIndex {
 public:
  LineIndex(std::string_view text, std::string source) : source_(std::move(source)) {
    std::string section;
    int line = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
      ++line;
      const std::string s = trim(raw);
      if (s.empty() || s[0] == ';' || s[0] == '#') continue;
      if (s.front() == '[' && s.back() == ']') {
        section = trim(std::string_view(s).substr(1, s.size() - 2));
        lines_.emplace(section, line);
      } else if (const auto eq = s.find('='); eq != std::string::npos) {
        lines_.emplace(section + "." + trim(std::string_view(s).substr(0, eq)), line);
      }
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    const auto it = lines_.find(path);
    if (it == lines_.end()) throw ConfigError(fmt::format("{}: {}: {}", source_, path, what));
    throw ConfigError(fmt::format("{}:{}: {}: {}", source_, it->second, path, what));
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

double parse_double(const std::string& text, const LineIndex& where, const std::string& path) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    where.fail(path, fmt::format("'{}' is not a number", text));
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& text, const LineIndex& where,
                             const std::string& path) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    where.fail(path, fmt::format("'{}' is not a non-negative integer", text));
  }
  return value;
}

// Comma-separated entries, each a number or "linspace <start> <stop> <count>".
std::vector<double> parse_grid(const std::string& text, const LineIndex& where,
                               const std::string& path) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) where.fail(path, "empty list entry");
    if (item.rfind("linspace", 0) != 0) {
      out.push_back(parse_double(item, where, path));
      continue;
    }
    std::istringstream in(item.substr(8));
    double a = 0.0;
    double b = 0.0;
    int k = 0;
    std::string extra;
    if (!(in >> a >> b >> k) || k < 1 || (in >> extra)) {
      where.fail(path, "expected 'linspace <start> <stop> <count>'");
    }
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : (a * (k - 1 - i) + b * i) / (k - 1));
  }
  return out;
}

std::pair<double, double> parse_pair(const std::string& text, const LineIndex& where,
                                     const std::string& path) {
  const auto v = parse_grid(text, where, path);
  if (v.size() != 2 || !(v[0] <= v[1])) where.fail(path, "expected 'low, high' with low <= high");
  return {v[0], v[1]};
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"kind", "seed", "jobs"}},
      {"metric",
       {"family", "n", "m", "r0", "terms", "count", "num_terms", "exponent_offset", "coeff_range",
        "mass_range", "boundary_floor", "reparametrize_kappa"}},
      {"theorem", {"name", "c"}},
      {"tolerances",
       {"hypothesis", "conclusion", "equality", "large_boundary_value", "residual", "quadrature",
        "adaptive"}},
      {"output", {"dir", "prefix", "plot_axis"}},
  };
  return keys;
}

void set_tolerance(ExperimentConfig& config, const std::string& name, double value,
                   const std::function<void(const std::string&)>& fail) {
  if (!(value > 0.0) || !std::isfinite(value)) fail(fmt::format("tolerance {} must be positive", value));
  auto& tol = config.options.tolerances;
  auto& solver = config.options.solver;
  if (name == "hypothesis") tol.hypothesis = value;
  else if (name == "conclusion") tol.conclusion = value;
  else if (name == "equality") tol.equality = value;
  else if (name == "large_boundary_value") tol.large_boundary_value = value;
  else if (name == "residual") solver.residual_tolerance = value;
  else if (name == "quadrature") solver.quadrature_tolerance = value;
  else if (name == "adaptive") solver.adaptive_tolerance = value;
  else fail(fmt::format("unknown tolerance '{}'", name));
}

// ---- metrics --------------------------------------------------------------

std::string number(double x) { return fmt::format("{:.17g}", x); }

std::string csv_number(double x) { return std::isfinite(x) ? number(x) : std::string(); }

std::string csv_text(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + '"';
}

std::vector<double> c_grid(const ExperimentConfig& config, const MetricCase& item) {
  std::vector<double> cs = config.c_values;
  if (config.c_equality && config.metric.family == "schwarzschild") {
    cs.push_back(schwarzschild_equality_constant(item.dimension, item.mass_parameter,
                                                 item.boundary_radius));
  }
  return cs;
}

bool uses_boundary_value(TheoremId id) {
  return id == TheoremId::BoundaryLevel || id == TheoremId::NormalizedLevel;
}

ReportRow blank_row(const ExperimentConfig& config, const MetricCase& item, double c) {
  ReportRow row;
  row.metric = item.id;
  row.dimension = item.dimension;
  row.boundary_radius = item.boundary_radius;
  row.mass_parameter = item.mass_parameter;
  row.c = c;
  row.theorem = std::string(to_string(config.theorem));
  row.mass = row.mass_error = row.capacity = kNaN;
  row.condition_margin = row.conclusion_margin = kNaN;
  row.rigidity_residual = row.implication_margin = kNaN;
  row.conformal_residual = row.harmonic_residual = kNaN;
  return row;
}

void fail_row(ReportRow& row, std::string_view status, const std::string& message) {
  row.status = std::string(status);
  row.message = message;
}

Verdict verdict_for(const ExperimentConfig& config, const MetricAnalysis& a, double c) {
  const auto& tol = config.options.tolerances;
  switch (config.theorem) {
    case TheoremId::ConformalGreen: return check_theorem_main(a, tol);
    case TheoremId::HarmonicGreen: return check_corollary(a, tol);
    case TheoremId::MassCapacity: return check_mass_capacity(a, 0.0, tol);
    case TheoremId::BoundaryLevel: return check_mass_capacity(a, c, tol);
    case TheoremId::NormalizedLevel: return check_equivalent_form(a, c, tol);
  }
  throw std::logic_error("unreachable theorem id");
}

// All rows of one metric: one analysis, then one verdict per boundary value.
// Inputs outside the hypotheses (DomainError) are "rejected"; anything else
// that throws is an "error". A failure in the analysis covers every row of
// the metric, a failure in a verdict only its own row.
std::vector<ReportRow> metric_rows(const ExperimentConfig& config, const MetricCase& item) {
  const auto start = Clock::now();
  std::vector<ReportRow> rows;
  try {
    std::vector<double> cs{kNaN};
    if (uses_boundary_value(config.theorem)) cs = c_grid(config, item);
    if (config.theorem == TheoremId::MassCapacity) cs = {0.0};
    for (double c : cs) rows.push_back(blank_row(config, item, c));
  } catch (const DomainError& e) {
    rows = {blank_row(config, item, kNaN)};
    fail_row(rows[0], "rejected", e.what());
    return rows;
  }

  const auto fail_all = [&](std::string_view status, const char* what) {
    for (auto& row : rows) fail_row(row, status, what);
  };
  try {
    const MetricAnalysis a = analyze(build_metric(config.metric, item), config.options);
    for (auto& row : rows) {
      row.conformal_residual = a.conformal_green.residual_norm;
      row.harmonic_residual = a.harmonic_green.residual_norm;
      try {
        const Verdict v = verdict_for(config, a, row.c);
        row.mass = v.mass;
        row.mass_error = v.mass_error;
        row.capacity = v.capacity_constant;
        row.condition_margin = v.condition_margin;
        row.conclusion_margin = v.conclusion_margin;
        row.hypothesis_holds = v.hypothesis_holds;
        row.conclusion_holds = v.conclusion_holds;
        row.equality_hypothesis = v.equality.hypothesis;
        row.equality_conclusion = v.equality.conclusion;
        row.soundness_violation = v.soundness_violation;
        row.rigidity_residual = v.rigidity_residual;
        row.implication_margin = v.implication_margin;
        std::string joined;
        for (const auto& w : v.warnings) joined += (joined.empty() ? "" : "; ") + w;
        row.message = joined;
      } catch (const DomainError& e) {
        fail_row(row, "rejected", e.what());
      } catch (const std::exception& e) {
        fail_row(row, "error", e.what());
      }
    }
  } catch (const DomainError& e) {
    fail_all("rejected", e.what());
  } catch (const std::exception& e) {
    fail_all("error", e.what());
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  for (auto& row : rows) row.wall_seconds = seconds;
  return rows;
}

template <class Rows>
std::vector<ReportRow> flatten(const ExperimentConfig& config, const std::vector<MetricCase>& cases,
                               Rows&& per_metric) {
  std::vector<ReportRow> out;
  for (std::size_t i = 0; i < per_metric.size(); ++i) {
    if (per_metric[i].ok()) {
      for (auto& row : *per_metric[i].value) out.push_back(std::move(row));
    } else {
      ReportRow row = blank_row(config, cases[i], kNaN);
      fail_row(row, "error", per_metric[i].error);
      out.push_back(std::move(row));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

void write_header(std::ostream& out, std::string_view timestamp) {
  out << "# generated " << timestamp << '\n';
}

std::filesystem::path output_file(const ExperimentConfig& config, std::string_view name) {
  return config.output_dir / (config.prefix + std::string(name));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

// ---- oracles --------------------------------------------------------------

double schwarzschild_u(int n, double m, double r0, double r) {
  const double h = n - 2.0;
  return (2.0 * std::pow(r0, h) + m) / (2.0 * std::pow(r, h) + m);
}

double profile_deviation(const RadialProfile& f, const std::function<double(double)>& exact,
                         double r0) {
  double worst = 0.0;
  for (double r : sample_radii(r0, 96, 1e6)) worst = std::max(worst, std::abs(f(r).value - exact(r)));
  return worst;
}

}  // namespace

// ---- names ------------------------------------------------------------------

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Check: return "check";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::OracleValidation: return "validate-oracles";
    case ExperimentKind::FillIn: return "fill-in";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::Check, ExperimentKind::Sweep, ExperimentKind::OracleValidation,
                 ExperimentKind::FillIn}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown experiment kind '{}'", name));
}

TheoremId theorem_from_string(std::string_view name) {
  for (auto id : {TheoremId::ConformalGreen, TheoremId::HarmonicGreen, TheoremId::MassCapacity,
                  TheoremId::BoundaryLevel, TheoremId::NormalizedLevel}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError(fmt::format("unknown theorem '{}'", name));
}

// ---- config -----------------------------------------------------------------

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }
  const LineIndex where(text, source);

  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      if (body.empty()) where.fail(section, "key outside any section");
      where.fail(section, "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) where.fail(section + "." + key, "unknown key");
    }
  }

  const auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return trim(*v);
    return std::nullopt;
  };

  ExperimentConfig c;
  if (auto v = get("experiment.kind")) {
    try {
      c.kind = experiment_kind_from_string(*v);
    } catch (const ConfigError& e) {
      where.fail("experiment.kind", e.what());
    }
  }
  if (auto v = get("experiment.seed")) c.seed = parse_unsigned(*v, where, "experiment.seed");
  if (auto v = get("experiment.jobs")) c.jobs = int(parse_unsigned(*v, where, "experiment.jobs"));

  auto& m = c.metric;
  if (auto v = get("metric.family")) {
    static const std::set<std::string> families{"flat", "schwarzschild", "power-sum", "generated"};
    if (!families.count(*v)) where.fail("metric.family", fmt::format("unknown family '{}'", *v));
    m.family = *v;
  }
  if (auto v = get("metric.n")) {
    m.dimensions.clear();
    for (double d : parse_grid(*v, where, "metric.n")) {
      if (d != std::floor(d) || d < 3) where.fail("metric.n", "dimensions must be integers >= 3");
      m.dimensions.push_back(int(d));
    }
  }
  if (auto v = get("metric.m")) m.masses = parse_grid(*v, where, "metric.m");
  if (auto v = get("metric.r0")) {
    m.boundary_radii = parse_grid(*v, where, "metric.r0");
    for (double r : m.boundary_radii) {
      if (!(r > 0.0)) where.fail("metric.r0", "boundary radii must be positive");
    }
  }
  if (auto v = get("metric.terms")) {
    for (const auto& item : split(*v, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) where.fail("metric.terms", "expected 'coefficient:exponent' entries");
      m.terms.push_back({parse_double(parts[0], where, "metric.terms"),
                         parse_double(parts[1], where, "metric.terms")});
    }
  }
  if (auto v = get("metric.count")) m.count = int(parse_unsigned(*v, where, "metric.count"));
  if (auto v = get("metric.num_terms")) {
    m.num_terms = int(parse_unsigned(*v, where, "metric.num_terms"));
  }
  if (auto v = get("metric.exponent_offset")) {
    m.exponent_offset = parse_pair(*v, where, "metric.exponent_offset");
  }
  if (auto v = get("metric.coeff_range")) m.coeff_range = parse_pair(*v, where, "metric.coeff_range");
  if (auto v = get("metric.mass_range")) m.mass_range = parse_pair(*v, where, "metric.mass_range");
  if (auto v = get("metric.boundary_floor")) {
    m.boundary_floor = parse_double(*v, where, "metric.boundary_floor");
  }
  if (auto v = get("metric.reparametrize_kappa")) {
    m.reparametrize_kappa = parse_double(*v, where, "metric.reparametrize_kappa");
  }

  if (m.dimensions.empty()) where.fail("metric.n", "grid is empty");
  if (m.boundary_radii.empty()) where.fail("metric.r0", "grid is empty");
  if (m.family == "schwarzschild" && m.masses.empty()) where.fail("metric.m", "grid is empty");
  if (m.family == "power-sum" && m.terms.empty()) where.fail("metric.terms", "no terms given");
  if (m.family == "generated" && m.count < 1) where.fail("metric.count", "must be at least 1");

  if (auto v = get("theorem.name")) {
    try {
      c.theorem = theorem_from_string(*v);
    } catch (const ConfigError& e) {
      where.fail("theorem.name", e.what());
    }
  }
  if (auto v = get("theorem.c")) {
    std::string rest;
    for (const auto& item : split(*v, ',')) {
      if (item == "equality") {
        c.c_equality = true;
      } else {
        rest += (rest.empty() ? "" : ",") + item;
      }
    }
    if (!rest.empty()) c.c_values = parse_grid(rest, where, "theorem.c");
    if (c.c_equality && m.family != "schwarzschild") {
      where.fail("theorem.c", "'equality' needs the schwarzschild family");
    }
  }
  if (uses_boundary_value(c.theorem) && c.c_values.empty() && !c.c_equality) {
    where.fail("theorem.c", fmt::format("theorem {} needs a nonempty c grid", to_string(c.theorem)));
  }

  if (const auto tol = tree.get_child_optional("tolerances")) {
    for (const auto& [key, value] : *tol) {
      const std::string path = "tolerances." + key;
      set_tolerance(c, key, parse_double(trim(value.data()), where, path),
                    [&](const std::string& what) { where.fail(path, what); });
    }
  }

  if (auto v = get("output.dir")) c.output_dir = *v;
  if (auto v = get("output.prefix")) c.prefix = *v;
  if (auto v = get("output.plot_axis")) {
    static const std::set<std::string> axes{"c", "m", "r0", "n", "index"};
    if (!axes.count(*v)) where.fail("output.plot_axis", fmt::format("unknown axis '{}'", *v));
    c.plot_axis = *v;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot read config", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

void apply_tolerance_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("--tol-override '{}': expected name=value", assignment));
  }
  const std::string name = trim(assignment.substr(0, eq));
  const std::string text = trim(assignment.substr(eq + 1));
  const auto fail = [&](const std::string& what) {
    throw ConfigError(fmt::format("--tol-override {}: {}", name, what));
  };
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(fmt::format("'{}' is not a number", text));
  }
  set_tolerance(config, name, value, fail);
}

// ---- grid -------------------------------------------------------------------

std::vector<MetricCase> expand_metrics(const ExperimentConfig& config) {
  const auto& spec = config.metric;
  std::vector<MetricCase> out;
  const auto add = [&](std::string id, int n, double r0, double m, std::uint64_t seed) {
    out.push_back({out.size(), std::move(id), n, r0, m, seed});
  };
  for (int n : spec.dimensions) {
    for (double r0 : spec.boundary_radii) {
      if (spec.family == "flat") {
        add(fmt::format("flat(n={},r0={})", n, r0), n, r0, 0.0, 0);
      } else if (spec.family == "schwarzschild") {
        for (double m : spec.masses) {
          add(fmt::format("schwarzschild(n={},m={},r0={})", n, m, r0), n, r0, m, 0);
        }
      } else if (spec.family == "power-sum") {
        add(fmt::format("power-sum(n={},r0={})", n, r0), n, r0, kNaN, 0);
      } else {
        for (int i = 0; i < spec.count; ++i) {
          // distinct streams per dimension and radius, stable under grid edits elsewhere
          const std::uint64_t seed = config.seed + 1000003ULL * std::uint64_t(n) + std::uint64_t(i);
          add(fmt::format("generated(n={},r0={},seed={})", n, r0, seed), n, r0, kNaN, seed);
        }
      }
    }
  }
  return out;
}

RadialMetric build_metric(const MetricSpec& spec, const MetricCase& item) {
  const int n = item.dimension;
  const double r0 = item.boundary_radius;
  RadialMetric g = [&] {
    if (spec.family == "flat") return flat_metric(n, r0);
    if (spec.family == "schwarzschild") return schwarzschild(n, item.mass_parameter, r0);
    if (spec.family == "power-sum") return power_sum_metric(n, r0, spec.terms);
    GeneratorParams p = default_generator(n, r0);
    p.num_terms = spec.num_terms;
    p.exponent_range = {n + spec.exponent_offset.first, n + spec.exponent_offset.second};
    p.coeff_range = spec.coeff_range;
    const double scale = std::pow(r0, n - 2);
    p.mass_range = {spec.mass_range.first * scale, spec.mass_range.second * scale};
    p.boundary_floor = spec.boundary_floor;
    return random_nonneg_scalar_metric(item.seed, p);
  }();
  if (spec.reparametrize_kappa) return reparametrized(g, *spec.reparametrize_kappa, n - 1.0);
  return g;
}

// ---- kernels ----------------------------------------------------------------

std::vector<ReportRow> run_rows_serial(const ExperimentConfig& config) {
  const auto cases = expand_metrics(config);
  auto per_metric = parallel::map_rows_serial(
      cases.size(), [&](std::size_t i) { return metric_rows(config, cases[i]); });
  return flatten(config, cases, per_metric);
}

std::vector<ReportRow> run_rows(const ExperimentConfig& config, int jobs) {
  const auto cases = expand_metrics(config);
  auto per_metric = parallel::map_rows(
      cases.size(), [&](std::size_t i) { return metric_rows(config, cases[i]); }, jobs);
  return flatten(config, cases, per_metric);
}

bool healthy(const ReportRow& row, const SolverOptions& solver) {
  if (row.status == "rejected") return true;
  return row.status == "ok" && row.conformal_residual <= solver.residual_tolerance &&
         row.harmonic_residual <= solver.residual_tolerance;
}

// ---- tables -----------------------------------------------------------------

const char* const kReportColumns =
    "index,metric,n,r0,m_parameter,c,theorem,mass,mass_error,capacity,condition_margin,"
    "conclusion_margin,hypothesis_holds,conclusion_holds,equality_hypothesis,equality_conclusion,"
    "soundness_violation,rigidity_residual,implication_margin,conformal_residual,harmonic_residual,"
    "status,message";

void write_report(std::ostream& out, const std::vector<ReportRow>& rows,
                  std::string_view timestamp) {
  write_header(out, timestamp);
  out << kReportColumns << '\n';
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{:d},{:d},{:d},{:d},{:d},{},{},{},{},{},{}\n",
               r.index, csv_text(r.metric), r.dimension, csv_number(r.boundary_radius),
               csv_number(r.mass_parameter), csv_number(r.c), r.theorem, csv_number(r.mass),
               csv_number(r.mass_error), csv_number(r.capacity), csv_number(r.condition_margin),
               csv_number(r.conclusion_margin), r.hypothesis_holds, r.conclusion_holds,
               r.equality_hypothesis, r.equality_conclusion, r.soundness_violation,
               csv_number(r.rigidity_residual), csv_number(r.implication_margin),
               csv_number(r.conformal_residual), csv_number(r.harmonic_residual), r.status,
               csv_text(r.message));
  }
}

void emit_sweep_plots(const std::vector<ReportRow>& rows, std::string_view axis,
                      const std::filesystem::path& path, std::string_view timestamp) {
  const auto parameter = [&](const ReportRow& r) -> double {
    if (axis == "c") return r.c;
    if (axis == "m") return r.mass_parameter;
    if (axis == "r0") return r.boundary_radius;
    if (axis == "n") return r.dimension;
    if (axis == "index") return double(r.index);
    throw ConfigError(fmt::format("emit_sweep_plots: unknown axis '{}'", axis));
  };
  // everything but the axis identifies a curve; a Schwarzschild equality
  // constant follows (n, m, r0), so it is labelled rather than printed
  const auto group = [&](const ReportRow& r) {
    const std::string family = r.metric.substr(0, r.metric.find('('));
    if (axis == "c") return r.metric;
    if (axis == "index") return family;
    const bool equality_c = family == "schwarzschild" && std::isfinite(r.mass_parameter) &&
                            2.0 * std::pow(r.boundary_radius, r.dimension - 2) + r.mass_parameter > 0.0 &&
                            r.c == schwarzschild_equality_constant(r.dimension, r.mass_parameter,
                                                                   r.boundary_radius);
    return fmt::format("{}(n={},m={},r0={},c={})", family, axis == "n" ? "*" : number(r.dimension),
                       axis == "m" ? "*" : csv_number(r.mass_parameter),
                       axis == "r0" ? "*" : number(r.boundary_radius),
                       equality_c ? std::string("equality") : csv_number(r.c));
  };

  std::map<std::string, std::set<double>> seen;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      throw ConfigError(fmt::format("emit_sweep_plots: row {} failed: {}", r.index, r.message));
    }
    if (r.theorem != rows.front().theorem) {
      throw ConfigError("emit_sweep_plots: rows mix theorems");
    }
    const double p = parameter(r);
    if (!std::isfinite(p)) {
      throw ConfigError(fmt::format("emit_sweep_plots: row {} has no value for axis {}", r.index, axis));
    }
    if (!seen[group(r)].insert(p).second) {
      throw ConfigError(fmt::format("emit_sweep_plots: axis {} value {} repeats in group {}", axis,
                                    number(p), group(r)));
    }
  }

  auto out = open_output(path);
  write_header(out, timestamp);
  out << "group," << axis << ",condition_margin,conclusion_margin,mass,capacity\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{}\n", csv_text(group(r)), csv_number(parameter(r)),
               csv_number(r.condition_margin), csv_number(r.conclusion_margin), csv_number(r.mass),
               csv_number(r.capacity));
  }
}

// ---- oracle suite -------------------------------------------------------------

std::vector<OracleCheck> validate_oracles(const SolverOptions& solver) {
  std::vector<OracleCheck> out;
  for (int n : {3, 4, 5}) {
    const double h = n - 2.0;

    double schw = 0.0;
    double harmonic = 0.0;
    double mass = 0.0;
    double identity = 0.0;
    double flat = 0.0;
    for (double m : {-0.5, 0.0, 1.0, 2.0}) {
      for (double r0 : {1.0, 2.0}) {
        const auto g = schwarzschild(n, m, r0);
        const auto exact = [&](double r) { return schwarzschild_u(n, m, r0, r); };
        const double du = profile_deviation(solve_conformal_green(g, solver).function, exact, r0);
        // R = 0, so v solves the same equation; its quadrature integrates
        // r^{1-n} U^{-2}, whose antiderivative gives the same closed form
        const double dv = profile_deviation(solve_harmonic_green(g, solver).function, exact, r0);
        const double dm = std::abs(adm_mass(g) - m) / std::max(1.0, std::abs(m));
        schw = std::max(schw, du);
        harmonic = std::max(harmonic, dv);
        mass = std::max(mass, dm);
        if (m == 0.0) flat = std::max({flat, du, dv, std::abs(adm_mass(g))});
      }
      if (m > 0.0) {
        identity = std::max(identity,
                            conformal_minimal_boundary_check(schwarzschild(n, m, 1.0)).identity_residual);
      }
    }
    const auto fm = conformal_minimal_boundary_check(flat_metric(n, 1.0));
    flat = std::max(flat, fm.identity_residual);

    // conformally flat identity: U u is flat-harmonic, so u = U(r0) (r0/r)^h / U
    double cf = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const auto g = random_nonneg_scalar_metric(seed, default_generator(n));
      const double r0 = g.boundary_radius();
      const auto& U = g.conformal_factor();
      const double u0 = U(r0).value;
      const auto exact = [&](double r) { return u0 * std::pow(r0 / r, h) / U(r).value; };
      cf = std::max(cf, profile_deviation(solve_conformal_green(g, solver).function, exact, r0));
    }
    // power sum: mass is twice the r^{-h} coefficient
    const auto ps = power_sum_metric(n, 1.0, {{0.7, h}, {-0.05, h + 1.5}});
    mass = std::max(mass, std::abs(adm_mass(ps) - 1.4) / 1.4);

    out.push_back({"conformal-green-schwarzschild", n, schw, 1e-8});
    out.push_back({"conformal-green-conformally-flat", n, cf, 1e-8});
    out.push_back({"harmonic-green-antiderivative", n, harmonic, 1e-8});
    out.push_back({"minimal-boundary-identity", n, identity, 1e-8});
    out.push_back({"adm-mass", n, mass, 1e-8});
    out.push_back({"flat-exterior", n, flat, 1e-13});
  }
  return out;
}

// ---- driver -------------------------------------------------------------------

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

namespace {

void write_timings(const std::filesystem::path& path, const std::vector<ReportRow>& rows,
                   double total, int jobs, std::string_view timestamp) {
  auto out = open_output(path);
  write_header(out, timestamp);
  fmt::print(out, "# total_seconds {:.6f} jobs {}\n", total, jobs);
  out << "index,metric,wall_seconds\n";
  for (const auto& r : rows) fmt::print(out, "{},{},{:.6f}\n", r.index, csv_text(r.metric), r.wall_seconds);
}

void write_summary(std::ostream& out, const ExperimentConfig& config,
                   const std::vector<ReportRow>& rows) {
  std::size_t failed = 0, rejected = 0, holds = 0, equality = 0, violations = 0, unhealthy = 0;
  double worst_residual = 0.0;
  for (const auto& r : rows) {
    failed += r.status == "error";
    rejected += r.status == "rejected";
    holds += r.status == "ok" && r.hypothesis_holds;
    equality += r.status == "ok" && r.equality_hypothesis && r.equality_conclusion;
    violations += r.soundness_violation;
    unhealthy += !healthy(r, config.options.solver);
    if (r.status == "ok") {
      worst_residual = std::max({worst_residual, r.conformal_residual, r.harmonic_residual});
    }
  }
  fmt::print(out, "experiment   {}\n", to_string(config.kind));
  fmt::print(out, "theorem      {}\n", to_string(config.theorem));
  fmt::print(out, "family       {}\n", config.metric.family);
  fmt::print(out, "rows         {}\n", rows.size());
  fmt::print(out, "failed rows  {}\n", failed);
  fmt::print(out, "rejected     {}\n", rejected);
  fmt::print(out, "hypothesis holds        {}\n", holds);
  fmt::print(out, "equality (both margins) {}\n", equality);
  fmt::print(out, "soundness violations    {}\n", violations);
  fmt::print(out, "worst solver residual   {:.3g} (tolerance {:.3g})\n", worst_residual,
             config.options.solver.residual_tolerance);
  fmt::print(out, "solver health           {}\n", unhealthy == 0 ? "ok" : "FAILED");
  for (const auto& r : rows) {
    if (r.status != "ok") {
      fmt::print(out, "  row {} {} ({}): {}\n", r.index, r.metric, r.status, r.message);
    }
  }
}

// radius, u, v samples for each metric of a check
void write_profiles(const std::filesystem::path& path, const ExperimentConfig& config,
                    std::string_view timestamp) {
  auto out = open_output(path);
  write_header(out, timestamp);
  out << "metric,r,u,v\n";
  for (const auto& item : expand_metrics(config)) {
    try {
      const auto g = build_metric(config.metric, item);
      const auto u = solve_conformal_green(g, config.options.solver);
      const auto v = solve_harmonic_green(g, config.options.solver);
      for (double r : sample_radii(g.boundary_radius(), 64, 1e4)) {
        fmt::print(out, "{},{},{},{}\n", csv_text(item.id), number(r), number(u.function(r).value),
                   number(v.function(r).value));
      }
    } catch (const std::exception&) {
      // the report row already carries the error
    }
  }
}

struct FillInRow {
  MetricCase item;
  std::string status = "ok";
  std::string message;
  double green_residual = kNaN;
  double h_exterior = kNaN, h_interior = kNaN, corner_margin = kNaN;
  bool corner_holds = false;
  double interior_residual = kNaN;
  KelvinReport kelvin{};
  double seconds = 0.0;
};

FillInRow fill_in_row(const ExperimentConfig& config, const MetricCase& item) {
  const auto start = Clock::now();
  FillInRow row;
  row.item = item;
  try {
    const auto g = build_metric(config.metric, item);
    const auto u = solve_conformal_green(g, config.options.solver);
    row.green_residual = u.residual_norm;
    FillInOptions fo;
    fo.residual_tolerance = config.options.solver.residual_tolerance;
    const FillIn f = build_fill_in(g, u, fo);
    const CornerVerdict corner = corner_condition(f, config.options.tolerances.hypothesis);
    row.h_exterior = f.corner.exterior;
    row.h_interior = f.corner.interior;
    row.corner_margin = corner.margin;
    row.corner_holds = corner.holds;
    row.interior_residual = f.interior_scalar_residual;
    row.kelvin = f.compactified_point_report;
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return row;
}

int run_fill_in(const ExperimentConfig& config, std::ostream& log, const std::string& timestamp,
                RunResult& result) {
  const auto cases = expand_metrics(config);
  const auto start = Clock::now();
  auto mapped = parallel::map_rows(
      cases.size(), [&](std::size_t i) { return fill_in_row(config, cases[i]); }, config.jobs);
  const double total = std::chrono::duration<double>(Clock::now() - start).count();

  const auto table = output_file(config, "fill_in.csv");
  auto out = open_output(table);
  write_header(out, timestamp);
  out << "index,metric,n,r0,green_residual,h_exterior,h_interior,corner_margin,corner_holds,"
         "interior_residual,deviation_exponent,claimed_deviation_exponent,derivative_exponent,"
         "claimed_derivative_exponent,derivative_exact,weighted_limit,continuity_gap,"
         "sobolev_exponent_estimate,status,message\n";
  std::size_t unhealthy = 0;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    FillInRow row;
    if (mapped[i].ok()) {
      row = *mapped[i].value;
    } else {
      row.item = cases[i];
      row.status = "error";
      row.message = mapped[i].error;
    }
    const auto& k = row.kelvin;
    const bool ok = row.status == "ok" && row.green_residual <= config.options.solver.residual_tolerance;
    unhealthy += !ok;
    const bool has = row.status == "ok";
    fmt::print(out, "{},{},{},{},{},{},{},{},{:d},{},{},{},{},{},{:d},{},{},{},{},{}\n", i,
               csv_text(row.item.id), row.item.dimension, number(row.item.boundary_radius),
               csv_number(row.green_residual), csv_number(row.h_exterior),
               csv_number(row.h_interior), csv_number(row.corner_margin), row.corner_holds,
               csv_number(row.interior_residual), csv_number(has ? k.deviation_exponent : kNaN),
               csv_number(has ? k.claimed_deviation_exponent : kNaN),
               csv_number(has ? k.derivative_exponent : kNaN),
               csv_number(has ? k.claimed_derivative_exponent : kNaN), has && k.derivative_exact,
               csv_number(has ? k.weighted_limit : kNaN), csv_number(has ? k.continuity_gap : kNaN),
               csv_number(has ? k.sobolev_exponent_estimate : kNaN), row.status,
               csv_text(row.message));
  }
  result.files.push_back(table);
  result.rows = mapped.size();
  result.failed_rows = unhealthy;

  const auto timings = output_file(config, "timings.csv");
  auto tout = open_output(timings);
  write_header(tout, timestamp);
  fmt::print(tout, "# total_seconds {:.6f} jobs {}\n", total, config.jobs);
  tout << "index,metric,wall_seconds\n";
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    fmt::print(tout, "{},{},{:.6f}\n", i, csv_text(cases[i].id),
               mapped[i].ok() ? mapped[i].value->seconds : 0.0);
  }
  result.files.push_back(timings);
  fmt::print(log, "fill-in: {} metrics, {} unhealthy, {:.2f} s\n", mapped.size(), unhealthy, total);
  return unhealthy == 0 ? 0 : 3;
}

int run_oracles(const ExperimentConfig& config, std::ostream& log, const std::string& timestamp,
                RunResult& result) {
  const auto checks = validate_oracles(config.options.solver);
  const auto table = output_file(config, "oracles.csv");
  auto out = open_output(table);
  write_header(out, timestamp);
  out << "check,n,max_deviation,tolerance,passed\n";
  std::size_t failed = 0;
  for (const auto& c : checks) {
    fmt::print(out, "{},{},{},{},{:d}\n", c.name, c.dimension, number(c.max_deviation),
               number(c.tolerance), c.passed());
    fmt::print(log, "{:<34} n={} max deviation {:9.3e} (tolerance {:.0e}) {}\n", c.name,
               c.dimension, c.max_deviation, c.tolerance, c.passed() ? "ok" : "FAILED");
    failed += !c.passed();
  }
  result.files.push_back(table);
  result.rows = checks.size();
  result.failed_rows = failed;
  return failed == 0 ? 0 : 3;
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::ostream& log) {
  std::filesystem::create_directories(config.output_dir);
  const std::string timestamp = utc_timestamp();
  RunResult result{0, {}, 0, 0};

  if (config.kind == ExperimentKind::OracleValidation) {
    result.exit_code = run_oracles(config, log, timestamp, result);
    return result;
  }
  if (config.kind == ExperimentKind::FillIn) {
    result.exit_code = run_fill_in(config, log, timestamp, result);
    return result;
  }

  const auto start = Clock::now();
  const auto rows = run_rows(config, config.jobs);
  const double total = std::chrono::duration<double>(Clock::now() - start).count();

  const auto report = output_file(config, "report.csv");
  {
    auto out = open_output(report);
    write_report(out, rows, timestamp);
  }
  result.files.push_back(report);

  const auto summary = output_file(config, "summary.txt");
  {
    auto out = open_output(summary);
    write_header(out, timestamp);
    write_summary(out, config, rows);
  }
  result.files.push_back(summary);
  write_summary(log, config, rows);

  const auto timings = output_file(config, "timings.csv");
  write_timings(timings, rows, total, config.jobs, timestamp);
  result.files.push_back(timings);

  const auto margins = output_file(config, "margins.csv");
  std::vector<ReportRow> solved;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(solved),
               [](const ReportRow& r) { return r.status == "ok"; });
  try {
    emit_sweep_plots(solved, config.plot_axis, margins, timestamp);
    result.files.push_back(margins);
  } catch (const ConfigError& e) {
    fmt::print(log, "plot data skipped: {}\n", e.what());
  }

  if (config.kind == ExperimentKind::Check) {
    const auto profiles = output_file(config, "profiles.csv");
    write_profiles(profiles, config, timestamp);
    result.files.push_back(profiles);
  }

  result.rows = rows.size();
  for (const auto& r : rows) result.failed_rows += !healthy(r, config.options.solver);
  result.exit_code = result.failed_rows == 0 ? 0 : 3;
  return result;
}

}  // namespace massbound
