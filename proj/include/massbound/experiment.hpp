#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "massbound/metric.hpp"
#include "massbound/theorems.hpp"

namespace massbound {

enum class ExperimentKind { Check, Sweep, OracleValidation, FillIn };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);
TheoremId theorem_from_string(std::string_view name);

/// Metric family and its parameter grids. The grids are crossed; families
/// ignore the grids they do not use.
struct MetricSpec {
  /// flat | schwarzschild | power-sum | generated
  std::string family = "schwarzschild";
  std::vector<int> dimensions{3};
  std::vector<double> masses{1.0};
  std::vector<double> boundary_radii{1.0};
  /// power-sum: U = 1 + sum c_k r^{-p_k}
  std::vector<PowerTerm> terms;
  /// generated: metrics per dimension and generator ranges
  int count = 0;
  int num_terms = 2;
  /// Exponent window relative to n; the default gives [n-1.5, n+1].
  std::pair<double, double> exponent_offset{-1.5, 1.0};
  std::pair<double, double> coeff_range{0.0, 0.5};
  /// Mass term range in units of r0^{n-2}.
  std::pair<double, double> mass_range{-0.5, 2.0};
  double boundary_floor = 0.2;
  /// When set, every metric is rewritten as a warped product in the
  /// coordinate s with r = s + kappa s^{1 - sigma}, sigma = n - 1.
  std::optional<double> reparametrize_kappa;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Sweep;
  MetricSpec metric;
  TheoremId theorem = TheoremId::ConformalGreen;
  std::vector<double> c_values;
  /// Adds schwarzschild_equality_constant(n, m, r0) to the c grid of each
  /// Schwarzschild metric.
  bool c_equality = false;
  TheoremOptions options;
  std::filesystem::path output_dir;
  std::string prefix;
  /// Axis for the margin plot data: c | m | r0 | n | index.
  std::string plot_axis = "c";
  std::uint64_t seed = 1;
  int jobs = 0;
};

/// Parse the INI text of an experiment. Unknown sections or keys, empty
/// grids and non-positive tolerances are ConfigErrors naming source:line.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// "name=value" with name one of hypothesis, conclusion, equality,
/// large_boundary_value, residual, quadrature, adaptive.
void apply_tolerance_override(ExperimentConfig& config, std::string_view assignment);

/// One metric of the expanded grid, built lazily inside its row so that a
/// bad parameter combination fails only that row.
struct MetricCase {
  std::size_t index;
  std::string id;
  int dimension;
  double boundary_radius;
  double mass_parameter;  // NaN unless the family has one
  std::uint64_t seed;
};

std::vector<MetricCase> expand_metrics(const ExperimentConfig& config);
RadialMetric build_metric(const MetricSpec& spec, const MetricCase& item);

/// One line of the report table. Columns are written in declaration order
/// (wall_seconds goes to the timings file, not the table).
struct ReportRow {
  std::size_t index = 0;
  std::string metric;
  int dimension = 0;
  double boundary_radius = 0.0;
  double mass_parameter = 0.0;
  double c = 0.0;
  std::string theorem;
  double mass = 0.0;
  double mass_error = 0.0;
  double capacity = 0.0;
  double condition_margin = 0.0;
  double conclusion_margin = 0.0;
  bool hypothesis_holds = false;
  bool conclusion_holds = false;
  bool equality_hypothesis = false;
  bool equality_conclusion = false;
  bool soundness_violation = false;
  double rigidity_residual = 0.0;
  double implication_margin = 0.0;
  double conformal_residual = 0.0;
  double harmonic_residual = 0.0;
  /// ok | rejected (input outside the hypotheses, e.g. c = 1) | error
  std::string status = "ok";
  std::string message;
  double wall_seconds = 0.0;
};

/// The sweep kernel. Rows are ordered by grid index (metric, then c) in both
/// versions; jobs <= 0 uses the OpenMP default.
std::vector<ReportRow> run_rows_serial(const ExperimentConfig& config);
std::vector<ReportRow> run_rows(const ExperimentConfig& config, int jobs);

/// Rejected rows, and solved rows whose residuals are within tolerance.
bool healthy(const ReportRow& row, const SolverOptions& solver);

extern const char* const kReportColumns;

/// Table with a "# generated <UTC time>" first line and 17 significant digits.
void write_report(std::ostream& out, const std::vector<ReportRow>& rows,
                  std::string_view timestamp);

/// Plot data: group, parameter, condition_margin, conclusion_margin, mass,
/// capacity. Rows are grouped by everything except the axis; rows that
/// failed, mix theorems, or repeat an axis value within a group are rejected
/// with ConfigError.
void emit_sweep_plots(const std::vector<ReportRow>& rows, std::string_view axis,
                      const std::filesystem::path& path, std::string_view timestamp);

struct OracleCheck {
  std::string name;
  int dimension;
  double max_deviation;
  double tolerance;
  bool passed() const { return max_deviation <= tolerance; }
};

/// Closed-form oracle suite: Schwarzschild conformal Green's function,
/// conformally flat u = U(r0) (r0/r)^{n-2} / U, harmonic Green's function
/// against its antiderivative, the minimal-boundary identity, ADM mass.
std::vector<OracleCheck> validate_oracles(const SolverOptions& solver = {});

struct RunResult {
  int exit_code;
  std::vector<std::filesystem::path> files;
  std::size_t rows;
  std::size_t failed_rows;
};

/// Runs the experiment and writes its files into config.output_dir. The
/// exit code reflects solver health only: 0 when every row is healthy, 3
/// otherwise. A failed hypothesis or a rejected input is a valid result.
RunResult run(const ExperimentConfig& config, std::ostream& log);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace massbound
