// Batch runner for the mass inequality checks.
//
//   massbound check            --config configs/flat_check.ini
//   massbound sweep            --config configs/schwarzschild_sharpness.ini --jobs 4
//   massbound validate-oracles --out results/
//   massbound fill-in          --config configs/fill_in.ini
//
// Output goes to --out, else the config's [output] dir, else $MASSBOUND_OUT,
// else ./massbound-out. Exit status: 0 healthy, 3 some solve missed its
// residual tolerance or failed, 2 bad configuration, 1 anything else.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "massbound/errors.hpp"
#include "massbound/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tol_overrides;
  std::optional<int> jobs;
};

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("MASSBOUND_OUT"); env && *env) return env;
  return "massbound-out";
}

massbound::ExperimentConfig resolve(const Flags& flags, massbound::ExperimentKind kind) {
  massbound::ExperimentConfig config;
  if (!flags.config.empty()) {
    config = massbound::load_config(flags.config);
  } else if (kind != massbound::ExperimentKind::OracleValidation) {
    throw massbound::ConfigError(
        fmt::format("{} needs --config <path>", massbound::to_string(kind)));
  }
  config.kind = kind;
  if (!flags.out.empty()) {
    config.output_dir = flags.out;
  } else if (config.output_dir.empty()) {
    config.output_dir = default_output_dir();
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.jobs) config.jobs = *flags.jobs;
  for (const auto& t : flags.tol_overrides) massbound::apply_tolerance_override(config, t);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of boundary mass inequalities on rotationally symmetric metrics"};
  app.require_subcommand(1);
  Flags flags;

  const auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment configuration (INI)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "seed for generated metrics");
    sub->add_option("--tol-override", flags.tol_overrides,
                    "name=value; hypothesis, conclusion, equality, large_boundary_value, residual, "
                    "quadrature, adaptive")
        ->take_all();
    sub->add_option("--jobs", flags.jobs, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
  };

  std::optional<massbound::ExperimentKind> kind;
  const auto verb = [&](const char* name, const char* help, massbound::ExperimentKind k) {
    auto* sub = app.add_subcommand(name, help);
    add_flags(sub);
    sub->callback([&kind, k] { kind = k; });
  };
  verb("check", "check every metric of the config and write u, v profiles",
       massbound::ExperimentKind::Check);
  verb("sweep", "run the config's parameter grid", massbound::ExperimentKind::Sweep);
  verb("validate-oracles", "compare the solvers against closed-form solutions",
       massbound::ExperimentKind::OracleValidation);
  verb("fill-in", "compactification and fill-in diagnostics", massbound::ExperimentKind::FillIn);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(flags, *kind);
    const auto result = massbound::run(config, std::cout);
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return result.exit_code;
  } catch (const massbound::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
