// Command-line front end: sweep, trial, probe, bound.
//
// Exit codes: 0 success, 1 configuration / usage error, 2 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "onebit/config.hpp"
#include "onebit/csv.hpp"
#include "onebit/error.hpp"
#include "onebit/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
  std::string config_path;
  std::string out_path = "-";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned threads = 1;
  bool timing = false;
};

onebit::ExperimentConfig resolve_config(const CommonOptions& opt) {
  onebit::ExperimentConfig cfg =
      opt.config_path.empty() ? onebit::ExperimentConfig{} : onebit::load_config(opt.config_path);
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.trials) cfg.trials = *opt.trials;
  onebit::validate(cfg);
  return cfg;
}

// Writes through a temporary buffer so a failed run leaves no partial file.
void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw onebit::IoError("cannot open output file '" + path + "'");
  body(out);
  out.flush();
  if (!out) throw onebit::IoError("failed writing '" + path + "'");
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_trials) {
  cmd->add_option("--config", opt.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_path, "output CSV path ('-' for stdout)");
  cmd->add_option("--seed", opt.seed, "override master_seed");
  if (with_trials) cmd->add_option("--trials", opt.trials, "override trials")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", opt.threads, "worker threads (affects speed only)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix recovery from dithered one-bit measurements"};
  app.require_subcommand(1);

  CommonOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "run the lambda sweep and write per-trial CSV");
  add_common(sweep, sweep_opt, true);
  sweep->add_flag("--timing", sweep_opt.timing, "fill runtime_ms (output no longer reproducible)");

  CommonOptions trial_opt;
  double trial_lambda = 8.0;
  std::uint64_t trial_index = 0;
  auto* trial = app.add_subcommand("trial", "run a single trial");
  add_common(trial, trial_opt, false);
  trial->add_option("--lambda", trial_lambda, "oversampling factor")->required();
  trial->add_option("--index", trial_index, "trial index");
  trial->add_flag("--timing", trial_opt.timing, "fill runtime_ms");

  onebit::ProbeOptions probe_opt;
  std::string probe_out = "-";
  unsigned probe_threads = 1;
  auto* probe = app.add_subcommand("probe", "hyperplane tessellation probe");
  probe->add_option("--n1", probe_opt.n1);
  probe->add_option("--n2", probe_opt.n2);
  probe->add_option("--rank", probe_opt.rank);
  probe->add_option("--n-grid", probe_opt.n_grid, "increasing measurement counts")->delimiter(',');
  probe->add_option("--trials", probe_opt.trials)->check(CLI::PositiveNumber);
  probe->add_option("--seed", probe_opt.master_seed);
  probe->add_option("--sigma", probe_opt.dither_sigma, "dither standard deviation");
  probe->add_option("--epochs", probe_opt.budget_epochs, "SVP-RKA budget in epochs");
  probe->add_option("--threads", probe_threads)->check(CLI::PositiveNumber);
  probe->add_option("--out", probe_out);

  CommonOptions bound_opt;
  double bound_lambda = 8.0;
  std::uint64_t bound_index = 0;
  auto* bound = app.add_subcommand("bound", "per-step non-expansiveness and bound overlay");
  add_common(bound, bound_opt, false);
  bound->add_option("--lambda", bound_lambda, "oversampling factor")->required();
  bound->add_option("--index", bound_index, "trial index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sweep->parsed()) {
      const auto cfg = resolve_config(sweep_opt);
      const auto results = onebit::run_sweep(cfg, sweep_opt.threads);
      for (const auto& r : results) {
        if (r.sigma_floored) {
          std::cerr << "warning: zero dynamic range at lambda=" << r.lambda << " trial="
                    << r.trial << "; dither sigma set to 1\n";
        }
      }
      emit(sweep_opt.out_path,
           [&](std::ostream& os) { onebit::write_sweep_csv(os, results, sweep_opt.timing); });
    } else if (trial->parsed()) {
      const auto cfg = resolve_config(trial_opt);
      const auto result = onebit::run_trial(cfg, trial_lambda, trial_index);
      emit(trial_opt.out_path, [&](std::ostream& os) {
        onebit::write_sweep_csv(os, {result}, trial_opt.timing, false);
      });
    } else if (probe->parsed()) {
      const auto report = onebit::tessellation_probe(probe_opt, probe_threads);
      emit(probe_out, [&](std::ostream& os) { onebit::write_probe_csv(os, report); });
      std::cerr << "median distance non-increasing: "
                << (report.median_non_increasing ? "yes" : "no") << "\n";
    } else if (bound->parsed()) {
      const auto cfg = resolve_config(bound_opt);
      const auto report = onebit::bound_diagnostic(cfg, bound_lambda, bound_index);
      emit(bound_opt.out_path, [&](std::ostream& os) { onebit::write_bound_csv(os, report); });
      std::cerr << "n=" << report.n << " kappa_v=" << report.kappa_v << " e0=" << report.e0
                << " final_distance=" << report.final_distance
                << " non_expansive_violations=" << report.violations << "\n";
    }
  } catch (const onebit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const onebit::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const onebit::NumericalError& e) {
    std::cerr << "numerical failure in " << e.module() << "::" << e.operation() << ": "
              << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
