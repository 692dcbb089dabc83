#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qcat/config.hpp"

namespace qcat::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
};

struct SweepOptions {
  double g_min = 0.0;
  double g_max = 8.0;
  std::size_t steps = 161;
};

struct SweepRow {
  double g_a = 0.0;
  double g_b = 0.0;
  double c_analytic = 0.0;
  double c_grid = 0.0;
  double p_success = 0.0;
  double negativity = 0.0;
};

/// Diagonal sweep g_a = g_b = g over [g_min, g_max].
std::vector<SweepRow> sweep_rows(const ExperimentConfig& config, const SweepOptions& options, std::size_t threads);
/// Index of the row with the largest |c_analytic| (first on ties).
std::size_t sweep_maximum(const std::vector<SweepRow>& rows);

struct MonteCarloOptions {
  std::optional<std::filesystem::path> trials_csv;
  std::vector<double> noise_scan;
};

void cmd_analytic(const ExperimentConfig& config, std::ostream& out);
void cmd_sweep(const ExperimentConfig& config, const SweepOptions& options, std::ostream& out, std::size_t threads);
void cmd_montecarlo(const ExperimentConfig& config, const MonteCarloOptions& options, std::ostream& out,
                    std::size_t threads);
/// Prints the optimal couplings for the configured states and the optimal
/// states at the configured couplings. When `best_config` is set, writes a
/// config holding the optimal states there.
void cmd_optimize(const ExperimentConfig& config, std::ostream& out, std::size_t threads,
                  const std::optional<std::filesystem::path>& best_config);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qcat::cli
