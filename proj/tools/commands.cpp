#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qcat/dynamics.hpp"
#include "qcat/entanglement.hpp"
#include "qcat/errors.hpp"
#include "qcat/indicator.hpp"
#include "qcat/parallel.hpp"
#include "qcat/sampler.hpp"
#include "qcat/text.hpp"

namespace qcat::cli {
namespace {

using text::format_complex;
using text::format_double;

// Prints 0 instead of -0.
std::string num(double v) { return format_double(v == 0.0 ? 0.0 : v); }

void kv(std::ostream& out, const char* key, const std::string& value) { out << key << '=' << value << '\n'; }
void kv(std::ostream& out, const char* key, double value) { kv(out, key, num(value)); }

StatePair pure_states(const ExperimentConfig& config) { return {config.prep_ket(), config.post_ket()}; }

double sweep_negativity(const TransitionAmplitudes& amps, double g) {
  try {
    return negativity(embed(amps, g, g)).negativity;
  } catch (const OrthogonalPostselection&) {
    return std::nan("");
  }
}

}  // namespace

std::vector<SweepRow> sweep_rows(const ExperimentConfig& config, const SweepOptions& options, std::size_t threads) {
  if (options.steps < 2) throw ConfigError("steps", "a sweep needs at least 2 steps");
  if (!(options.g_min >= 0.0) || !(options.g_max > options.g_min)) {
    throw ConfigError("g-range", "need 0 <= g_min < g_max");
  }
  const StatePair states = pure_states(config);
  const TransitionAmplitudes amps = transition_amplitudes(states.prep, states.post);
  const GridMeter base = GridMeter::gaussian(config.grid);
  (void)base.shifted(options.g_max);  // GridTooSmall before any work

  std::vector<SweepRow> rows(options.steps);
  parallel_for(options.steps, threads, [&](std::size_t k) {
    const double g = options.g_min + (options.g_max - options.g_min) * static_cast<double>(k) /
                                         static_cast<double>(options.steps - 1);
    const GridMeter meter = base.with_coupling(g);
    SweepRow& row = rows[k];
    row.g_a = g;
    row.g_b = g;
    row.c_analytic = cheshire_analytic(states, g, g).c_value;
    row.c_grid = 2.0 * moment_decomposition(amps, meter, meter, Weight::Position, Weight::Position).total();
    row.p_success = success_probability(amps, {g, g});
    row.negativity = sweep_negativity(amps, g);
  });
  return rows;
}

std::size_t sweep_maximum(const std::vector<SweepRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i].c_analytic) > std::abs(rows[best].c_analytic)) best = i;
  }
  return best;
}

void cmd_analytic(const ExperimentConfig& config, std::ostream& out) {
  const double g_a = config.g_a;
  const double g_b = config.g_b;
  const CheshireResult r = cheshire_analytic(config.post_effect(), config.prep_density(), g_a, g_b);
  kv(out, "g_a", g_a);
  kv(out, "g_b", g_b);
  kv(out, "c_analytic", r.c_value);
  kv(out, "c_bound", cheshire_bound(g_a, g_b));
  kv(out, "p_success", r.p_success);
  kv(out, "trace_term", format_complex(r.trace_term));
  if (!config.has_pure_post()) return;

  const StatePair states = pure_states(config);
  const TransitionAmplitudes amps = transition_amplitudes(states.prep, states.post);
  kv(out, "l", format_complex(amps.l));
  kv(out, "r_plus", format_complex(amps.r_plus));
  kv(out, "r_minus", format_complex(amps.r_minus));
  kv(out, "cross_moment", cross_moment(amps, g_a, g_b));
  try {
    const WeakValues wv = weak_values(amps);
    kv(out, "weak_value_L", format_complex(wv.L_w));
    kv(out, "weak_value_sigma", format_complex(wv.Sigma_w));
  } catch (const OrthogonalPostselection&) {
    kv(out, "weak_value_L", "undefined");
    kv(out, "weak_value_sigma", "undefined");
  }
  try {
    const LocalAverages avg = local_averages(amps, g_a, g_b);
    kv(out, "mean_x", avg.mean_x);
    kv(out, "mean_y", avg.mean_y);
    const NegativityReport neg = negativity(embed(amps, g_a, g_b));
    kv(out, "negativity", neg.negativity);
    kv(out, "min_pt_eigenvalue", neg.min_pt_eigenvalue);
  } catch (const OrthogonalPostselection&) {
    kv(out, "mean_x", "undefined");
    kv(out, "mean_y", "undefined");
    kv(out, "negativity", "undefined");
  }
}

void cmd_sweep(const ExperimentConfig& config, const SweepOptions& options, std::ostream& out, std::size_t threads) {
  const auto rows = sweep_rows(config, options, threads);
  out << "g_a,g_b,c_analytic,c_grid,p_success,negativity\n";
  for (const auto& r : rows) {
    out << num(r.g_a) << ',' << num(r.g_b) << ',' << num(r.c_analytic) << ',' << num(r.c_grid) << ','
        << num(r.p_success) << ',' << num(r.negativity) << '\n';
  }
  const auto& best = rows[sweep_maximum(rows)];
  out << "# maximum |c_analytic|: g_a=" << num(best.g_a) << ",g_b=" << num(best.g_b)
      << ",c_analytic=" << num(best.c_analytic) << '\n';
}

void cmd_montecarlo(const ExperimentConfig& config, const MonteCarloOptions& options, std::ostream& out,
                    std::size_t threads) {
  if (config.n_trials < 100) throw ConfigError("n_trials", "Monte Carlo needs at least 100 trials");
  const StatePair states = pure_states(config);
  const TransitionAmplitudes amps = transition_amplitudes(states.prep, states.post);
  const BranchWeights weights = BranchWeights::from_preparation(states.prep);
  const Couplings g{config.g_a, config.g_b};

  if (!options.noise_scan.empty()) {
    std::vector<NoiseModel> levels;
    for (const double nu : options.noise_scan) levels.push_back({nu, nu});
    const auto rows = noise_robustness(amps, weights, g, levels, config.n_trials, config.seed, threads);
    out << "nu_a,nu_b,c_hat,std_error,n_required\n";
    for (const auto& r : rows) {
      out << num(r.nu_a) << ',' << num(r.nu_b) << ',' << num(r.c_hat) << ',' << num(r.std_error) << ','
          << r.n_required << '\n';
    }
    return;
  }

  const TrialSampler sampler(amps, weights, g, {config.noise_a, config.noise_b}, config.seed);
  EstimatorOutput est;
  if (options.trials_csv) {
    std::ofstream csv(*options.trials_csv);
    if (!csv) throw ConfigError("trials-csv", "cannot open " + options.trials_csv->string());
    write_trials_csv_header(csv);
    est = run_cheshire(sampler, config.n_trials, threads,
                       [&](std::span<const TrialRecord> block) { write_trials_csv(csv, block); });
  } else {
    est = run_cheshire(sampler, config.n_trials, threads);
  }
  const double c_exact = 2.0 * cross_moment(amps, g.g_a, g.g_b);
  kv(out, "n_trials", std::to_string(est.n_trials));
  kv(out, "seed", std::to_string(config.seed));
  kv(out, "c_hat", est.c_hat);
  kv(out, "std_error", est.std_error);
  kv(out, "p_hat", est.p_hat);
  kv(out, "c_analytic", c_exact);
  kv(out, "p_analytic", sampler.success_probability());
  kv(out, "z_score", est.std_error > 0.0 ? (est.c_hat - c_exact) / est.std_error : 0.0);
}

void cmd_optimize(const ExperimentConfig& config, std::ostream& out, std::size_t threads,
                  const std::optional<std::filesystem::path>& best_config) {
  try {
    const CouplingOptimum opt = optimize_couplings(config.post_effect(), config.prep_density());
    kv(out, "g_a_opt", opt.g_a);
    kv(out, "g_b_opt", opt.g_b);
    kv(out, "c_opt", opt.c_value);
  } catch (const FlatObjective&) {
    kv(out, "g_a_opt", "undefined");
    kv(out, "g_b_opt", "undefined");
    kv(out, "c_opt", 0.0);
  }

  if (!(config.g_a > 0.0) || !(config.g_b > 0.0)) throw ConfigError("g_a", "state optimization needs g_a, g_b > 0");
  StateSearchOptions search;
  search.seed = config.seed;
  search.threads = threads;
  const StateOptimum best = optimize_states(config.g_a, config.g_b, search);
  kv(out, "state_objective", best.objective);
  kv(out, "c_states", best.c_value);
  std::string prep, post;
  for (std::size_t i = 0; i < 4; ++i) {
    prep += (i ? ", " : "") + format_complex(best.states.prep[i]);
    post += (i ? ", " : "") + format_complex(best.states.post[i]);
  }
  kv(out, "prep", prep);
  kv(out, "post", post);

  if (best_config) {
    ExperimentConfig written = config;
    written.prep = best.states.prep.amplitudes();
    written.post = best.states.post.amplitudes();
    written.effect.reset();
    std::ofstream file(*best_config);
    if (!file) throw ConfigError("out", "cannot open " + best_config->string());
    file << dump_config(written);
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Postselected two-meter simulator: exact, grid and Monte Carlo values of the signed cross-moment C"};
  app.require_subcommand(1);

  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::size_t> grid_points;
  std::optional<std::filesystem::path> out_path;
  bool dump = false;
  app.add_option("--config", config_path, "Experiment config (key=value)")->required();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--trials", trials, "Override n_trials");
  app.add_option("--grid-points", grid_points, "Override grid_points");
  app.add_option("--out", out_path, "Write output here instead of stdout");
  app.add_flag("--dump-config", dump, "Print the effective config and exit");

  auto* analytic = app.add_subcommand("analytic", "Exact Gaussian-meter values");
  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Diagonal coupling sweep as CSV");
  sweep->add_option("--g-min", sweep_opts.g_min, "First coupling")->capture_default_str();
  sweep->add_option("--g-max", sweep_opts.g_max, "Last coupling")->capture_default_str();
  sweep->add_option("--steps", sweep_opts.steps, "Number of sweep points")->capture_default_str();
  MonteCarloOptions mc_opts;
  std::optional<std::filesystem::path> trials_csv;
  auto* montecarlo = app.add_subcommand("montecarlo", "Simulated trials and the signed cross-moment estimator");
  montecarlo->add_option("--trials-csv", trials_csv, "Write every trial as tau,x,y");
  montecarlo->add_option("--noise-scan", mc_opts.noise_scan, "Readout noise levels nu (nu_a = nu_b)")
      ->delimiter(',');
  auto* optimize = app.add_subcommand("optimize", "Optimal couplings and optimal states");
  std::optional<std::filesystem::path> best_config;
  optimize->add_option("--write-config", best_config, "Save a config holding the optimal states");
  for (auto* sub : {analytic, sweep, montecarlo, optimize}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (trials) config.n_trials = *trials;
    if (grid_points) config.grid.points = *grid_points;
    config.validate();

    std::ofstream file;
    if (out_path) {
      file.open(*out_path);
      if (!file) throw ConfigError("out", "cannot open " + out_path->string());
    }
    std::ostream& sink = out_path ? static_cast<std::ostream&>(file) : out;
    const std::size_t threads = default_thread_count();

    if (dump) {
      sink << dump_config(config);
      return kExitOk;
    }
    if (*analytic) {
      cmd_analytic(config, sink);
    } else if (*sweep) {
      cmd_sweep(config, sweep_opts, sink, threads);
    } else if (*montecarlo) {
      mc_opts.trials_csv = trials_csv;
      cmd_montecarlo(config, mc_opts, sink, threads);
    } else if (*optimize) {
      cmd_optimize(config, sink, threads, best_config);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GridTooSmall& e) {
    err << "config error: grid: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace qcat::cli
