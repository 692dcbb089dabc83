#pragma once

// Monte Carlo trials of the full experiment: each trial yields the
// postselection outcome tau (+1 success, -1 failure) and the two pointer
// readouts. The estimator C_hat = mean(tau x y) uses every trial.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qcat/dynamics.hpp"
#include "qcat/meter.hpp"
#include "qcat/qsystem.hpp"
#include "qcat/rng.hpp"

namespace qcat {

struct TrialRecord {
  int tau = 1;
  double x = 0.0;
  double y = 0.0;
};

/// Independent zero-mean Gaussian readout noise (standard deviations),
/// applied to both postselection branches.
struct NoiseModel {
  double nu_a = 0.0;
  double nu_b = 0.0;

  void validate() const;
};

struct EstimatorOutput {
  double c_hat = 0.0;
  double std_error = 0.0;  // sample std of tau x y (n - 1 denominator) / sqrt(n)
  double p_hat = 0.0;      // fraction of tau = +1
  std::uint64_t n_trials = 0;
};

enum class SamplingMethod {
  /// Read both meters from the branch mixture rho_cl, then accept the
  /// postselection with probability |F(x, y)|^2 / rho_cl(x, y). Exact.
  ConditionalPostselection,
  /// Tabulated marginal/conditional inverse CDFs of |F|^2 and p_f on a
  /// lattice, with a uniform draw inside the selected cell.
  GridInverseCdf,
};

struct SamplerOptions {
  SamplingMethod method = SamplingMethod::ConditionalPostselection;
  /// Lattice used by GridInverseCdf for both pointers.
  UniformGrid cdf_grid{-20.0, 20.0, 801};
};

/// Trial i is generated from CounterRng(seed, i) alone, so any subset of
/// trials can be produced in any order or on any thread.
class TrialSampler {
 public:
  TrialSampler(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g,
               const NoiseModel& noise, std::uint64_t seed, const SamplerOptions& options = {});

  /// Throws PositivityViolation if the weights cannot produce the amplitudes.
  TrialRecord trial(std::uint64_t index) const;
  std::vector<TrialRecord> sample(std::uint64_t begin, std::uint64_t count, std::size_t threads = 1) const;

  /// Success probability the sampler draws against (closed form, or the
  /// lattice mass for GridInverseCdf).
  double success_probability() const { return p_success_; }
  const JointMeterState& state() const { return state_; }

 private:
  struct CdfTable {
    std::vector<double> row_cdf;   // cumulative mass of x rows
    std::vector<double> cell_cdf;  // per row, cumulative mass along y
  };
  CdfTable build_table(bool success) const;
  void sample_from_table(const CdfTable& table, CounterRng& rng, double& x, double& y) const;

  JointMeterState state_;
  NoiseModel noise_;
  std::uint64_t seed_;
  SamplerOptions options_;
  std::array<double, 3> branch_cdf_{};
  std::array<BranchTerm, 3> branches_{};
  double p_success_ = 0.0;
  CdfTable success_table_;
  CdfTable failure_table_;
};

/// Streaming estimator with compensated sums. Merging accumulators in a
/// fixed order gives results independent of how the trials were split.
class CheshireAccumulator {
 public:
  void add(const TrialRecord& r);
  void merge(const CheshireAccumulator& other);
  std::uint64_t count() const { return n_; }
  /// Throws ValidationError for fewer than two trials.
  EstimatorOutput result() const;

 private:
  struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v);
    double value() const { return sum + comp; }
  };
  Neumaier sum_;
  Neumaier sum_sq_;
  std::uint64_t n_ = 0;
  std::uint64_t successes_ = 0;
};

/// Throws ValidationError for fewer than two records.
EstimatorOutput estimate_cheshire(std::span<const TrialRecord> trials);

/// Generates n trials in fixed-size blocks, optionally handing each block to
/// `on_block` in trial order, and returns the estimator.
EstimatorOutput run_cheshire(const TrialSampler& sampler, std::uint64_t n, std::size_t threads = 1,
                             const std::function<void(std::span<const TrialRecord>)>& on_block = {});

/// CSV with header "tau,x,y" and 17 significant digits.
void write_trials_csv_header(std::ostream& out);
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);

struct NoiseRow {
  double nu_a = 0.0;
  double nu_b = 0.0;
  double c_hat = 0.0;
  double std_error = 0.0;
  /// Trials for a 5 sigma detection of the analytic C: ceil(25 var / C^2).
  /// UINT64_MAX when C = 0.
  std::uint64_t n_required = 0;
};

/// One Monte Carlo run per noise level, all sharing the same seed.
std::vector<NoiseRow> noise_robustness(const TransitionAmplitudes& amps, const BranchWeights& weights,
                                       const Couplings& g, std::span<const NoiseModel> noise_levels,
                                       std::uint64_t n_trials, std::uint64_t seed, std::size_t threads = 1);

}  // namespace qcat
