#include "qcat/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qcat/errors.hpp"
#include "qcat/indicator.hpp"
#include "qcat/parallel.hpp"
#include "qcat/text.hpp"

namespace qcat {
namespace {

constexpr std::uint64_t kBlockSize = 1 << 15;
constexpr double kAcceptanceSlack = 1e-9;

std::size_t lower_index(const std::vector<double>& cdf, std::size_t begin, std::size_t end, double target) {
  const auto first = cdf.begin() + static_cast<std::ptrdiff_t>(begin);
  const auto last = cdf.begin() + static_cast<std::ptrdiff_t>(end);
  auto it = std::upper_bound(first, last, target);
  if (it == last) --it;
  return static_cast<std::size_t>(it - cdf.begin()) - begin;
}

}  // namespace

void NoiseModel::validate() const {
  if (!(nu_a >= 0.0) || !(nu_b >= 0.0) || !std::isfinite(nu_a) || !std::isfinite(nu_b)) {
    throw ValidationError("readout noise must be finite and >= 0");
  }
}

TrialSampler::TrialSampler(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g,
                           const NoiseModel& noise, std::uint64_t seed, const SamplerOptions& options)
    : state_(amps, weights, g), noise_(noise), seed_(seed), options_(options) {
  noise_.validate();
  const auto probs = weights.probabilities();
  branch_cdf_ = {probs[0], probs[0] + probs[1], 1.0};
  branches_ = classical_terms(weights, g);
  p_success_ = state_.success_probability();

  if (options_.method == SamplingMethod::GridInverseCdf) {
    options_.cdf_grid.validate();
    success_table_ = build_table(true);
    failure_table_ = build_table(false);
    const double ps = success_table_.row_cdf.back();
    const double pf = failure_table_.row_cdf.back();
    p_success_ = ps / (ps + pf);
  }
}

TrialSampler::CdfTable TrialSampler::build_table(bool success) const {
  const UniformGrid& grid = options_.cdf_grid;
  const std::size_t n = grid.points;
  const double h = grid.spacing();
  CdfTable t;
  t.row_cdf.resize(n);
  t.cell_cdf.resize(n * n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.point(i);
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = grid.point(j);
      double p = success ? state_.success_density(x, y) : state_.failure_density(x, y);
      if (p < -kPositivitySlack) throw PositivityViolation("failure-branch density is negative on the sampling grid");
      row += std::max(p, 0.0) * h * h;
      t.cell_cdf[i * n + j] = row;
    }
    total += row;
    t.row_cdf[i] = total;
  }
  return t;
}

void TrialSampler::sample_from_table(const CdfTable& table, CounterRng& rng, double& x, double& y) const {
  const UniformGrid& grid = options_.cdf_grid;
  const std::size_t n = grid.points;
  const double h = grid.spacing();
  const double total = table.row_cdf.back();
  const std::size_t i = lower_index(table.row_cdf, 0, n, rng.uniform() * total);
  const double row_mass = table.cell_cdf[i * n + n - 1];
  const std::size_t j = lower_index(table.cell_cdf, i * n, i * n + n, rng.uniform() * row_mass);
  x = grid.point(i) + (rng.uniform() - 0.5) * h;
  y = grid.point(j) + (rng.uniform() - 0.5) * h;
}

TrialRecord TrialSampler::trial(std::uint64_t index) const {
  CounterRng rng(seed_, index);
  TrialRecord r;
  if (options_.method == SamplingMethod::ConditionalPostselection) {
    const double u = rng.uniform();
    const std::size_t k = u < branch_cdf_[0] ? 0 : (u < branch_cdf_[1] ? 1 : 2);
    const auto [n1, n2] = rng.normal_pair();
    r.x = branches_[k].shift_a + n1;
    r.y = branches_[k].shift_b + n2;
    const double classical = state_.classical_density(r.x, r.y);
    const double success = state_.success_density(r.x, r.y);
    const double accept = classical > 0.0 ? success / classical : 0.0;
    if (accept > 1.0 + kAcceptanceSlack) {
      std::ostringstream os;
      os << "success density exceeds the branch mixture at (" << r.x << ", " << r.y
         << "); weights are inconsistent with the amplitudes";
      throw PositivityViolation(os.str());
    }
    r.tau = rng.uniform() < accept ? 1 : -1;
  } else {
    r.tau = rng.uniform() < p_success_ ? 1 : -1;
    sample_from_table(r.tau == 1 ? success_table_ : failure_table_, rng, r.x, r.y);
  }
  const auto [e1, e2] = rng.normal_pair();
  r.x += noise_.nu_a * e1;
  r.y += noise_.nu_b * e2;
  return r;
}

std::vector<TrialRecord> TrialSampler::sample(std::uint64_t begin, std::uint64_t count, std::size_t threads) const {
  std::vector<TrialRecord> out(count);
  const std::uint64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::uint64_t lo = b * kBlockSize;
    const std::uint64_t hi = std::min(count, lo + kBlockSize);
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = trial(begin + i);
  });
  return out;
}

void CheshireAccumulator::Neumaier::add(double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v)) {
    comp += (sum - t) + v;
  } else {
    comp += (v - t) + sum;
  }
  sum = t;
}

void CheshireAccumulator::add(const TrialRecord& r) {
  const double z = r.tau * r.x * r.y;
  sum_.add(z);
  sum_sq_.add(z * z);
  ++n_;
  if (r.tau == 1) ++successes_;
}

void CheshireAccumulator::merge(const CheshireAccumulator& other) {
  sum_.add(other.sum_.sum);
  sum_.add(other.sum_.comp);
  sum_sq_.add(other.sum_sq_.sum);
  sum_sq_.add(other.sum_sq_.comp);
  n_ += other.n_;
  successes_ += other.successes_;
}

EstimatorOutput CheshireAccumulator::result() const {
  if (n_ < 2) throw ValidationError("estimator needs at least two trials");
  const double n = static_cast<double>(n_);
  const double mean = sum_.value() / n;
  const double var = std::max(0.0, (sum_sq_.value() - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), static_cast<double>(successes_) / n, n_};
}

EstimatorOutput estimate_cheshire(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw ValidationError("estimator received an empty trial stream");
  CheshireAccumulator acc;
  for (const auto& r : trials) acc.add(r);
  return acc.result();
}

EstimatorOutput run_cheshire(const TrialSampler& sampler, std::uint64_t n, std::size_t threads,
                             const std::function<void(std::span<const TrialRecord>)>& on_block) {
  if (n < 2) throw ValidationError("need at least two trials");
  threads = std::max<std::size_t>(1, threads);
  const std::uint64_t blocks = (n + kBlockSize - 1) / kBlockSize;
  const std::uint64_t batch = static_cast<std::uint64_t>(threads) * 4;
  CheshireAccumulator total;
  std::vector<std::vector<TrialRecord>> buffers(on_block ? batch : 0);
  std::vector<CheshireAccumulator> partial(batch);

  for (std::uint64_t first = 0; first < blocks; first += batch) {
    const std::uint64_t count = std::min(batch, blocks - first);
    parallel_for(count, threads, [&](std::size_t k) {
      const std::uint64_t lo = (first + k) * kBlockSize;
      const std::uint64_t hi = std::min(n, lo + kBlockSize);
      CheshireAccumulator acc;
      if (on_block) buffers[k].clear();
      for (std::uint64_t i = lo; i < hi; ++i) {
        const TrialRecord r = sampler.trial(i);
        acc.add(r);
        if (on_block) buffers[k].push_back(r);
      }
      partial[k] = acc;
    });
    for (std::uint64_t k = 0; k < count; ++k) {
      if (on_block) on_block(buffers[k]);
      total.merge(partial[k]);
    }
  }
  return total.result();
}

void write_trials_csv_header(std::ostream& out) { out << "tau,x,y\n"; }

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  for (const auto& r : trials) {
    out << r.tau << ',' << text::format_double(r.x) << ',' << text::format_double(r.y) << '\n';
  }
}

std::vector<NoiseRow> noise_robustness(const TransitionAmplitudes& amps, const BranchWeights& weights,
                                       const Couplings& g, std::span<const NoiseModel> noise_levels,
                                       std::uint64_t n_trials, std::uint64_t seed, std::size_t threads) {
  const double c_exact = 2.0 * cross_moment(amps, g.g_a, g.g_b);
  std::vector<NoiseRow> rows;
  rows.reserve(noise_levels.size());
  for (const auto& noise : noise_levels) {
    const TrialSampler sampler(amps, weights, g, noise, seed);
    const EstimatorOutput est = run_cheshire(sampler, n_trials, threads);
    NoiseRow row{noise.nu_a, noise.nu_b, est.c_hat, est.std_error, std::numeric_limits<std::uint64_t>::max()};
    if (c_exact != 0.0) {
      const double variance = est.std_error * est.std_error * static_cast<double>(est.n_trials);
      row.n_required = static_cast<std::uint64_t>(std::ceil(25.0 * variance / (c_exact * c_exact)));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcat
