#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qcat/errors.hpp"
#include "qcat/indicator.hpp"
#include "qcat/sampler.hpp"

using namespace qcat;

namespace {

const double kThird = 1.0 / std::sqrt(3.0);

StatePair example_states() {
  return {PhotonKet({kThird, 0.0, kThird, kThird}), PhotonKet({kThird, 0.0, kThird, -kThird})};
}

TrialSampler make_sampler(const StatePair& s, double g, NoiseModel noise = {}, std::uint64_t seed = 42,
                          SamplerOptions opts = {}) {
  return TrialSampler(transition_amplitudes(s.prep, s.post), BranchWeights::from_preparation(s.prep), {g, g}, noise,
                      seed, opts);
}

// Second moment of tau x y over all trials (tau^2 = 1, so the branch
// mixture alone sets it) with independent readout noise.
double exact_variance(const StatePair& s, double g, double nu_a, double nu_b) {
  const auto w = BranchWeights::from_preparation(s.prep).probabilities();
  // Branch a: x ~ N(g, 1), y ~ N(0, 1); branches b, c: x ~ N(0, 1), y ~ N(+-g, 1).
  const double ex2_a = g * g + 1.0 + nu_a * nu_a, ey2_a = 1.0 + nu_b * nu_b;
  const double ex2_r = 1.0 + nu_a * nu_a, ey2_r = g * g + 1.0 + nu_b * nu_b;
  const double second = w[0] * ex2_a * ey2_a + (w[1] + w[2]) * ex2_r * ey2_r;
  const double c = cheshire_analytic(s, g, g).c_value;
  return second - c * c;
}

}  // namespace

TEST(Estimator, HandExamples) {
  const std::vector<TrialRecord> two{{1, 1.0, 1.0}, {-1, 1.0, 1.0}};
  const auto e = estimate_cheshire(two);
  EXPECT_EQ(e.c_hat, 0.0);
  EXPECT_DOUBLE_EQ(e.std_error, 1.0);
  EXPECT_EQ(e.p_hat, 0.5);
  EXPECT_EQ(e.n_trials, 2u);

  const std::vector<TrialRecord> three{{1, 2.0, 3.0}, {1, -1.0, 1.0}, {-1, 0.5, 4.0}};
  const auto f = estimate_cheshire(three);
  EXPECT_DOUBLE_EQ(f.c_hat, (6.0 - 1.0 - 2.0) / 3.0);
  EXPECT_DOUBLE_EQ(f.std_error, std::sqrt((25.0 + 4.0 + 9.0) / 2.0 / 3.0));
  EXPECT_DOUBLE_EQ(f.p_hat, 2.0 / 3.0);

  EXPECT_THROW(estimate_cheshire(std::span<const TrialRecord>{}), ValidationError);
  EXPECT_THROW(estimate_cheshire(std::span<const TrialRecord>(two.data(), 1)), ValidationError);
}

TEST(Estimator, MergeEqualsSinglePass) {
  const auto sampler = make_sampler(example_states(), 2.0);
  const auto trials = sampler.sample(0, 5000);
  CheshireAccumulator all, left, right;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    all.add(trials[i]);
    (i < 1234 ? left : right).add(trials[i]);
  }
  left.merge(right);
  EXPECT_NEAR(left.result().c_hat, all.result().c_hat, 1e-15);
  EXPECT_NEAR(left.result().std_error, all.result().std_error, 1e-15);
  EXPECT_EQ(left.count(), 5000u);
}

TEST(Sampler, ZeroCouplingGivesUnshiftedPointers) {
  const auto s = example_states();
  const auto sampler = make_sampler(s, 0.0);
  const auto trials = sampler.sample(0, 200000);
  const double p = std::norm(inner(s.post, s.prep));
  EXPECT_NEAR(p, 1.0 / 9.0, 1e-15);
  double succ = 0, mx = 0, my = 0, vx = 0, vy = 0;
  for (const auto& t : trials) {
    succ += t.tau == 1;
    mx += t.x;
    my += t.y;
    vx += t.x * t.x;
    vy += t.y * t.y;
  }
  const double n = static_cast<double>(trials.size());
  EXPECT_NEAR(succ / n, p, 5.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_NEAR(mx / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(my / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(vx / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(vy / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Sampler, OrthogonalPostselectionAlwaysFails) {
  const StatePair s{PhotonKet::basis(Arm::Left, Polarization::Plus), PhotonKet::basis(Arm::Right, Polarization::Plus)};
  const auto trials = make_sampler(s, 2.0).sample(0, 10000);
  for (const auto& t : trials) ASSERT_EQ(t.tau, -1);
}

TEST(Sampler, SuccessFractionAndCrossMoment) {
  const auto s = example_states();
  const auto sampler = make_sampler(s, 2.0);
  const std::uint64_t n = 200000;
  const auto est = run_cheshire(sampler, n);
  const double p = 0.30325882594741926;
  EXPECT_NEAR(sampler.success_probability(), p, 1e-13);
  EXPECT_NEAR(est.p_hat, p, 5.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_NEAR(est.c_hat, 0.327005, 4.0 * est.std_error);
  EXPECT_NEAR(est.std_error, std::sqrt(exact_variance(s, 2.0, 0.0, 0.0) / n), 0.05 * est.std_error);
}

TEST(Sampler, SuccessMarginalMatchesLocalAverage) {
  const auto s = example_states();
  const auto trials = make_sampler(s, 2.0, {}, 7).sample(0, 300000);
  double n = 0, sx = 0, sxx = 0;
  for (const auto& t : trials) {
    if (t.tau != 1) continue;
    n += 1;
    sx += t.x;
    sxx += t.x * t.x;
  }
  const double mean = sx / n;
  const double sd = std::sqrt(sxx / n - mean * mean);
  EXPECT_NEAR(mean, 0.7327807246103113, 5.0 * sd / std::sqrt(n));
}

TEST(Sampler, DeterministicAndThreadIndependent) {
  const auto sampler = make_sampler(example_states(), 2.0);
  const auto a = run_cheshire(sampler, 100000, 1);
  const auto b = run_cheshire(sampler, 100000, 4);
  const auto c = run_cheshire(make_sampler(example_states(), 2.0), 100000, 3);
  EXPECT_EQ(a.c_hat, b.c_hat);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.p_hat, b.p_hat);
  EXPECT_EQ(a.c_hat, c.c_hat);
  EXPECT_NE(a.c_hat, run_cheshire(make_sampler(example_states(), 2.0, {}, 43), 100000).c_hat);

  const auto block = sampler.sample(500, 100, 2);
  for (std::size_t i = 0; i < block.size(); ++i) {
    const auto t = sampler.trial(500 + i);
    EXPECT_EQ(block[i].tau, t.tau);
    EXPECT_EQ(block[i].x, t.x);
    EXPECT_EQ(block[i].y, t.y);
  }
}

TEST(Sampler, BlockCallbackSeesEveryTrialInOrder) {
  const auto sampler = make_sampler(example_states(), 2.0);
  std::vector<TrialRecord> seen;
  const auto est = run_cheshire(sampler, 70000, 2, [&](std::span<const TrialRecord> b) {
    seen.insert(seen.end(), b.begin(), b.end());
  });
  ASSERT_EQ(seen.size(), 70000u);
  EXPECT_EQ(seen[69999].x, sampler.trial(69999).x);
  EXPECT_NEAR(estimate_cheshire(seen).c_hat, est.c_hat, 1e-15);
}

TEST(Sampler, GridInverseCdfMethod) {
  SamplerOptions opts;
  opts.method = SamplingMethod::GridInverseCdf;
  const auto sampler = make_sampler(example_states(), 2.0, {}, 42, opts);
  EXPECT_NEAR(sampler.success_probability(), 0.30325882594741926, 1e-6);
  const auto est = run_cheshire(sampler, 200000);
  EXPECT_NEAR(est.c_hat, 0.327005, 4.0 * est.std_error);
}

TEST(Sampler, InconsistentWeightsAreRejected) {
  const auto k = PhotonKet::basis(Arm::Left, Polarization::Plus);
  const TrialSampler sampler(transition_amplitudes(k, k), BranchWeights(0.0, 1.0, 0.0), {2.0, 2.0}, {}, 1);
  bool thrown = false;
  for (std::uint64_t i = 0; i < 1000 && !thrown; ++i) {
    try {
      (void)sampler.trial(i);
    } catch (const PositivityViolation&) {
      thrown = true;
    }
  }
  EXPECT_TRUE(thrown);
}

TEST(TrialsCsv, HeaderAndRows) {
  std::ostringstream out;
  write_trials_csv_header(out);
  const std::vector<TrialRecord> rows{{1, 0.1, -2.5}, {-1, 3.0, 0.0}};
  write_trials_csv(out, rows);
  EXPECT_EQ(out.str(), "tau,x,y\n1,0.10000000000000001,-2.5\n-1,3,0\n");
}

TEST(Noise, UnbiasedWithLargerError) {
  const auto s = example_states();
  const auto clean = run_cheshire(make_sampler(s, 2.0), 200000);
  const auto noisy = run_cheshire(make_sampler(s, 2.0, {5.0, 5.0}), 200000);
  EXPECT_GT(noisy.std_error, 3.0 * clean.std_error);
  EXPECT_NEAR(noisy.c_hat, 0.327005, 4.0 * noisy.std_error);
  EXPECT_NEAR(noisy.std_error, std::sqrt(exact_variance(s, 2.0, 5.0, 5.0) / 200000), 0.05 * noisy.std_error);
  EXPECT_THROW(NoiseModel({-1.0, 0.0}).validate(), ValidationError);
}

TEST(Noise, RequiredTrialsFollowVarianceAlgebra) {
  const auto s = example_states();
  const auto amps = transition_amplitudes(s.prep, s.post);
  const auto w = BranchWeights::from_preparation(s.prep);
  const std::vector<NoiseModel> levels{{0.0, 0.0}, {10.0, 10.0}, {20.0, 10.0}, {20.0, 20.0}};
  const auto rows = noise_robustness(amps, w, {2.0, 2.0}, levels, 200000, 42);
  ASSERT_EQ(rows.size(), 4u);
  const double c = 0.3270039477079486;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = 25.0 * exact_variance(s, 2.0, levels[i].nu_a, levels[i].nu_b) / (c * c);
    EXPECT_NEAR(static_cast<double>(rows[i].n_required) / expected, 1.0, 0.06) << i;
  }
  // In the noise-dominated regime the variance scales as nu_a^2 nu_b^2.
  const double r_one = exact_variance(s, 2.0, 200.0, 100.0) / exact_variance(s, 2.0, 100.0, 100.0);
  const double r_both = exact_variance(s, 2.0, 200.0, 200.0) / exact_variance(s, 2.0, 100.0, 100.0);
  EXPECT_NEAR(r_one, 4.0, 0.01);
  EXPECT_NEAR(r_both, 16.0, 0.05);

  const auto k = PhotonKet::basis(Arm::Left, Polarization::Plus);
  const std::vector<NoiseModel> one{{0.0, 0.0}};
  const auto flat = noise_robustness(transition_amplitudes(k, k), BranchWeights::from_preparation(k), {2.0, 2.0},
                                     one, 1000, 1);
  EXPECT_EQ(flat[0].n_required, std::numeric_limits<std::uint64_t>::max());
}
