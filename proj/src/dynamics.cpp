#include "qcat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcat/errors.hpp"
#include "qcat/parallel.hpp"

namespace qcat {

void Couplings::validate() const {
  if (!(g_a >= 0.0) || !(g_b >= 0.0)) throw ValidationError("couplings must be >= 0");
}

BranchWeights::BranchWeights(Complex a, Complex b, Complex c) : a_(a), b_(b), c_(c) {
  const double total = std::norm(a) + std::norm(b) + std::norm(c);
  if (!(std::abs(total - 1.0) <= kNormTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "branch weights: |a|^2 + |b|^2 + |c|^2 = " << total << " != 1";
    throw ValidationError(os.str());
  }
}

BranchWeights BranchWeights::from_preparation(const PhotonKet& prep) {
  const double left = std::sqrt(std::norm(prep.amplitude(Arm::Left, Polarization::Plus)) +
                                std::norm(prep.amplitude(Arm::Left, Polarization::Minus)));
  return BranchWeights(left, prep.amplitude(Arm::Right, Polarization::Plus),
                       prep.amplitude(Arm::Right, Polarization::Minus));
}

std::array<BranchTerm, 3> success_terms(const TransitionAmplitudes& amps, const Couplings& g) {
  return {{{amps.l, g.g_a, 0.0}, {amps.r_plus, 0.0, g.g_b}, {amps.r_minus, 0.0, -g.g_b}}};
}

std::array<BranchTerm, 3> classical_terms(const BranchWeights& weights, const Couplings& g) {
  return {{{weights.a(), g.g_a, 0.0}, {weights.b(), 0.0, g.g_b}, {weights.c(), 0.0, -g.g_b}}};
}

double success_probability(const TransitionAmplitudes& amps, const Couplings& g) {
  g.validate();
  const double w_a = gaussian_overlap0(g.g_a);
  const double w_b = gaussian_overlap0(g.g_b);
  const double b_plus_minus = gaussian_overlap0(2.0 * g.g_b);  // <B+|B-> = exp(-g_B^2 / 2)
  const double p = std::norm(amps.l) + std::norm(amps.r_plus) + std::norm(amps.r_minus) +
                   2.0 * w_a * w_b * (std::conj(amps.l) * (amps.r_plus + amps.r_minus)).real() +
                   2.0 * b_plus_minus * (std::conj(amps.r_plus) * amps.r_minus).real();
  if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
    std::ostringstream os;
    os.precision(17);
    os << "success probability " << p << " outside [0, 1]";
    throw ConsistencyError(os.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

double classical_mixture_moment(const BranchWeights& weights, const MeterModel& meter_a, const MeterModel& meter_b,
                                Weight x_a, Weight x_b) {
  const Couplings g{coupling(meter_a), coupling(meter_b)};
  const auto terms = classical_terms(weights, g);
  double sum = 0.0;
  for (const auto& t : terms) {
    const double p = std::norm(t.coefficient);
    if (p == 0.0) continue;
    sum += p * (matrix_element(meter_a, t.shift_a, t.shift_a, x_a) * matrix_element(meter_b, t.shift_b, t.shift_b, x_b))
                   .real();
  }
  return sum;
}

double classical_mixture_moment(const BranchWeights& weights, const Couplings& g, Weight x_a, Weight x_b) {
  g.validate();
  return classical_mixture_moment(weights, GaussianMeter(g.g_a), GaussianMeter(g.g_b), x_a, x_b);
}

JointMeterState::JointMeterState(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g)
    : amps_(amps),
      weights_(weights),
      g_(g),
      success_(success_terms(amps, g)),
      classical_(classical_terms(weights, g)),
      p_success_(qcat::success_probability(amps, g)) {}

Complex JointMeterState::success_amplitude(double x, double y) const {
  Complex f{};
  for (const auto& t : success_) {
    f += t.coefficient * (gaussian_wavefunction(x - t.shift_a) * gaussian_wavefunction(y - t.shift_b));
  }
  return f;
}

double JointMeterState::classical_density(double x, double y) const {
  double p = 0.0;
  for (const auto& t : classical_) {
    const double phi = gaussian_wavefunction(x - t.shift_a) * gaussian_wavefunction(y - t.shift_b);
    p += std::norm(t.coefficient) * phi * phi;
  }
  return p;
}

GridJointState::GridJointState(const TransitionAmplitudes& amps, const BranchWeights& weights,
                               const GridMeter& meter_a, const GridMeter& meter_b)
    : amps_(amps),
      probs_(weights.probabilities()),
      grid_a_(meter_a.grid()),
      grid_b_(meter_b.grid()),
      a0_(meter_a.psi0().begin(), meter_a.psi0().end()),
      a1_(meter_a.shifted(meter_a.coupling())),
      b0_(meter_b.psi0().begin(), meter_b.psi0().end()),
      b_plus_(meter_b.shifted(meter_b.coupling())),
      b_minus_(meter_b.shifted(-meter_b.coupling())) {}

Complex GridJointState::success_amplitude(std::size_t i, std::size_t j) const {
  return amps_.l * a1_[i] * b0_[j] + a0_[i] * (amps_.r_plus * b_plus_[j] + amps_.r_minus * b_minus_[j]);
}

double GridJointState::classical_density(std::size_t i, std::size_t j) const {
  return probs_[0] * std::norm(a1_[i]) * std::norm(b0_[j]) +
         std::norm(a0_[i]) * (probs_[1] * std::norm(b_plus_[j]) + probs_[2] * std::norm(b_minus_[j]));
}

GridJointState::Moments GridJointState::moments(std::size_t threads) const {
  constexpr std::size_t kChunks = 64;
  const std::size_t nx = grid_a_.points;
  const std::size_t ny = grid_b_.points;
  const std::size_t chunk = (nx + kChunks - 1) / kChunks;
  std::vector<Moments> partial(kChunks);
  for (auto& p : partial) p.min_failure_density = std::numeric_limits<double>::infinity();

  parallel_for(kChunks, threads, [&](std::size_t c) {
    Moments& acc = partial[c];
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(nx, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      const double x = grid_a_.point(i);
      const double tx = (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
      DensityMoments row_s, row_c;
      for (std::size_t j = 0; j < ny; ++j) {
        const double y = grid_b_.point(j);
        const double ty = (j == 0 || j + 1 == ny) ? 0.5 : 1.0;
        const double ps = success_density(i, j);
        const double pc = classical_density(i, j);
        acc.min_failure_density = std::min(acc.min_failure_density, pc - ps);
        row_s.mass += ty * ps;
        row_s.y += ty * y * ps;
        row_c.mass += ty * pc;
        row_c.y += ty * y * pc;
      }
      acc.success.mass += tx * row_s.mass;
      acc.success.x += tx * x * row_s.mass;
      acc.success.y += tx * row_s.y;
      acc.success.xy += tx * x * row_s.y;
      acc.classical.mass += tx * row_c.mass;
      acc.classical.x += tx * x * row_c.mass;
      acc.classical.y += tx * row_c.y;
      acc.classical.xy += tx * x * row_c.y;
    }
  });

  Moments total;
  total.min_failure_density = std::numeric_limits<double>::infinity();
  const double area = grid_a_.spacing() * grid_b_.spacing();
  const auto add = [area](DensityMoments& into, const DensityMoments& from) {
    into.mass += area * from.mass;
    into.x += area * from.x;
    into.y += area * from.y;
    into.xy += area * from.xy;
  };
  for (const auto& p : partial) {
    add(total.success, p.success);
    add(total.classical, p.classical);
    total.min_failure_density = std::min(total.min_failure_density, p.min_failure_density);
  }
  total.failure = {total.classical.mass - total.success.mass, total.classical.x - total.success.x,
                   total.classical.y - total.success.y, total.classical.xy - total.success.xy};
  return total;
}

FailureBranch::FailureBranch(GridJointState state, std::size_t threads)
    : state_(std::move(state)), moments_(state_.moments(threads)) {
  if (moments_.min_failure_density < -kPositivitySlack) {
    std::ostringstream os;
    os << "failure-branch density reaches " << moments_.min_failure_density
       << "; preparation weights are inconsistent with the transition amplitudes";
    throw PositivityViolation(os.str());
  }
}

FailureBranch failure_density(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g,
                              const UniformGrid& grid, std::size_t threads) {
  g.validate();
  const GridMeter base = GridMeter::gaussian(grid);
  return FailureBranch(GridJointState(amps, weights, base.with_coupling(g.g_a), base.with_coupling(g.g_b)), threads);
}

}  // namespace qcat
