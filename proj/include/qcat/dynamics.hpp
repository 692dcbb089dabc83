#pragma once

// Joint photon-meter evolution followed by postselection.
//
// Branch L moves meter A by +g_A and leaves B alone; branch R,+ moves B by
// +g_B and branch R,- by -g_B. After a successful postselection the meters
// are left in
//
//   F(x, y) = l phi0(x - g_A) phi0(y) + r+ phi0(x) phi0(y - g_B)
//           + r- phi0(x) phi0(y + g_B),
//
// with <F|F> = P. Tracing the photon instead leaves the classical mixture
// rho_cl = |a|^2 |A1 B0><.| + |b|^2 |A0 B+><.| + |c|^2 |A0 B-><.|, and a
// failed postselection leaves rho_cl - |F><F|.

#include <array>
#include <cstddef>

#include "qcat/meter.hpp"
#include "qcat/qsystem.hpp"

namespace qcat {

inline constexpr double kProbabilitySlack = 1e-10;
inline constexpr double kPositivitySlack = 1e-10;

struct Couplings {
  double g_a = 0.0;
  double g_b = 0.0;

  /// Throws ValidationError for negative or NaN couplings.
  void validate() const;
};

/// Preparation weights on the three meter branches. Only the moduli enter
/// the classical mixture; a is the norm of the left-arm component.
class BranchWeights {
 public:
  /// Throws ValidationError unless |a|^2 + |b|^2 + |c|^2 = 1 within 1e-12.
  BranchWeights(Complex a, Complex b, Complex c);
  static BranchWeights from_preparation(const PhotonKet& prep);

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  /// Probabilities of the branches L, R+, R-.
  std::array<double, 3> probabilities() const { return {std::norm(a_), std::norm(b_), std::norm(c_)}; }

 private:
  Complex a_, b_, c_;
};

/// One term coefficient * phi0(x - shift_a) phi0(y - shift_b).
struct BranchTerm {
  Complex coefficient;
  double shift_a;
  double shift_b;
};

/// The three terms of F, ordered L, R+, R-.
std::array<BranchTerm, 3> success_terms(const TransitionAmplitudes& amps, const Couplings& g);
/// Branch displacements with the preparation weights as coefficients.
std::array<BranchTerm, 3> classical_terms(const BranchWeights& weights, const Couplings& g);

/// Closed-form P = <F|F> for Gaussian meters. Throws ConsistencyError if the
/// result leaves [-1e-10, 1 + 1e-10] (amplitudes not from unit kets).
double success_probability(const TransitionAmplitudes& amps, const Couplings& g);

/// Tr(X_A X_B rho_cl) = sum_k |w_k|^2 <A_k|X_A|A_k> <B_k|X_B|B_k>.
double classical_mixture_moment(const BranchWeights& weights, const MeterModel& meter_a, const MeterModel& meter_b,
                                Weight x_a, Weight x_b);
double classical_mixture_moment(const BranchWeights& weights, const Couplings& g, Weight x_a, Weight x_b);

/// Final meter state for Gaussian meters, evaluated pointwise.
class JointMeterState {
 public:
  JointMeterState(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g);

  Complex success_amplitude(double x, double y) const;
  double success_density(double x, double y) const { return std::norm(success_amplitude(x, y)); }
  double classical_density(double x, double y) const;
  double failure_density(double x, double y) const { return classical_density(x, y) - success_density(x, y); }
  double success_probability() const { return p_success_; }

  const TransitionAmplitudes& amplitudes() const { return amps_; }
  const BranchWeights& weights() const { return weights_; }
  const Couplings& couplings() const { return g_; }

 private:
  TransitionAmplitudes amps_;
  BranchWeights weights_;
  Couplings g_;
  std::array<BranchTerm, 3> success_;
  std::array<BranchTerm, 3> classical_;
  double p_success_;
};

/// Unweighted and pointer-weighted integrals of one density over the plane.
struct DensityMoments {
  double mass = 0.0;  // integral of p
  double x = 0.0;     // integral of x p
  double y = 0.0;     // integral of y p
  double xy = 0.0;    // integral of x y p
};

/// Two-meter state on the product lattice of two grid meters. Densities are
/// evaluated on demand; nothing of size n_x * n_y is stored.
class GridJointState {
 public:
  GridJointState(const TransitionAmplitudes& amps, const BranchWeights& weights, const GridMeter& meter_a,
                 const GridMeter& meter_b);

  const UniformGrid& grid_a() const { return grid_a_; }
  const UniformGrid& grid_b() const { return grid_b_; }

  Complex success_amplitude(std::size_t i, std::size_t j) const;
  double success_density(std::size_t i, std::size_t j) const { return std::norm(success_amplitude(i, j)); }
  double classical_density(std::size_t i, std::size_t j) const;
  double failure_density(std::size_t i, std::size_t j) const {
    return classical_density(i, j) - success_density(i, j);
  }

  struct Moments {
    DensityMoments success;
    DensityMoments classical;
    DensityMoments failure;
    double min_failure_density = 0.0;
  };

  /// Direct trapezoidal double sums over every lattice point.
  Moments moments(std::size_t threads = 1) const;

 private:
  TransitionAmplitudes amps_;
  std::array<double, 3> probs_;
  UniformGrid grid_a_, grid_b_;
  std::vector<Complex> a0_, a1_, b0_, b_plus_, b_minus_;
};

/// Failure-branch density p_f = diag(rho_cl) - |F|^2 on the lattice.
class FailureBranch {
 public:
  explicit FailureBranch(GridJointState state, std::size_t threads = 1);

  double at(std::size_t i, std::size_t j) const { return state_.failure_density(i, j); }
  /// Integral of p_f, which equals 1 - P.
  double total() const { return moments_.failure.mass; }
  const DensityMoments& moments() const { return moments_.failure; }
  double min_value() const { return moments_.min_failure_density; }
  const GridJointState& state() const { return state_; }

 private:
  GridJointState state_;
  GridJointState::Moments moments_;
};

/// Builds the failure branch for Gaussian meters sampled on `grid`. Throws
/// PositivityViolation if p_f < -1e-10 anywhere (weights inconsistent with
/// the amplitudes).
FailureBranch failure_density(const TransitionAmplitudes& amps, const BranchWeights& weights, const Couplings& g,
                              const UniformGrid& grid = kDefaultGrid, std::size_t threads = 1);

}  // namespace qcat
