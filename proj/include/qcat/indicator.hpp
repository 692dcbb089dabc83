#pragma once

// Cross-moment analysis of the postselected meter state and the signed
// indicator C = <tau x y> over all trials.
//
// For unit-variance Gaussian meters with w = exp(-g^2 / 8):
//   <x y> P = (g_A g_B / 2) w_A w_B Re[l* (r+ - r-)]
//   C       = 2 <x y> P = g_A g_B w_A w_B Re Tr(E sigma_R rho Pi_L)
// and |C| <= g_A g_B w_A w_B / 4, with the maximum e^-1 reached at
// g_A = g_B = 2.

#include <cstddef>
#include <cstdint>
#include <functional>

#include "qcat/dynamics.hpp"
#include "qcat/meter.hpp"
#include "qcat/qsystem.hpp"

namespace qcat {

/// m = <F|X_A X_B|F> split into classical, entanglement and local
/// (B-meter) interference parts.
struct MomentDecomposition {
  double m_cl = 0.0;
  double m_ent = 0.0;
  double m_li = 0.0;

  double total() const { return m_cl + m_ent + m_li; }
};

/// X_A, X_B are each the identity (Weight::One) or the pointer
/// (Weight::Position). Pure states only.
MomentDecomposition moment_decomposition(const TransitionAmplitudes& amps, const MeterModel& meter_a,
                                         const MeterModel& meter_b, Weight x_a, Weight x_b);

/// <x y> P for Gaussian meters.
double cross_moment(const TransitionAmplitudes& amps, double g_a, double g_b);

/// g_A g_B w_A w_B / 4.
double cheshire_bound(double g_a, double g_b);

struct CheshireResult {
  double c_value = 0.0;
  double p_success = 0.0;
  Couplings couplings;
  Complex trace_term;
};

/// Exact indicator for Gaussian meters and mixed E, rho. The success
/// probability accounts for the meter-induced decoherence between branches.
CheshireResult cheshire_analytic(const PhotonEffect& effect, const PhotonDensity& rho, double g_a, double g_b);
CheshireResult cheshire_analytic(const StatePair& states, double g_a, double g_b);

/// Postselected pointer means. mean_x = <x>, not <x / g_A>.
struct LocalAverages {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double p_success = 0.0;
};

/// Throws OrthogonalPostselection when P <= epsilon.
LocalAverages local_averages(const TransitionAmplitudes& amps, double g_a, double g_b,
                             double epsilon = kWeakValueEpsilon);

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double tolerance);

struct CouplingOptimum {
  double g_a = 0.0;
  double g_b = 0.0;
  double c_value = 0.0;
};

/// Maximizes |C| over the couplings. The objective separates into
/// g_A w_A * g_B w_B, so each factor is maximized on its own. Throws
/// FlatObjective when Re Tr(E sigma_R rho Pi_L) vanishes.
CouplingOptimum optimize_couplings(const PhotonEffect& effect, const PhotonDensity& rho);

struct StateSearchOptions {
  std::size_t starts = 16;
  std::size_t max_sweeps = 200;
  std::uint64_t seed = 0x5eed;
  std::size_t threads = 1;
};

struct StateOptimum {
  StatePair states;
  double objective = 0.0;  // Re[l* (r+ - r-)]
  double c_value = 0.0;
  std::size_t best_start = 0;
};

/// Maximizes Re[l* (r+ - r-)] over pure preparation/postselection pairs.
/// Each random start alternates exact maximizations over Psi (Phi fixed)
/// and Phi (Psi fixed); both are top-eigenvector problems because the
/// objective is a Hermitian quadratic form in either ket alone.
StateOptimum optimize_states(double g_a, double g_b, const StateSearchOptions& options = {});

/// Builds a pair with prescribed weak values L_w and Sigma_w. The
/// preparation is the balanced state (|L,+> + |R,+> + |R,->) / sqrt(3).
StatePair states_with_weak_values(Complex L_w, Complex Sigma_w);

}  // namespace qcat
