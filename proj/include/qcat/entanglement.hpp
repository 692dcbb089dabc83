#pragma once

// Finite-dimensional picture of the postselected meter state.
//
// |F> lives in span{A0, A1} (x) span{B0, B+, B-}. Orthonormalizing both
// spans with the Gaussian overlaps gives an exact embedding into at most
// C^2 (x) C^3, where the Peres-Horodecki (PPT) test is necessary and
// sufficient for entanglement.

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "qcat/qsystem.hpp"

namespace qcat {

using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

struct EmbeddedMeterState {
  std::size_t dim_a = 0;  // <= 2
  std::size_t dim_b = 0;  // <= 3
  VecX vector;            // |F> / sqrt(P), index i_a * dim_b + i_b
  MatX rho;               // vector vector^dagger
  double p_success = 0.0; // <F|F> before normalization
};

/// Input order for Gram-Schmidt: a_order permutes {A0, A1}, b_order
/// permutes {B0, B+, B-}. The embedded state depends on the order only up
/// to a local unitary.
struct GramSchmidtOrder {
  std::array<std::size_t, 2> a_order{0, 1};
  std::array<std::size_t, 3> b_order{0, 1, 2};
};

/// Result of orthonormalizing vectors known only through their Gram matrix:
/// column j holds the coordinates of input vector j in the new basis.
/// Directions with residual norm^2 <= 1e-15 are dropped.
MatX gram_schmidt_coordinates(const MatX& gram, std::span<const std::size_t> order);

/// Gaussian meters; infinite couplings are allowed (orthogonal branches).
/// Throws OrthogonalPostselection if P vanishes.
EmbeddedMeterState embed(const TransitionAmplitudes& amps, double g_a, double g_b,
                         const GramSchmidtOrder& order = {});

struct NegativityReport {
  double negativity = 0.0;           // sum of |negative eigenvalues| of rho^T_B
  double min_pt_eigenvalue = 0.0;
  bool ppt_is_exact = false;         // true when dim_a * dim_b <= 6
  bool entangled() const { return negativity > 0.0; }
};

/// Eigenvalues above -1e-14 are treated as zero.
NegativityReport negativity(const EmbeddedMeterState& state);

/// rho^T_B for a (dim_a * dim_b)-square matrix.
MatX partial_transpose_b(const MatX& rho, std::size_t dim_a, std::size_t dim_b);

}  // namespace qcat
