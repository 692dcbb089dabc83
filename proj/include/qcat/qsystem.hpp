#pragma once

// Photon Hilbert space of the two-arm interferometer.
//
// Basis ordering: |L,+>, |L,->, |R,+>, |R,->. The left arm carries a
// two-dimensional polarization space (Pi_L has rank 2), the right arm is
// resolved into its two polarization projectors.

#include <array>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qcat {

using Complex = std::complex<double>;
using Vec4 = Eigen::Matrix<Complex, 4, 1>;
using Mat4 = Eigen::Matrix<Complex, 4, 4>;

enum class Arm { Left = 0, Right = 1 };
enum class Polarization { Plus = 0, Minus = 1 };

constexpr std::size_t basis_index(Arm arm, Polarization pol) {
  return 2 * static_cast<std::size_t>(arm) + static_cast<std::size_t>(pol);
}

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kEigenTolerance = 1e-10;
inline constexpr double kWeakValueEpsilon = 1e-12;

/// Unit-norm photon state. Normalization is checked once, at construction.
class PhotonKet {
 public:
  /// Throws ValidationError unless sum |amp|^2 = 1 within kNormTolerance.
  explicit PhotonKet(const std::array<Complex, 4>& amplitudes);

  /// Rescales to unit norm; throws ValidationError for the zero vector.
  static PhotonKet normalized(const std::array<Complex, 4>& amplitudes);
  static PhotonKet basis(Arm arm, Polarization pol);

  const Vec4& vector() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
  Complex amplitude(Arm arm, Polarization pol) const { return (*this)[basis_index(arm, pol)]; }
  std::array<Complex, 4> amplitudes() const;

 private:
  struct Unchecked {};
  PhotonKet(Unchecked, const Vec4& v) : amps_(v) {}
  Vec4 amps_;
};

/// Preparation |Psi> and postselection |Phi>.
struct StatePair {
  PhotonKet prep;
  PhotonKet post;
};

/// Complex inner product <bra|ket>.
Complex inner(const PhotonKet& bra, const PhotonKet& ket);

/// Preparation state rho: Hermitian, unit trace, positive semidefinite.
class PhotonDensity {
 public:
  explicit PhotonDensity(const Mat4& matrix);
  static PhotonDensity pure(const PhotonKet& ket);

  const Mat4& matrix() const { return m_; }

 private:
  Mat4 m_;
};

/// Postselection effect E: Hermitian with spectrum in [0, 1]. A pure
/// postselection is the projector |Phi><Phi|.
class PhotonEffect {
 public:
  explicit PhotonEffect(const Mat4& matrix);
  static PhotonEffect projector(const PhotonKet& ket);

  const Mat4& matrix() const { return m_; }

 private:
  Mat4 m_;
};

struct CanonicalOperators {
  Mat4 pi_L;
  Mat4 pi_R_plus;
  Mat4 pi_R_minus;
  Mat4 sigma_R;  // pi_R_plus - pi_R_minus
};

const CanonicalOperators& canonical_operators();

/// (l, r+, r-) = (<Phi|Pi_L|Psi>, <Phi|Pi_R+|Psi>, <Phi|Pi_R-|Psi>).
struct TransitionAmplitudes {
  Complex l{};
  Complex r_plus{};
  Complex r_minus{};

  /// l + r+ + r- = <Phi|Psi> by completeness.
  Complex overlap() const { return l + r_plus + r_minus; }
  /// r+ - r- = <Phi|sigma_R|Psi>.
  Complex spin_difference() const { return r_plus - r_minus; }
};

struct WeakValues {
  Complex L_w;
  Complex Sigma_w;
};

TransitionAmplitudes transition_amplitudes(const PhotonKet& prep, const PhotonKet& post);

/// Throws OrthogonalPostselection if |l + r+ + r-| <= epsilon.
WeakValues weak_values(const TransitionAmplitudes& amps, double epsilon = kWeakValueEpsilon);

/// Tr(E sigma_R rho Pi_L). Equals (r+ - r-) l* for pure E and rho.
Complex trace_term(const PhotonEffect& effect, const PhotonDensity& rho);

}  // namespace qcat
