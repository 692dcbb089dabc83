#include "qcat/qsystem.hpp"

#include <cmath>
#include <sstream>

#include "qcat/errors.hpp"

namespace qcat {
namespace {

Vec4 to_vec(const std::array<Complex, 4>& a) {
  Vec4 v;
  for (Eigen::Index i = 0; i < 4; ++i) v(i) = a[static_cast<std::size_t>(i)];
  return v;
}

bool all_finite(const Mat4& m) {
  for (Eigen::Index i = 0; i < 16; ++i) {
    if (!std::isfinite(m(i).real()) || !std::isfinite(m(i).imag())) return false;
  }
  return true;
}

void require_hermitian(const Mat4& m, const char* what) {
  if (!all_finite(m)) throw ValidationError(std::string(what) + ": non-finite entry");
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermitianTolerance) {
    std::ostringstream os;
    os << what << ": not Hermitian (max |M - M^dagger| = " << dev << ")";
    throw ValidationError(os.str());
  }
}

Eigen::Vector4d spectrum(const Mat4& m) {
  const Mat4 h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

PhotonKet::PhotonKet(const std::array<Complex, 4>& amplitudes) : amps_(to_vec(amplitudes)) {
  for (const auto& a : amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ValidationError("photon ket: non-finite amplitude");
    }
  }
  const double norm2 = amps_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "photon ket: not normalized (sum |amp|^2 = " << norm2 << ")";
    throw ValidationError(os.str());
  }
}

PhotonKet PhotonKet::normalized(const std::array<Complex, 4>& amplitudes) {
  Vec4 v = to_vec(amplitudes);
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) throw ValidationError("photon ket: cannot normalize zero or non-finite vector");
  return PhotonKet(Unchecked{}, v / n);
}

PhotonKet PhotonKet::basis(Arm arm, Polarization pol) {
  Vec4 v = Vec4::Zero();
  v(static_cast<Eigen::Index>(basis_index(arm, pol))) = 1.0;
  return PhotonKet(Unchecked{}, v);
}

std::array<Complex, 4> PhotonKet::amplitudes() const {
  return {amps_(0), amps_(1), amps_(2), amps_(3)};
}

Complex inner(const PhotonKet& bra, const PhotonKet& ket) {
  return bra.vector().dot(ket.vector());  // Eigen's dot conjugates the left operand
}

PhotonDensity::PhotonDensity(const Mat4& matrix) : m_(matrix) {
  require_hermitian(m_, "density matrix");
  const Complex tr = m_.trace();
  if (std::abs(tr - Complex(1.0)) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix: trace " << tr.real() << " != 1";
    throw ValidationError(os.str());
  }
  if (spectrum(m_).minCoeff() < -kEigenTolerance) {
    throw ValidationError("density matrix: negative eigenvalue");
  }
}

PhotonDensity PhotonDensity::pure(const PhotonKet& ket) {
  return PhotonDensity(ket.vector() * ket.vector().adjoint());
}

PhotonEffect::PhotonEffect(const Mat4& matrix) : m_(matrix) {
  require_hermitian(m_, "postselection effect");
  const Eigen::Vector4d ev = spectrum(m_);
  if (ev.minCoeff() < -kEigenTolerance || ev.maxCoeff() > 1.0 + kEigenTolerance) {
    throw ValidationError("postselection effect: eigenvalues must lie in [0, 1]");
  }
}

PhotonEffect PhotonEffect::projector(const PhotonKet& ket) {
  return PhotonEffect(ket.vector() * ket.vector().adjoint());
}

const CanonicalOperators& canonical_operators() {
  static const CanonicalOperators ops = [] {
    CanonicalOperators o;
    o.pi_L = Mat4::Zero();
    o.pi_R_plus = Mat4::Zero();
    o.pi_R_minus = Mat4::Zero();
    o.pi_L(0, 0) = 1.0;
    o.pi_L(1, 1) = 1.0;
    o.pi_R_plus(2, 2) = 1.0;
    o.pi_R_minus(3, 3) = 1.0;
    o.sigma_R = o.pi_R_plus - o.pi_R_minus;
    return o;
  }();
  return ops;
}

TransitionAmplitudes transition_amplitudes(const PhotonKet& prep, const PhotonKet& post) {
  const auto& ops = canonical_operators();
  const Vec4& psi = prep.vector();
  const Vec4& phi = post.vector();
  return {phi.dot(ops.pi_L * psi), phi.dot(ops.pi_R_plus * psi), phi.dot(ops.pi_R_minus * psi)};
}

WeakValues weak_values(const TransitionAmplitudes& amps, double epsilon) {
  const Complex denom = amps.overlap();
  if (!(std::abs(denom) > epsilon)) {
    std::ostringstream os;
    os << "weak values undefined: |l + r+ + r-| = " << std::abs(denom) << " <= " << epsilon;
    throw OrthogonalPostselection(os.str());
  }
  return {amps.l / denom, amps.spin_difference() / denom};
}

Complex trace_term(const PhotonEffect& effect, const PhotonDensity& rho) {
  const auto& ops = canonical_operators();
  return (effect.matrix() * ops.sigma_R * rho.matrix() * ops.pi_L).trace();
}

}  // namespace qcat
