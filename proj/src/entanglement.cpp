#include "qcat/entanglement.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "qcat/errors.hpp"
#include "qcat/meter.hpp"

namespace qcat {
namespace {

constexpr double kDropNorm2 = 1e-15;
constexpr double kNegativeEigenvalueFloor = -1e-14;

void require_permutation(std::span<const std::size_t> order, std::size_t n) {
  std::vector<bool> seen(n, false);
  if (order.size() != n) throw ValidationError("Gram-Schmidt order has the wrong length");
  for (const auto i : order) {
    if (i >= n || seen[i]) throw ValidationError("Gram-Schmidt order is not a permutation");
    seen[i] = true;
  }
}

}  // namespace

MatX gram_schmidt_coordinates(const MatX& gram, std::span<const std::size_t> order) {
  const auto m = static_cast<std::size_t>(gram.rows());
  require_permutation(order, m);
  // basis[k] = sum_j t(k, j) v_j
  std::vector<VecX> basis;
  MatX coords = MatX::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto j : order) {
    const auto jj = static_cast<Eigen::Index>(j);
    VecX t_new = VecX::Zero(static_cast<Eigen::Index>(m));
    t_new(jj) = 1.0;
    double norm2 = gram(jj, jj).real();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      // <e_k|v_j> = sum_i conj(t_k,i) G_ij
      const Complex c = basis[k].dot(gram.col(jj));
      coords(static_cast<Eigen::Index>(k), jj) = c;
      t_new -= c * basis[k];
      norm2 -= std::norm(c);
    }
    if (norm2 > kDropNorm2) {
      const double norm = std::sqrt(norm2);
      coords(static_cast<Eigen::Index>(basis.size()), jj) = norm;
      basis.push_back(t_new / norm);
    }
  }
  return coords.topRows(static_cast<Eigen::Index>(basis.size()));
}

EmbeddedMeterState embed(const TransitionAmplitudes& amps, double g_a, double g_b, const GramSchmidtOrder& order) {
  if (!(g_a >= 0.0) || !(g_b >= 0.0)) throw ValidationError("couplings must be >= 0");
  const double w_a = gaussian_overlap0(g_a);
  const double w_b = gaussian_overlap0(g_b);
  const double pm = gaussian_overlap0(2.0 * g_b);

  MatX gram_a(2, 2);
  gram_a << 1.0, w_a, w_a, 1.0;
  MatX gram_b(3, 3);
  gram_b << 1.0, w_b, w_b, w_b, 1.0, pm, w_b, pm, 1.0;

  const MatX ca = gram_schmidt_coordinates(gram_a, order.a_order);
  const MatX cb = gram_schmidt_coordinates(gram_b, order.b_order);
  const auto da = ca.rows();
  const auto db = cb.rows();

  const auto kron = [&](Eigen::Index ia, Eigen::Index ib) {
    VecX out(da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
      for (Eigen::Index j = 0; j < db; ++j) out(i * db + j) = ca(i, ia) * cb(j, ib);
    }
    return out;
  };
  VecX f = amps.l * kron(1, 0) + amps.r_plus * kron(0, 1) + amps.r_minus * kron(0, 2);

  EmbeddedMeterState s;
  s.dim_a = static_cast<std::size_t>(da);
  s.dim_b = static_cast<std::size_t>(db);
  s.p_success = f.squaredNorm();
  if (!(s.p_success > kWeakValueEpsilon)) {
    std::ostringstream os;
    os << "postselection probability " << s.p_success << " too small to normalize the meter state";
    throw OrthogonalPostselection(os.str());
  }
  s.vector = f / std::sqrt(s.p_success);
  s.rho = s.vector * s.vector.adjoint();
  return s;
}

MatX partial_transpose_b(const MatX& rho, std::size_t dim_a, std::size_t dim_b) {
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  if (rho.rows() != da * db || rho.cols() != da * db) throw ValidationError("partial transpose: dimension mismatch");
  MatX out(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < db; ++j) {
      for (Eigen::Index k = 0; k < da; ++k) {
        for (Eigen::Index l = 0; l < db; ++l) out(i * db + j, k * db + l) = rho(i * db + l, k * db + j);
      }
    }
  }
  return out;
}

NegativityReport negativity(const EmbeddedMeterState& state) {
  const MatX pt = partial_transpose_b(state.rho, state.dim_a, state.dim_b);
  Eigen::SelfAdjointEigenSolver<MatX> es(pt, Eigen::EigenvaluesOnly);
  NegativityReport r;
  r.min_pt_eigenvalue = es.eigenvalues().minCoeff();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev < kNegativeEigenvalueFloor) r.negativity -= ev;
  }
  r.ppt_is_exact = state.dim_a * state.dim_b <= 6;
  return r;
}

}  // namespace qcat
