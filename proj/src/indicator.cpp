#include "qcat/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qcat/errors.hpp"
#include "qcat/parallel.hpp"
#include "qcat/rng.hpp"

namespace qcat {
namespace {

constexpr double kFlatTolerance = 1e-12;
constexpr double kCouplingSearchMax = 10.0;
constexpr double kCouplingTolerance = 1e-10;

// g exp(-g^2 / 8): one meter's factor in C.
double coupling_factor(double g) { return g * gaussian_overlap0(g); }

Vec4 random_ket(CounterRng& rng) {
  Vec4 v;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const auto [re, im] = rng.normal_pair();
    v(i) = Complex(re, im);
  }
  return v.normalized();
}

Vec4 top_eigenvector(const Mat4& h) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  return es.eigenvectors().col(3);
}

double state_objective(const Vec4& psi, const Vec4& phi) {
  const auto& ops = canonical_operators();
  // Re[l* (r+ - r-)] = Re[<Psi|Pi_L|Phi> <Phi|sigma_R|Psi>]
  return (psi.dot(ops.pi_L * phi) * phi.dot(ops.sigma_R * psi)).real();
}

std::array<Complex, 4> to_array(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }

}  // namespace

MomentDecomposition moment_decomposition(const TransitionAmplitudes& amps, const MeterModel& meter_a,
                                         const MeterModel& meter_b, Weight x_a, Weight x_b) {
  const double g_a = coupling(meter_a);
  const double g_b = coupling(meter_b);
  const auto a_elem = [&](double bra, double ket) { return matrix_element(meter_a, bra, ket, x_a); };
  const auto b_elem = [&](double bra, double ket) { return matrix_element(meter_b, bra, ket, x_b); };

  const Complex a00 = a_elem(0.0, 0.0);
  const Complex a11 = a_elem(g_a, g_a);
  const Complex a10 = a_elem(g_a, 0.0);
  const Complex b00 = b_elem(0.0, 0.0);
  const Complex bpp = b_elem(g_b, g_b);
  const Complex bmm = b_elem(-g_b, -g_b);
  const Complex b0p = b_elem(0.0, g_b);
  const Complex b0m = b_elem(0.0, -g_b);
  const Complex bpm = b_elem(g_b, -g_b);

  MomentDecomposition m;
  m.m_cl = (std::norm(amps.l) * a11 * b00 + std::norm(amps.r_plus) * a00 * bpp + std::norm(amps.r_minus) * a00 * bmm)
               .real();
  m.m_ent = 2.0 * (std::conj(amps.l) * amps.r_plus * a10 * b0p).real() +
            2.0 * (std::conj(amps.l) * amps.r_minus * a10 * b0m).real();
  m.m_li = 2.0 * (std::conj(amps.r_plus) * amps.r_minus * a00 * bpm).real();
  return m;
}

double cross_moment(const TransitionAmplitudes& amps, double g_a, double g_b) {
  Couplings{g_a, g_b}.validate();
  return 0.5 * g_a * g_b * gaussian_overlap0(g_a) * gaussian_overlap0(g_b) *
         (std::conj(amps.l) * amps.spin_difference()).real();
}

double cheshire_bound(double g_a, double g_b) { return 0.25 * coupling_factor(g_a) * coupling_factor(g_b); }

CheshireResult cheshire_analytic(const PhotonEffect& effect, const PhotonDensity& rho, double g_a, double g_b) {
  const Couplings g{g_a, g_b};
  g.validate();
  const auto& ops = canonical_operators();
  const Complex tr = trace_term(effect, rho);

  // P = sum_jk Tr(E Pi_j rho Pi_k) <M_k|M_j> over branches j, k in {L, R+, R-}.
  const std::array<const Mat4*, 3> proj{&ops.pi_L, &ops.pi_R_plus, &ops.pi_R_minus};
  const double w = gaussian_overlap0(g_a) * gaussian_overlap0(g_b);
  const double pm = gaussian_overlap0(2.0 * g_b);
  const double gram[3][3] = {{1.0, w, w}, {w, 1.0, pm}, {w, pm, 1.0}};
  double p = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      p += gram[j][k] * (effect.matrix() * *proj[j] * rho.matrix() * *proj[k]).trace().real();
    }
  }
  if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
    throw ConsistencyError("success probability outside [0, 1]");
  }

  CheshireResult r;
  r.couplings = g;
  r.trace_term = tr;
  r.p_success = std::clamp(p, 0.0, 1.0);
  r.c_value = coupling_factor(g_a) * coupling_factor(g_b) * tr.real();
  if (std::abs(r.c_value) > cheshire_bound(g_a, g_b) + 1e-10) {
    throw ConsistencyError("indicator exceeds its theoretical bound");
  }
  return r;
}

CheshireResult cheshire_analytic(const StatePair& states, double g_a, double g_b) {
  return cheshire_analytic(PhotonEffect::projector(states.post), PhotonDensity::pure(states.prep), g_a, g_b);
}

LocalAverages local_averages(const TransitionAmplitudes& amps, double g_a, double g_b, double epsilon) {
  const Couplings g{g_a, g_b};
  const double p = success_probability(amps, g);
  if (!(p > epsilon)) {
    std::ostringstream os;
    os << "postselection probability " << p << " too small for conditional averages";
    throw OrthogonalPostselection(os.str());
  }
  const double w = gaussian_overlap0(g_a) * gaussian_overlap0(g_b);
  const double x_p = std::norm(amps.l) * g_a + g_a * w * (std::conj(amps.l) * (amps.r_plus + amps.r_minus)).real();
  const double y_p = g_b * (std::norm(amps.r_plus) - std::norm(amps.r_minus)) +
                     g_b * w * (std::conj(amps.l) * amps.spin_difference()).real();
  return {x_p / p, y_p / p, p};
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
  if (!(hi > lo)) throw ValidationError("golden section: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

CouplingOptimum optimize_couplings(const PhotonEffect& effect, const PhotonDensity& rho) {
  const double re_tr = trace_term(effect, rho).real();
  if (std::abs(re_tr) <= kFlatTolerance) {
    throw FlatObjective("Re Tr(E sigma_R rho Pi_L) vanishes; the indicator is zero at every coupling");
  }
  const double g_a = golden_section_maximize(coupling_factor, 0.0, kCouplingSearchMax, kCouplingTolerance);
  const double g_b = golden_section_maximize(coupling_factor, 0.0, kCouplingSearchMax, kCouplingTolerance);
  return {g_a, g_b, coupling_factor(g_a) * coupling_factor(g_b) * re_tr};
}

StateOptimum optimize_states(double g_a, double g_b, const StateSearchOptions& options) {
  if (!(g_a > 0.0) || !(g_b > 0.0)) throw ValidationError("state search needs positive couplings");
  if (options.starts == 0) throw ValidationError("state search needs at least one start");
  const auto& ops = canonical_operators();

  struct Candidate {
    Vec4 psi, phi;
    double value;
  };
  std::vector<Candidate> results(options.starts);

  parallel_for(options.starts, options.threads, [&](std::size_t start) {
    CounterRng rng(options.seed, start);
    Vec4 phi = random_ket(rng);
    Vec4 psi = random_ket(rng);
    double value = state_objective(psi, phi);
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
      const Mat4 outer_phi = phi * phi.adjoint();
      const Mat4 h_psi = 0.5 * (ops.pi_L * outer_phi * ops.sigma_R + ops.sigma_R * outer_phi * ops.pi_L);
      psi = top_eigenvector(h_psi);
      const Mat4 outer_psi = psi * psi.adjoint();
      const Mat4 h_phi = 0.5 * (ops.sigma_R * outer_psi * ops.pi_L + ops.pi_L * outer_psi * ops.sigma_R);
      phi = top_eigenvector(h_phi);
      const double next = state_objective(psi, phi);
      const bool converged = next - value < 1e-15;
      value = std::max(value, next);
      if (converged) break;
    }
    results[start] = {psi, phi, value};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].value > results[best].value) best = i;
  }
  StateOptimum out{{PhotonKet::normalized(to_array(results[best].psi)), PhotonKet::normalized(to_array(results[best].phi))},
                   results[best].value,
                   0.0,
                   best};
  out.objective = state_objective(out.states.prep.vector(), out.states.post.vector());
  out.c_value = coupling_factor(g_a) * coupling_factor(g_b) * out.objective;
  return out;
}

StatePair states_with_weak_values(Complex L_w, Complex Sigma_w) {
  // With s = l + r+ + r- = 1: l = L_w, r+ - r- = Sigma_w, r+ + r- = 1 - L_w.
  const Complex l = L_w;
  const Complex r_plus = 0.5 * (1.0 - L_w + Sigma_w);
  const Complex r_minus = 0.5 * (1.0 - L_w - Sigma_w);
  const double third = 1.0 / std::sqrt(3.0);
  const PhotonKet prep(std::array<Complex, 4>{third, 0.0, third, third});
  // <Phi|Pi|Psi> = conj(phi_k) / sqrt(3) for the balanced preparation.
  const PhotonKet post =
      PhotonKet::normalized(std::array<Complex, 4>{std::conj(l), 0.0, std::conj(r_plus), std::conj(r_minus)});
  return {prep, post};
}

}  // namespace qcat
