#include "qcat/meter.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>

#include "qcat/errors.hpp"
#include "qcat/text.hpp"

namespace qcat {
namespace {

constexpr double kGridNormTolerance = 1e-10;
constexpr double kGridMeanTolerance = 1e-8;
constexpr double kGridVarianceTolerance = 1e-6;
constexpr int kStencilLo = -3;
constexpr int kStencilHi = 4;

double grid_moment(const UniformGrid& grid, std::span<const Complex> psi, int power) {
  const std::size_t n = grid.points;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.point(i);
    const double trap = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    sum += trap * std::pow(x, power) * std::norm(psi[i]);
  }
  return sum * grid.spacing();
}

std::array<double, kStencilHi - kStencilLo + 1> lagrange_weights(double u) {
  std::array<double, kStencilHi - kStencilLo + 1> w{};
  for (int m = kStencilLo; m <= kStencilHi; ++m) {
    double prod = 1.0;
    for (int k = kStencilLo; k <= kStencilHi; ++k) {
      if (k != m) prod *= (u - k) / static_cast<double>(m - k);
    }
    w[static_cast<std::size_t>(m - kStencilLo)] = prod;
  }
  return w;
}

}  // namespace

double gaussian_wavefunction(double x) {
  static const double norm = std::pow(2.0 * std::numbers::pi, -0.25);
  return norm * std::exp(-x * x / 4.0);
}

double gaussian_overlap0(double g) { return std::exp(-g * g / 8.0); }

double gaussian_overlap1(double g) { return 0.5 * g * std::exp(-g * g / 8.0); }

double gaussian_matrix_element(double bra_shift, double ket_shift, Weight w) {
  const double d = bra_shift - ket_shift;
  const double overlap = std::exp(-d * d / 8.0);
  return w == Weight::One ? overlap : 0.5 * (bra_shift + ket_shift) * overlap;
}

GaussianMeter::GaussianMeter(double g) : coupling(g) {
  if (!(g >= 0.0) || std::isnan(g)) throw ValidationError("meter coupling must be >= 0");
}

void UniformGrid::validate() const {
  if (points < 2) throw ValidationError("grid needs at least 2 points");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ValidationError("grid bounds must satisfy x_min < x_max");
  }
}

GridMeter::GridMeter(UniformGrid grid, std::vector<Complex> psi0, double coupling, ShiftInterpolation interp)
    : grid_(grid), psi0_(std::move(psi0)), coupling_(coupling), interp_(interp) {
  grid_.validate();
  if (psi0_.size() != grid_.points) throw ValidationError("grid meter: wavefunction size does not match grid");
  if (!(coupling_ >= 0.0)) throw ValidationError("meter coupling must be >= 0");

  const double norm = grid_moment(grid_, psi0_, 0);
  const double mean = grid_moment(grid_, psi0_, 1);
  const double second = grid_moment(grid_, psi0_, 2);
  std::ostringstream os;
  if (std::abs(norm - 1.0) > kGridNormTolerance) {
    os << "grid meter: norm " << norm << " != 1";
  } else if (std::abs(mean) > kGridMeanTolerance) {
    os << "grid meter: biased pointer, mean " << mean;
  } else if (std::abs(second - 1.0) > kGridVarianceTolerance) {
    os << "grid meter: second moment " << second << " != 1 (pointer must be in units of its spread)";
  }
  if (!os.str().empty()) throw ValidationError(os.str());
}

GridMeter GridMeter::gaussian(const UniformGrid& grid, double coupling) {
  grid.validate();
  std::vector<Complex> psi(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) psi[i] = gaussian_wavefunction(grid.point(i));
  const double norm = std::sqrt(grid_moment(grid, psi, 0));
  for (auto& v : psi) v /= norm;
  return GridMeter(grid, std::move(psi), coupling);
}

GridMeter GridMeter::from_file(const std::filesystem::path& path, double coupling) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open meter file " + path.string());
  std::vector<double> xs;
  std::vector<Complex> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = text::trim(line);
    if (body.empty()) continue;
    const auto split = body.find_first_of(" \t,");
    if (split == std::string_view::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    }
    try {
      xs.push_back(text::parse_double(body.substr(0, split)));
      std::string_view rest = text::trim(body.substr(split));
      if (!rest.empty() && rest.front() == ',') rest = text::trim(rest.substr(1));
      values.push_back(text::parse_complex(rest));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (xs.size() < 2) throw ValidationError(path.string() + ": need at least two samples");

  UniformGrid grid{xs.front(), xs.back(), xs.size()};
  grid.validate();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - grid.point(i)) > 1e-9 * std::max(1.0, std::abs(xs[i]))) {
      throw ValidationError(path.string() + ": x column is not uniformly spaced");
    }
  }
  const double norm = std::sqrt(grid_moment(grid, values, 0));
  if (!(norm > 0.0)) throw ValidationError(path.string() + ": wavefunction vanishes");
  for (auto& v : values) v /= norm;
  return GridMeter(grid, std::move(values), coupling);
}

GridMeter GridMeter::with_coupling(double g) const {
  GridMeter copy = *this;
  if (!(g >= 0.0)) throw ValidationError("meter coupling must be >= 0");
  copy.coupling_ = g;
  return copy;
}

std::vector<Complex> GridMeter::shifted(double shift) const {
  const std::size_t n = grid_.points;
  const double h = grid_.spacing();
  std::vector<Complex> out(n, Complex{});
  if (shift == 0.0) {
    out = psi0_;
    return out;
  }

  // Source sample j lands at x_j + shift; anything landing outside is lost.
  double lost = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dest = grid_.point(j) + shift;
    if (dest > grid_.x_max + 0.5 * h || dest < grid_.x_min - 0.5 * h) lost += std::norm(psi0_[j]) * h;
  }
  if (lost > kMaxLostNorm) {
    std::ostringstream os;
    os << "shift " << shift << " pushes norm " << lost << " off the grid [" << grid_.x_min << ", " << grid_.x_max
       << "]";
    throw GridTooSmall(os.str());
  }

  const auto sample = [&](long long j) -> Complex {
    return (j < 0 || j >= static_cast<long long>(n)) ? Complex{} : psi0_[static_cast<std::size_t>(j)];
  };

  const double q = shift / h;
  const double q_round = std::round(q);
  if (std::abs(q - q_round) < 1e-9) {
    const auto k = static_cast<long long>(q_round);
    for (std::size_t i = 0; i < n; ++i) out[i] = sample(static_cast<long long>(i) - k);
    return out;
  }

  // x_i - shift sits at fractional index (i - k - 1) + u with u in (0, 1).
  const double k = std::floor(q);
  const double u = 1.0 - (q - k);
  const auto base_offset = static_cast<long long>(k) + 1;
  if (interp_ == ShiftInterpolation::Linear) {
    for (std::size_t i = 0; i < n; ++i) {
      const long long j0 = static_cast<long long>(i) - base_offset;
      out[i] = (1.0 - u) * sample(j0) + u * sample(j0 + 1);
    }
    return out;
  }
  const auto w = lagrange_weights(u);
  for (std::size_t i = 0; i < n; ++i) {
    const long long j0 = static_cast<long long>(i) - base_offset;
    Complex acc{};
    for (int m = kStencilLo; m <= kStencilHi; ++m) acc += w[static_cast<std::size_t>(m - kStencilLo)] * sample(j0 + m);
    out[i] = acc;
  }
  return out;
}

Complex grid_integral(const UniformGrid& grid, std::span<const Complex> a, std::span<const Complex> b, Weight w) {
  const std::size_t n = grid.points;
  if (a.size() != n || b.size() != n) throw ValidationError("grid_integral: size mismatch");
  Complex sum{};
  for (std::size_t i = 0; i < n; ++i) {
    const double trap = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    const double weight = w == Weight::One ? 1.0 : grid.point(i);
    sum += trap * weight * std::conj(a[i]) * b[i];
  }
  return sum * grid.spacing();
}

Complex GridMeter::matrix_element(double bra_shift, double ket_shift, Weight w) const {
  const auto bra = shifted(bra_shift);
  const auto ket = shifted(ket_shift);
  return grid_integral(grid_, bra, ket, w);
}

Complex grid_overlap(const GridMeter& meter, double shift, Weight w) { return meter.matrix_element(0.0, shift, w); }

OverlapSet gaussian_overlaps(double g) { return {gaussian_overlap0(g), gaussian_overlap1(g)}; }

OverlapSet grid_overlaps(const GridMeter& meter, double g) {
  const auto ket = meter.shifted(g);
  return {grid_integral(meter.grid(), meter.psi0(), ket, Weight::One),
          grid_integral(meter.grid(), meter.psi0(), ket, Weight::Position)};
}

double coupling(const MeterModel& meter) {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GaussianMeter>) {
          return m.coupling;
        } else {
          return m.coupling();
        }
      },
      meter);
}

Complex matrix_element(const MeterModel& meter, double bra_shift, double ket_shift, Weight w) {
  return std::visit(
      [&](const auto& m) -> Complex {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GaussianMeter>) {
          return gaussian_matrix_element(bra_shift, ket_shift, w);
        } else {
          return m.matrix_element(bra_shift, ket_shift, w);
        }
      },
      meter);
}

}  // namespace qcat
