#pragma once

// Meter (pointer) models.
//
// Pointers are measured in units of their initial uncertainty, so every
// initial wavefunction has zero mean and unit variance. A von Neumann
// coupling g displaces the pointer wavefunction: psi0(x) -> psi0(x - g).
// Couplings are stored unsigned; branch signs (the B meter moves by +g or
// -g) are applied by the dynamics layer through the shift arguments below.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace qcat {

using Complex = std::complex<double>;

/// Multiplicative weight in a single-meter matrix element.
enum class Weight { One, Position };

/// phi0(x) = (2 pi)^(-1/4) exp(-x^2 / 4).
double gaussian_wavefunction(double x);

/// Integral of phi0(x) phi0(x - g) dx = exp(-g^2 / 8).
double gaussian_overlap0(double g);
/// Integral of x phi0(x) phi0(x - g) dx = (g / 2) exp(-g^2 / 8).
double gaussian_overlap1(double g);

/// <phi0(. - bra_shift)| w |phi0(. - ket_shift)> in closed form.
double gaussian_matrix_element(double bra_shift, double ket_shift, Weight w);

struct GaussianMeter {
  explicit GaussianMeter(double g = 0.0);
  double coupling;
};

struct UniformGrid {
  double x_min = -20.0;
  double x_max = 20.0;
  std::size_t points = 4001;

  double spacing() const { return (x_max - x_min) / static_cast<double>(points - 1); }
  double point(std::size_t i) const { return x_min + static_cast<double>(i) * spacing(); }
  /// Throws ValidationError for fewer than 2 points or an empty interval.
  void validate() const;
};

inline constexpr UniformGrid kDefaultGrid{-20.0, 20.0, 4001};

enum class ShiftInterpolation {
  Linear,
  Lagrange,  // 8-point stencil, exact for lattice-aligned shifts
};

/// Meter whose initial wavefunction is only known on a uniform lattice.
class GridMeter {
 public:
  /// Validates normalization (1e-10), zero mean (1e-8) and unit second
  /// moment (1e-6).
  GridMeter(UniformGrid grid, std::vector<Complex> psi0, double coupling = 0.0,
            ShiftInterpolation interp = ShiftInterpolation::Lagrange);

  /// Samples the unit-variance Gaussian on the grid and renormalizes.
  static GridMeter gaussian(const UniformGrid& grid = kDefaultGrid, double coupling = 0.0);

  /// Reads whitespace-separated "x value" lines; '#' starts a comment. The
  /// value column accepts "re", "re+imi" or "imi". x must be uniformly
  /// spaced. The norm is rescaled to 1; mean and variance are validated.
  static GridMeter from_file(const std::filesystem::path& path, double coupling = 0.0);

  GridMeter with_coupling(double g) const;

  const UniformGrid& grid() const { return grid_; }
  std::span<const Complex> psi0() const { return psi0_; }
  double coupling() const { return coupling_; }
  ShiftInterpolation interpolation() const { return interp_; }

  /// psi0(x_i - shift) on the lattice. Throws GridTooSmall if more than
  /// kMaxLostNorm of the probability is pushed past the grid boundary.
  std::vector<Complex> shifted(double shift) const;

  /// Trapezoidal <psi0(. - bra_shift)| w |psi0(. - ket_shift)>.
  Complex matrix_element(double bra_shift, double ket_shift, Weight w) const;

  static constexpr double kMaxLostNorm = 1e-14;

 private:
  UniformGrid grid_;
  std::vector<Complex> psi0_;
  double coupling_;
  ShiftInterpolation interp_;
};

/// Trapezoidal integral of w(x) conj(a_i) b_i over the grid.
Complex grid_integral(const UniformGrid& grid, std::span<const Complex> a, std::span<const Complex> b,
                      Weight w);

/// Integral of w(x) psi0*(x) psi0(x - shift) dx on the lattice.
Complex grid_overlap(const GridMeter& meter, double shift, Weight w);

/// o0(g) = <A0|A1>, o1(g) = <A0|x|A1> for a meter displaced by g.
struct OverlapSet {
  Complex o0;
  Complex o1;
};

OverlapSet gaussian_overlaps(double g);
OverlapSet grid_overlaps(const GridMeter& meter, double g);

using MeterModel = std::variant<GaussianMeter, GridMeter>;

double coupling(const MeterModel& meter);
Complex matrix_element(const MeterModel& meter, double bra_shift, double ket_shift, Weight w);

}  // namespace qcat
