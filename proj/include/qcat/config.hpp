#pragma once

// Flat key=value experiment description.
//
//   # comment
//   prep = 0.57735026918962573+0i, 0, 0.57735026918962573, 0.57735026918962573
//   post = ...            (or: effect = 16 complex entries, row-major)
//   g_a = 2
//   g_b = 2
//   noise_a = 0
//   noise_b = 0
//   n_trials = 1000000
//   seed = 42
//   grid_min = -20
//   grid_max = 20
//   grid_points = 4001
//   normalize = false     (true rescales prep/post to unit norm on load)
//
// Complex values are written "re+imi". Amplitudes are ordered
// |L,+>, |L,->, |R,+>, |R,->.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "qcat/errors.hpp"
#include "qcat/meter.hpp"
#include "qcat/qsystem.hpp"

namespace qcat {

/// Invalid configuration; field() names the offending key.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ValidationError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::array<Complex, 4> prep{};
  std::optional<std::array<Complex, 4>> post;
  std::optional<Mat4> effect;
  double g_a = 2.0;
  double g_b = 2.0;
  double noise_a = 0.0;
  double noise_b = 0.0;
  std::uint64_t n_trials = 1000000;
  std::uint64_t seed = 42;
  UniformGrid grid = kDefaultGrid;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  PhotonKet prep_ket() const;
  /// Requires a pure postselection; throws ConfigError("post") otherwise.
  PhotonKet post_ket() const;
  bool has_pure_post() const { return post.has_value(); }
  PhotonEffect post_effect() const;
  PhotonDensity prep_density() const { return PhotonDensity::pure(prep_ket()); }

  bool operator==(const ExperimentConfig& other) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Writes every field; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

}  // namespace qcat
