#pragma once

#include <cstdint>
#include <limits>
#include <utility>

namespace qcat {

/// SplitMix64 stream selected by (seed, stream).
///
/// The starting state is mix(seed ^ mix(stream + gamma)), where mix is the
/// SplitMix64 finalizer and gamma = 0x9e3779b97f4a7c15. Each draw adds gamma
/// to the state and returns mix(state). Independent streams per trial index
/// make parallel and serial generation produce identical values.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair();

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

}  // namespace qcat
