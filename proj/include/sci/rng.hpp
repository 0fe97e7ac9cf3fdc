#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace sci {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a 64-bit hash; used to key streams and manifests by name.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// A seeded random stream with the samplers the simulator needs.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. All distributions are implemented here, so a seed reproduces the
/// same draws on any conforming standard library.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  /// Independent stream for (master, a, b), e.g. (seed, dgp key, path index).
  static Stream derive(std::uint64_t master, std::uint64_t a, std::uint64_t b);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform();

  /// Uniform integer on the closed interval [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma with shape k and scale theta (mean k * theta).
  double gamma(double shape, double scale);

  double beta(double a, double b);

  /// Symmetric Dirichlet(alpha, ..., alpha) of dimension n, built from
  /// normalized Gamma(alpha, 1) draws.
  Eigen::VectorXd dirichlet(Eigen::Index n, double alpha);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace sci
