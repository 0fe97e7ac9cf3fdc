#pragma once

// Simulated post-shock paths for the eight benchmark regimes.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sci/flows.hpp"
#include "sci/rng.hpp"

namespace sci {

inline constexpr int kDefaultBins = 48;
inline constexpr double kDefaultStartPrice = 0.72;
inline constexpr double kPriceFloor = 0.01;
inline constexpr double kPriceCeiling = 0.99;
inline constexpr std::uint64_t kDefaultSeed = 20260429;

struct IidNormal {
  double mean;
  double sd;
};

/// r_t = phi r_{t-1} + N(mean, sd^2); the first return is a bare innovation.
struct Ar1 {
  double phi;
  double mean;
  double sd;
};

using BaseProcess = std::variant<IidNormal, Ar1>;

/// Returns are indexed t = 1..n (r_t moves l_{t-1} to l_t). Returns with
/// t < switch_bin follow `before`, the rest follow `after`.
struct PiecewiseReturns {
  int switch_bin;
  BaseProcess before;
  BaseProcess after;
};

using ReturnProcess = std::variant<IidNormal, Ar1, PiecewiseReturns>;

struct GammaParams {
  double shape;
  double scale;
};

struct TwoGamma {
  GammaParams buy;
  GammaParams sell;
};

/// Total volume Gamma(k, theta), buy share Beta(a, b), per bin.
struct GammaBetaSplit {
  GammaParams total;
  double beta_a;
  double beta_b;
};

using BaseVolume = std::variant<TwoGamma, GammaBetaSplit>;

/// Same switching convention as PiecewiseReturns: volume bin b carries the
/// move of return t = b + 1.
struct PiecewiseVolumes {
  int switch_bin;
  BaseVolume before;
  BaseVolume after;
};

using VolumeModel = std::variant<TwoGamma, GammaBetaSplit, PiecewiseVolumes>;

struct DgpSpec {
  std::string name;
  ReturnProcess returns;
  VolumeModel volumes;
  int traders_lo{1};
  int traders_hi{1};
  double dirichlet_alpha{1.0};
  int label{0};
  int n_bins{kDefaultBins};
  double start_price{kDefaultStartPrice};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct SimulatedPath {
  std::string dgp_name;
  int label{0};
  Eigen::VectorXd prices;  // n_bins + 1 clipped probabilities, prices[0] = start
  Eigen::VectorXd buy;     // n_bins
  Eigen::VectorXd sell;    // n_bins
  Eigen::VectorXd flows;   // one signed net flow per trader, ids "w<i>"

  Eigen::VectorXd logits() const;
  TraderFlows trader_flows() const { return TraderFlows(flows); }
};

struct Dataset {
  std::vector<SimulatedPath> paths;
  std::uint64_t master_seed{0};
  std::vector<std::pair<std::string, std::size_t>> counts;
};

/// The eight regimes, keyed by name.
const std::map<std::string, DgpSpec>& builtin_specs();

/// Builtin names: the three baselines, then the five adversarial regimes.
const std::vector<std::string>& builtin_names();

const std::vector<std::string>& baseline_names();     // informed, liquidity, disagreement
const std::vector<std::string>& adversarial_names();  // the five stress regimes

const DgpSpec& builtin_spec(const std::string& name);

SimulatedPath sample_path(const DgpSpec& spec, Stream& rng);

/// Stream for path `index` of a regime; keyed by the regime name so a
/// regime draws the same paths whichever list it appears in.
Stream path_stream(std::uint64_t master_seed, const std::string& dgp_name, std::size_t index);

/// `threads` = 0 uses the hardware concurrency. Output does not depend on it.
Dataset generate_dataset(std::span<const DgpSpec> specs, std::size_t n_per_dgp,
                         std::uint64_t master_seed, unsigned threads = 0);

Dataset generate_dataset(std::span<const std::string> names, std::size_t n_per_dgp,
                         std::uint64_t master_seed, unsigned threads = 0);

enum class SweepParam { ArCoefficient, DirichletAlpha };

/// One spec per grid value; names get a "[param=value]" suffix.
std::vector<DgpSpec> sweep_specs(const DgpSpec& base, SweepParam param,
                                 std::span<const double> grid);

// Line-delimited JSON export: a header record, then one record per path.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

}  // namespace sci
