#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <utility>

#include "oicap/channel.hpp"
#include "oicap/numerics.hpp"

// Independent numerical capacity machinery: mutual information of discrete
// inputs, a constrained Blahut-Arimoto capacity estimate on an amplitude
// grid, the duality output densities and relative-entropy evaluation
// against them.
namespace oicap {

struct DiscreteInputDistribution {
  Eigen::ArrayXd points;  // strictly increasing, all >= 0
  Eigen::ArrayXd probs;   // nonnegative, sums to one

  double mean() const { return (points * probs).sum(); }

  /// Checks the distribution invariants and, when given, the peak /
  /// average constraints. Throws std::domain_error on violation.
  void validate(std::optional<double> peak = std::nullopt,
                std::optional<double> average = std::nullopt) const;
};

struct OracleConfig {
  int grid_points = 0;        // 0 -> 400 with a peak constraint, 800 without
  double support_max = 0.0;   // average-only truncation in sigma units; 0 -> max(40, 20 E/sigma)
  double ba_tolerance = 1e-5; // stop when the capacity bracket falls below this
  long max_iterations = 200000;  // total across the multiplier search
  std::pair<double, double> multiplier_bracket{0.0, 0.0};  // {0,0} -> automatic

  void validate() const;
};

/// I(X;Y) for a discrete input over the Gaussian law, computed as
/// h(Y) - h(Z) with h(Y) integrated adaptively over
/// [min point - 10 sigma, max point + 10 sigma]. Nonnegative.
double mutual_information(const DiscreteInputDistribution& dist,
                          const ChannelLaw& law,
                          const QuadratureConfig& cfg = {});

/// Mutual information of the two-point input {0, A} with mass
/// effective_alpha on A; requires a peak constraint. A capacity lower bound.
double binary_input_mi(const ChannelParams& params,
                       const QuadratureConfig& cfg = {});

/// Average-only regime: best two-point input {0, x} with mass E/x on x,
/// maximized over x. Achieves the low-SNR capacity envelope up to the
/// constant factor; a capacity lower bound for every E.
double binary_lower_average_only(const ChannelParams& params,
                                 const QuadratureConfig& cfg = {});

struct OracleResult {
  double nats = 0.0;              // achieved mutual information (lower functional)
  double upper_functional = 0.0;  // duality upper functional at the final iterate
  double bracket = 0.0;           // upper_functional - achieved value at stop
  double multiplier = 0.0;        // average-power tilt s >= 0
  long iterations = 0;            // total Blahut-Arimoto iterations used
  DiscreteInputDistribution distribution;
};

/// Constrained Blahut-Arimoto on a uniform amplitude grid over [0, A]
/// (peak regimes) or [0, support_max * sigma] (average-only). The average
/// constraint is enforced by an exponential tilt e^{-s x} whose multiplier
/// is found by monotone root finding on the achieved mean. Iterates until
/// the per-iteration capacity bracket falls below ba_tolerance; throws
/// convergence_error (carrying the last achieved value) if max_iterations
/// is exhausted first.
OracleResult capacity_oracle(const ChannelParams& params,
                             const OracleConfig& cfg = {});

/// The five output laws used by the duality upper bounds.
enum class OutputDensityVariant {
  case1_low,   // Gaussian matched to the constrained input variance
  case1_high,  // Gaussian tails glued to an exponential-in-y middle
  case2_low,   // Gaussian matched to the peak-only input variance
  case2_high,  // Gaussian tails glued to a flat middle
  case3,       // Gaussian left tail glued to a shifted exponential
};

struct OutputDensitySpec {
  OutputDensityVariant variant;
  ChannelParams params;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

double output_density(const OutputDensitySpec& spec, double y);
double log_output_density(const OutputDensitySpec& spec, double y);

/// sum_i prob_i D(N(point_i, sigma^2) || R') for the chosen output law R'.
/// Upper-bounds the mutual information of `dist` for every valid spec.
double duality_gap(const DiscreteInputDistribution& dist,
                   const OutputDensitySpec& spec, const ChannelLaw& law,
                   const QuadratureConfig& cfg = {});

}  // namespace oicap
