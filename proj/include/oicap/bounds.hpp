#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "oicap/channel.hpp"

// Closed-form capacity bounds for the three constraint regimes, the
// suboptimal-but-useful free-parameter choices that go with the duality
// upper bounds, and the high/low-SNR asymptotics.
namespace oicap {

enum class BoundSource {
  case1_epi_lower,          // entropy-power lower bound, truncated-exponential input
  case1_gaussian_upper,     // duality bound against a Gaussian output law
  case1_exponential_upper,  // duality bound against an exponential-middle output law
  case2_epi_lower,          // entropy-power lower bound, uniform input
  case2_gaussian_upper,
  case2_uniform_upper,      // duality bound against a uniform-middle output law
  case3_epi_lower,          // entropy-power lower bound, exponential input
  case3_low_snr_upper,      // shifted-exponential output law, negative-shift regime
  case3_high_snr_upper,     // shifted-exponential output law, nonnegative-shift regime
};

std::string_view to_string(BoundSource source);

struct BoundValue {
  double nats = 0.0;
  enum class Kind { lower, upper } kind = Kind::lower;
  BoundSource source = BoundSource::case1_epi_lower;
  std::map<std::string, double> free_params;  // mu, delta, beta, mu_star as applicable
  bool clamped = false;                       // lower bound clamped at zero
};

/// Rate parameter of the max-entropy truncated exponential on [0, A] with
/// mean alpha*A: the unique mu > 0 with alpha = 1/mu - 1/(e^mu - 1).
/// Strictly decreasing from 1/2 (mu -> 0) to 0 (mu -> inf).
double mu_star(double alpha);

// --- both constraints, dominant average power (0 < alpha < 1/2) ---
BoundValue lower_case1(const ChannelParams& params, double mu_star_value);
BoundValue upper_case1_low(const ChannelParams& params);
BoundValue upper_case1_high(const ChannelParams& params, double delta, double mu);

struct Case1FreeParams {
  double delta = 0.0;
  double mu = 0.0;
  bool degenerate = false;  // peak amplitude zero; both parameters collapse
};
Case1FreeParams heuristic_case1(const ChannelParams& params);
Case1FreeParams heuristic_case1(double peak, double sigma, double alpha,
                                double mu_star_value);

// --- both constraints, inactive average power (1/2 <= alpha <= 1) ---
BoundValue lower_case2(const ChannelParams& params);
BoundValue upper_case2_low(const ChannelParams& params);
BoundValue upper_case2_high(const ChannelParams& params, double delta);
double heuristic_case2_delta(const ChannelParams& params);

// --- average power only ---
BoundValue lower_case3(const ChannelParams& params);
/// Valid for delta <= -sigma/sqrt(e); tight at low SNR.
BoundValue upper_case3_low(const ChannelParams& params, double delta, double beta);
/// Valid for delta >= 0; tight at high SNR.
BoundValue upper_case3_high(const ChannelParams& params, double delta, double beta);

struct Case3FreeParams {
  double delta = 0.0;
  double beta = 0.0;
};
/// Heuristic for the low-SNR bound; only defined for E/sigma <= e^{-1/(4e)}
/// (about -0.4 dB), where the suggested delta respects its validity range.
std::optional<Case3FreeParams> heuristic_case3_low(const ChannelParams& params);
Case3FreeParams heuristic_case3_high(const ChannelParams& params);

/// Threshold E/sigma below which heuristic_case3_low applies.
double case3_low_snr_heuristic_limit();

/// High-SNR offset chi = lim (C - log(A/sigma)) (resp. log(E/sigma)) plus
/// the low-SNR behavior: quadratic coefficient for the peak-constrained
/// cases, envelope factors for the average-only case.
struct AsymptoteValue {
  double high_snr_offset = 0.0;
  std::optional<double> low_snr_coefficient;                  // C / (A/sigma)^2 limit
  std::optional<std::pair<double, double>> low_snr_envelope;  // (upper, lower) factors
};
AsymptoteValue asymptote(const CaseLabel& label);

/// Pointwise best lower/upper pair for the applicable regime. Upper bounds
/// take the heuristic free parameters; with refine=true each free parameter
/// is additionally minimized by golden-section search over a +-50% bracket
/// around its heuristic value (two coordinate passes).
struct BestBoundsOptions {
  bool refine = false;
  int refine_passes = 2;
};
struct BoundPair {
  BoundValue lower;
  BoundValue upper;
};
BoundPair best_bounds(const ChannelParams& params, const BestBoundsOptions& options = {});

}  // namespace oicap
