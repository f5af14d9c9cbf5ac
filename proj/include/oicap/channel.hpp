#pragma once

#include <optional>

// Channel parameters for the nonnegative-input AWGN (optical intensity)
// channel, constraint-regime classification and the conditional law.
namespace oicap {

/// Input constraints: peak amplitude A (optional), average amplitude E and
/// noise standard deviation sigma, all in the same units.
struct ChannelParams {
  std::optional<double> peak_amplitude;  // A; absent = average-power only
  double average_amplitude = 0.0;        // E
  double noise_sigma = 0.0;              // sigma

  static ChannelParams peak_and_average(double peak, double average, double sigma);
  static ChannelParams average_only(double average, double sigma);

  bool has_peak() const { return peak_amplitude.has_value(); }
  double alpha() const;  // E/A in (0,1]; throws without a peak constraint

  void validate() const;
};

/// Which constraint regime applies. For alpha in (1/2, 1] the average
/// constraint is inactive and everything evaluates at effective alpha 1/2.
enum class ConstraintCase {
  peak_dominated_average,  // 0 < alpha < 1/2
  peak_only,               // 1/2 <= alpha <= 1 (average constraint inactive)
  average_only,            // no peak constraint
};

struct CaseLabel {
  ConstraintCase kind;
  std::optional<double> effective_alpha;  // in (0, 1/2]; empty for average_only
};

CaseLabel classify(const ChannelParams& params);

/// Y = x + Z with Z ~ N(0, sigma^2); the conditional output density.
struct ChannelLaw {
  double sigma = 1.0;
};

double conditional_density(const ChannelLaw& law, double x, double y);

/// dB axis conventions for amplitude ratios A/sigma (or E/sigma).
/// power10 treats the amplitude as a power-like quantity (optical power is
/// proportional to the input current): ratio = 10^(dB/10). amplitude20 is
/// the electrical-amplitude convention: ratio = 10^(dB/20).
enum class DbConvention { power10, amplitude20 };

double db_to_amplitude_ratio(double db, DbConvention convention);
double amplitude_ratio_to_db(double ratio, DbConvention convention);

}  // namespace oicap
