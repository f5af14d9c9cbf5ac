#include "oicap/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "oicap/numerics.hpp"

namespace oicap {

ChannelParams ChannelParams::peak_and_average(double peak, double average, double sigma) {
  ChannelParams p;
  p.peak_amplitude = peak;
  p.average_amplitude = average;
  p.noise_sigma = sigma;
  p.validate();
  return p;
}

ChannelParams ChannelParams::average_only(double average, double sigma) {
  ChannelParams p;
  p.average_amplitude = average;
  p.noise_sigma = sigma;
  p.validate();
  return p;
}

void ChannelParams::validate() const {
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw std::domain_error("ChannelParams: sigma must be positive and finite");
  }
  if (!(average_amplitude > 0.0) || !std::isfinite(average_amplitude)) {
    throw std::domain_error("ChannelParams: average amplitude must be positive and finite");
  }
  if (peak_amplitude) {
    if (!(*peak_amplitude > 0.0) || !std::isfinite(*peak_amplitude)) {
      throw std::domain_error("ChannelParams: peak amplitude must be positive and finite");
    }
    if (average_amplitude > *peak_amplitude) {
      throw std::domain_error("ChannelParams: average amplitude must not exceed the peak");
    }
  }
}

double ChannelParams::alpha() const {
  if (!peak_amplitude) {
    throw std::domain_error("ChannelParams: alpha undefined without a peak constraint");
  }
  return average_amplitude / *peak_amplitude;
}

CaseLabel classify(const ChannelParams& params) {
  params.validate();
  if (!params.has_peak()) {
    return {ConstraintCase::average_only, std::nullopt};
  }
  const double a = params.alpha();
  if (a < 0.5) {
    return {ConstraintCase::peak_dominated_average, a};
  }
  return {ConstraintCase::peak_only, 0.5};
}

double conditional_density(const ChannelLaw& law, double x, double y) {
  if (!(law.sigma > 0.0)) {
    throw std::domain_error("conditional_density: sigma must be positive");
  }
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error("conditional_density: input must be nonnegative");
  }
  return normal_pdf(y, x, law.sigma);
}

double db_to_amplitude_ratio(double db, DbConvention convention) {
  const double denom = (convention == DbConvention::power10) ? 10.0 : 20.0;
  return std::pow(10.0, db / denom);
}

double amplitude_ratio_to_db(double ratio, DbConvention convention) {
  if (!(ratio > 0.0)) {
    throw std::domain_error("amplitude_ratio_to_db: ratio must be positive");
  }
  const double factor = (convention == DbConvention::power10) ? 10.0 : 20.0;
  return factor * std::log10(ratio);
}

}  // namespace oicap
